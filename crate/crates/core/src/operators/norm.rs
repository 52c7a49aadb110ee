use crate::array::{slice_norm, Image};
use crate::rng::RngState;

use super::LinearOperator;

/// Power-method estimate of the largest singular value of a linear map given
/// by `apply` and `apply_adjoint` on flat vectors.
///
/// Iterates `v <- A^T A v / |A^T A v|` from a random start and reports the
/// largest `|A v|` seen, so the estimate never decreases with `iters`.
/// Returns 0 when the operator annihilates the iterate.
pub fn operator_norm_estimate<F, G>(
    apply: F,
    apply_adjoint: G,
    domain_len: usize,
    iters: usize,
    rng: &mut RngState,
) -> f64
where
    F: Fn(&[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut v: Vec<f64> = (0..domain_len).map(|_| rng.next_uniform() - 0.5).collect();
    let n0 = slice_norm(&v);
    if n0 == 0.0 {
        return 0.0;
    }
    v.iter_mut().for_each(|x| *x /= n0);
    let mut best = 0.0f64;
    for _ in 0..iters.max(1) {
        let w = apply(&v);
        best = best.max(slice_norm(&w));
        let u = apply_adjoint(&w);
        let nu = slice_norm(&u);
        if nu == 0.0 {
            break;
        }
        v = u.into_iter().map(|x| x / nu).collect();
    }
    best
}

/// [`operator_norm_estimate`] for a [`LinearOperator`].
pub fn operator_norm(op: &dyn LinearOperator, iters: usize, rng: &mut RngState) -> f64 {
    let g = op.domain().clone();
    operator_norm_estimate(
        |v| {
            let x = Image::from_vec(&g, v.to_vec()).expect("domain length");
            op.apply(&x).expect("domain geometry")
        },
        |w| op.apply_adjoint(w).expect("range length").into_values(),
        g.len(),
        iters,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ImageGeometry;
    use crate::operators::{grad_adjoint, grad_forward, DenseMatrix, GradientField};

    #[test]
    fn identity_and_scaling() {
        let g = ImageGeometry::new(3, 4, 1.0).unwrap();
        let id = DenseMatrix::identity(&g);
        assert!((operator_norm(&id, 50, &mut RngState::new(1)) - 1.0).abs() < 1e-6);
        let three = DenseMatrix::diagonal(&g, &[3.0; 12]).unwrap();
        assert!((operator_norm(&three, 50, &mut RngState::new(1)) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn zero_operator_has_zero_norm() {
        let g = ImageGeometry::square(3).unwrap();
        let zero = DenseMatrix::diagonal(&g, &[0.0; 9]).unwrap();
        assert_eq!(operator_norm(&zero, 10, &mut RngState::new(4)), 0.0);
    }

    #[test]
    fn matches_dense_svd_oracle() {
        let g = ImageGeometry::new(4, 5, 1.0).unwrap();
        let mut rng = RngState::new(77);
        let data: Vec<f64> = (0..400).map(|_| 2.0 * rng.next_uniform() - 1.0).collect();
        let a = DenseMatrix::new(&g, 20, data.clone()).unwrap();
        let est = operator_norm(&a, 200, &mut RngState::new(5));
        let oracle = recon_oracles::largest_singular_value(20, 20, &data);
        assert!((est - oracle).abs() <= 1e-4 * oracle, "{est} vs {oracle}");
    }

    #[test]
    fn nondecreasing_in_iterations() {
        let g = ImageGeometry::new(4, 5, 1.0).unwrap();
        let mut rng = RngState::new(78);
        let a = DenseMatrix::new(&g, 20, (0..400).map(|_| rng.next_uniform()).collect()).unwrap();
        let estimates: Vec<f64> = (1..30).map(|k| operator_norm(&a, k, &mut RngState::new(9))).collect();
        assert!(estimates.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn finite_difference_norm_is_bounded_by_eight() {
        let g = ImageGeometry::new(16, 12, 1.0).unwrap();
        let est = operator_norm_estimate(
            |v| {
                let d = grad_forward(&Image::from_vec(&g, v.to_vec()).unwrap());
                d.vertical.into_iter().chain(d.horizontal).collect()
            },
            |w| {
                let n = g.len();
                let f = GradientField::from_channels(&g, w[..n].to_vec(), w[n..].to_vec()).unwrap();
                grad_adjoint(&f).into_values()
            },
            g.len(),
            300,
            &mut RngState::new(3),
        );
        assert!(est * est <= 8.0);
        assert!(est * est > 7.0);
    }
}
