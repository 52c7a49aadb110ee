use std::sync::Arc;

use crate::array::{dot, Image};
use crate::error::{Error, Result};
use crate::operators::{operator_norm, LinearOperator};
use crate::rng::RngState;

use super::{DualProximable, SmoothFunction};

/// `weight / 2 * |A x - b|^2`.
#[derive(Clone)]
pub struct LeastSquares {
    operator: Arc<dyn LinearOperator>,
    data: Vec<f64>,
    weight: f64,
}

impl LeastSquares {
    pub fn new(operator: Arc<dyn LinearOperator>, data: Vec<f64>, weight: f64) -> Result<Self> {
        if data.len() != operator.range_len() {
            return Err(Error::IncompatibleShapes(format!(
                "{} data entries for an operator with {} outputs",
                data.len(),
                operator.range_len()
            )));
        }
        Ok(Self { operator, data, weight })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn residual(&self, x: &Image) -> Result<Vec<f64>> {
        let mut r = self.operator.apply(x)?;
        r.iter_mut().zip(&self.data).for_each(|(a, b)| *a -= b);
        Ok(r)
    }
}

impl SmoothFunction for LeastSquares {
    fn value(&self, x: &Image) -> f64 {
        match self.residual(x) {
            Ok(r) => 0.5 * self.weight * dot(&r, &r),
            Err(_) => f64::NAN,
        }
    }

    fn gradient(&self, x: &Image) -> Result<Image> {
        let r = self.residual(x)?;
        Ok(self.operator.apply_adjoint(&r)?.scaled(self.weight))
    }

    fn lipschitz(&self) -> Result<f64> {
        let norm = operator_norm(self.operator.as_ref(), 200, &mut RngState::new(0x15));
        Ok(self.weight * norm * norm)
    }
}

impl DualProximable for LeastSquares {
    fn operator(&self) -> &dyn LinearOperator {
        self.operator.as_ref()
    }

    /// With `h(v) = w/2 |v - b|^2`, `h*(u) = |u|^2 / (2w) + <u, b>`.
    fn conjugate_prox(&self, z: &[f64], sigma: f64) -> Vec<f64> {
        let shrink = 1.0 + sigma / self.weight;
        z.iter().zip(&self.data).map(|(&z, &b)| (z - sigma * b) / shrink).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ImageGeometry;
    use crate::operators::DenseMatrix;

    #[test]
    fn value_gradient_and_lipschitz() {
        let g = ImageGeometry::new(1, 2, 1.0).unwrap();
        let a = Arc::new(DenseMatrix::new(&g, 2, vec![1.0, 2.0, 0.0, 3.0]).unwrap());
        let f = LeastSquares::new(a, vec![1.0, 1.0], 2.0).unwrap();
        let x = Image::from_vec(&g, vec![1.0, 1.0]).unwrap();
        // residual (2, 2): value 8, gradient 2 * A^T r = (4, 20)
        assert_eq!(f.value(&x), 8.0);
        assert_eq!(f.gradient(&x).unwrap().values(), &[4.0, 20.0]);
        // |A|^2 is the largest eigenvalue of A^T A = [[1, 2], [2, 13]]
        let expected = 2.0 * (7.0 + 40.0f64.sqrt());
        assert!((f.lipschitz().unwrap() - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn conjugate_prox_satisfies_moreau() {
        // prox_{s h*}(z) + s prox_{h / s}(z / s) = z, with
        // prox_{h/s}(v) = (s v + w b) / (s + w)
        let g = ImageGeometry::new(1, 3, 1.0).unwrap();
        let f = LeastSquares::new(Arc::new(DenseMatrix::identity(&g)), vec![0.5, -1.0, 2.0], 3.0).unwrap();
        let z = [1.0, -2.0, 0.25];
        for s in [0.1, 1.0, 7.0] {
            let dual = f.conjugate_prox(&z, s);
            for j in 0..3 {
                let v = z[j] / s;
                let primal = (s * v + 3.0 * f.data()[j]) / (s + 3.0);
                assert!((dual[j] + s * primal - z[j]).abs() < 1e-14);
            }
        }
    }
}
