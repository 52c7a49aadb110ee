//! Isotropic total variation with an optional nonnegativity constraint.
//!
//! The proximal map is computed with fast gradient projection (FGP) on the
//! dual: for `lambda = gamma * alpha`,
//!
//! ```text
//! u   = P_C(x - lambda D^T r)
//! p+  = P_ball(r + D u / (8 lambda))
//! r   = p+ + (t - 1) / t+ (p+ - p)
//! ```
//!
//! where `P_C` clips to the nonnegative orthant when the constraint is on,
//! `P_ball` projects every pixel's pair of dual values onto the unit disc,
//! and `8 >= |D|^2`.

use serde::{Deserialize, Serialize};

use crate::array::{project_nonneg, Image};
use crate::error::{Error, Result};
use crate::operators::{grad_adjoint, grad_forward, GradientField};

use super::{Regulariser, INFEASIBLE};

/// Warm-start cache for iterative proximal solvers. Owned by one algorithm
/// run.
#[derive(Clone, Debug, Default)]
pub struct ProxState {
    dual: Option<GradientField>,
    last_inner_iterations: usize,
}

impl ProxState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inner iterations used by the most recent prox call.
    pub fn last_inner_iterations(&self) -> usize {
        self.last_inner_iterations
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvRegulariser {
    alpha: f64,
    inner_iterations: usize,
    inner_tolerance: f64,
    nonneg: bool,
}

impl TvRegulariser {
    pub const DEFAULT_INNER_ITERATIONS: usize = 100;
    pub const DEFAULT_INNER_TOLERANCE: f64 = 1e-6;

    /// `alpha * TV` over the nonnegative orthant, with default inner solver
    /// settings.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_solver(alpha, Self::DEFAULT_INNER_ITERATIONS, Self::DEFAULT_INNER_TOLERANCE, true)
    }

    pub fn with_solver(alpha: f64, inner_iterations: usize, inner_tolerance: f64, nonneg: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if inner_iterations == 0 {
            return Err(Error::InvalidArgument("TV prox needs at least one inner iteration".into()));
        }
        if !(inner_tolerance >= 0.0) {
            return Err(Error::InvalidArgument(format!("inner tolerance must be >= 0, got {inner_tolerance}")));
        }
        Ok(Self { alpha, inner_iterations, inner_tolerance, nonneg })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations
    }

    pub fn inner_tolerance(&self) -> f64 {
        self.inner_tolerance
    }

    pub fn nonneg(&self) -> bool {
        self.nonneg
    }

    /// `TV(x)` without the weight.
    pub fn total_variation(x: &Image) -> f64 {
        grad_forward(x).magnitudes().sum()
    }

    /// Prox from a cold start.
    pub fn prox_cold(&self, x: &Image, gamma: f64) -> Image {
        self.prox(x, gamma, &mut ProxState::new())
    }

    fn clip(&self, u: Image) -> Image {
        if self.nonneg {
            project_nonneg(&u)
        } else {
            u
        }
    }
}

impl Regulariser for TvRegulariser {
    fn value(&self, x: &Image) -> f64 {
        if self.nonneg && x.values().iter().any(|&v| v < 0.0) {
            return INFEASIBLE;
        }
        self.alpha * Self::total_variation(x)
    }

    fn prox(&self, x: &Image, gamma: f64, state: &mut ProxState) -> Image {
        let lambda = gamma * self.alpha;
        if lambda <= 0.0 {
            state.last_inner_iterations = 0;
            return self.clip(x.clone());
        }
        let geometry = x.geometry();
        let mut p = match state.dual.take() {
            Some(d) if d.geometry() == geometry => d,
            _ => GradientField::zeros(geometry),
        };
        let mut r = p.clone();
        let mut t = 1.0f64;
        let step = 1.0 / (8.0 * lambda);
        let mut used = 0;
        for _ in 0..self.inner_iterations {
            used += 1;
            let u = self.clip(x.add_scaled(-lambda, &grad_adjoint(&r)).expect("same geometry"));
            let du = grad_forward(&u);
            let mut next = r.clone();
            let mut change = 0.0;
            let mut size = 0.0;
            for i in 0..next.vertical.len() {
                let qv = r.vertical[i] + step * du.vertical[i];
                let qh = r.horizontal[i] + step * du.horizontal[i];
                let scale = qv.hypot(qh).max(1.0);
                let (nv, nh) = (qv / scale, qh / scale);
                change += (nv - p.vertical[i]).powi(2) + (nh - p.horizontal[i]).powi(2);
                size += nv * nv + nh * nh;
                next.vertical[i] = nv;
                next.horizontal[i] = nh;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            for i in 0..next.vertical.len() {
                r.vertical[i] = next.vertical[i] + momentum * (next.vertical[i] - p.vertical[i]);
                r.horizontal[i] = next.horizontal[i] + momentum * (next.horizontal[i] - p.horizontal[i]);
            }
            t = t_next;
            p = next;
            if change.sqrt() <= self.inner_tolerance * size.sqrt() {
                break;
            }
        }
        let out = self.clip(x.add_scaled(-lambda, &grad_adjoint(&p)).expect("same geometry"));
        state.dual = Some(p);
        state.last_inner_iterations = used;
        out
    }
}

/// Indicator of the nonnegative orthant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NonNegativity;

impl Regulariser for NonNegativity {
    fn value(&self, x: &Image) -> f64 {
        if x.values().iter().any(|&v| v < 0.0) {
            INFEASIBLE
        } else {
            0.0
        }
    }

    fn prox(&self, x: &Image, _gamma: f64, _state: &mut ProxState) -> Image {
        project_nonneg(x)
    }
}

/// `g = 0`; the prox is the identity.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ZeroRegulariser;

impl Regulariser for ZeroRegulariser {
    fn value(&self, _x: &Image) -> f64 {
        0.0
    }

    fn prox(&self, x: &Image, _gamma: f64, _state: &mut ProxState) -> Image {
        x.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{distance, norm2};
    use crate::geometry::ImageGeometry;
    use crate::rng::RngState;

    fn image(rows: usize, cols: usize, values: Vec<f64>) -> Image {
        Image::from_vec(&ImageGeometry::new(rows, cols, 1.0).unwrap(), values).unwrap()
    }

    fn random(rows: usize, cols: usize, rng: &mut RngState) -> Image {
        image(rows, cols, (0..rows * cols).map(|_| 3.0 * rng.next_uniform() - 1.0).collect())
    }

    fn tight(alpha: f64) -> TvRegulariser {
        TvRegulariser::with_solver(alpha, 200_000, 1e-10, true).unwrap()
    }

    #[test]
    fn value_examples() {
        let tv = TvRegulariser::new(1.0).unwrap();
        assert_eq!(tv.value(&image(3, 3, vec![2.5; 9])), 0.0);
        assert_eq!(tv.value(&image(2, 2, vec![0.0, 1.0, 0.0, 1.0])), 2.0);
        assert_eq!(tv.value(&image(1, 2, vec![-1.0, 1.0])), INFEASIBLE);
    }

    #[test]
    fn value_is_positively_homogeneous() {
        let tv = TvRegulariser::new(0.3).unwrap();
        let x = random(5, 4, &mut RngState::new(1)).map(f64::abs);
        let c = 2.75;
        assert!((tv.value(&x.scaled(c)) - c * tv.value(&x)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TvRegulariser::new(-0.1).is_err());
        assert!(TvRegulariser::new(0.0).is_err());
        assert!(TvRegulariser::with_solver(0.1, 0, 1e-6, true).is_err());
    }

    #[test]
    fn zero_gamma_projects() {
        let tv = TvRegulariser::new(0.5).unwrap();
        let x = random(4, 4, &mut RngState::new(2));
        assert_eq!(tv.prox_cold(&x, 0.0), project_nonneg(&x));
    }

    #[test]
    fn constant_images_are_fixed_points() {
        let tv = TvRegulariser::new(0.5).unwrap();
        let x = image(4, 3, vec![1.7; 12]);
        for gamma in [0.1, 1.0, 100.0] {
            assert_eq!(tv.prox_cold(&x, gamma), x);
        }
    }

    #[test]
    fn strong_smoothing_flattens_to_the_mean() {
        let tv = tight(10.0);
        let out = tv.prox_cold(&image(2, 2, vec![0.0, 2.0, 0.0, 2.0]), 1.0);
        assert!(out.values().iter().all(|v| (v - 1.0).abs() < 1e-4), "{:?}", out.values());
        let oracle = recon_oracles::tv_prox(2, 2, &[0.0, 2.0, 0.0, 2.0], 10.0, true);
        assert!(oracle.iter().all(|v| (v - 1.0).abs() < 1e-4));
    }

    #[test]
    fn output_is_nonnegative() {
        let tv = TvRegulariser::new(0.2).unwrap();
        let mut rng = RngState::new(5);
        for _ in 0..10 {
            let out = tv.prox_cold(&random(6, 5, &mut rng), 0.7);
            assert!(out.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn prox_is_nonexpansive() {
        let tv = tight(0.4);
        let mut rng = RngState::new(6);
        for _ in 0..10 {
            let (a, b) = (random(5, 5, &mut rng), random(5, 5, &mut rng));
            let (pa, pb) = (tv.prox_cold(&a, 1.0), tv.prox_cold(&b, 1.0));
            assert!(distance(&pa, &pb).unwrap() <= distance(&a, &b).unwrap() * (1.0 + 1e-8));
        }
    }

    #[test]
    fn prox_decreases_the_model_objective() {
        let tv = tight(0.3);
        let mut rng = RngState::new(7);
        for _ in 0..10 {
            let x = random(6, 6, &mut rng).map(f64::abs);
            let gamma = 2.0 * rng.next_uniform();
            let out = tv.prox_cold(&x, gamma);
            let d = distance(&out, &x).unwrap();
            assert!(gamma * tv.value(&out) + 0.5 * d * d <= gamma * tv.value(&x) + 1e-12);
        }
    }

    #[test]
    fn warm_start_reaches_the_same_point() {
        let tv = TvRegulariser::with_solver(0.5, 5000, 1e-12, true).unwrap();
        let mut rng = RngState::new(8);
        let x = random(8, 8, &mut rng);
        let mut state = ProxState::new();
        let _ = tv.prox(&random(8, 8, &mut rng), 1.0, &mut state);
        let warm = tv.prox(&x, 1.0, &mut state);
        let cold = tv.prox_cold(&x, 1.0);
        assert!(distance(&warm, &cold).unwrap() < 1e-6 * (1.0 + norm2(&cold)));
    }

    #[test]
    fn other_regularisers() {
        let x = image(1, 3, vec![-1.0, 0.0, 2.0]);
        let mut s = ProxState::new();
        assert_eq!(NonNegativity.prox(&x, 3.0, &mut s).values(), &[0.0, 0.0, 2.0]);
        assert_eq!(NonNegativity.value(&x), INFEASIBLE);
        assert_eq!(ZeroRegulariser.prox(&x, 3.0, &mut s), x);
        assert_eq!(ZeroRegulariser.value(&x), 0.0);
    }
}
