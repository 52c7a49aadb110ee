//! Kullback-Leibler data fidelity for Poisson data.
//!
//! For expected counts `v = A x + eta` and data `y >= 0`,
//! `KL(x) = sum_j v_j - y_j + y_j log(y_j / v_j)` with `0 log 0 = 0`.

use std::sync::{Arc, OnceLock};

use crate::array::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::operators::{operator_norm, LinearOperator, Projector};
use crate::rng::RngState;

use super::{SmoothFunction, INFEASIBLE};

/// Default background as a fraction of the largest count.
pub const DEFAULT_RELATIVE_BACKGROUND: f64 = 1e-6;

const NORM_ITERATIONS: usize = 100;
const NORM_SEED: u64 = 0x4B4C;

#[derive(Clone)]
pub struct KLFunction {
    operator: Arc<dyn LinearOperator>,
    data: Vec<f64>,
    background: f64,
    lipschitz: OnceLock<f64>,
    operator_norm: OnceLock<f64>,
}

impl KLFunction {
    /// `background` may be zero here; the Lipschitz bound then fails with
    /// [`Error::UnboundedCurvature`].
    pub fn new(operator: Arc<dyn LinearOperator>, data: Vec<f64>, background: f64) -> Result<Self> {
        if data.len() != operator.range_len() {
            return Err(Error::IncompatibleShapes(format!(
                "{} data entries for an operator with {} outputs",
                data.len(),
                operator.range_len()
            )));
        }
        if data.iter().any(|&y| !(y >= 0.0 && y.is_finite())) {
            return Err(Error::InvalidArgument("KL data must be finite and nonnegative".into()));
        }
        if !(background >= 0.0 && background.is_finite()) {
            return Err(Error::InvalidArgument(format!("background must be >= 0, got {background}")));
        }
        Ok(Self { operator, data, background, lipschitz: OnceLock::new(), operator_norm: OnceLock::new() })
    }

    /// Subset term for a projector restriction and the matching data block.
    /// Without an explicit `background`, uses
    /// [`DEFAULT_RELATIVE_BACKGROUND`] times the largest count (or that
    /// fraction itself for all-zero data), which is always positive.
    pub fn from_sinogram(projector: Projector, data: &Sinogram, background: Option<f64>) -> Result<Self> {
        if data.view_ids() != projector.view_ids() {
            return Err(Error::IncompatibleShapes("data views do not match the projector".into()));
        }
        let eta = background.unwrap_or_else(|| default_background(data.values()));
        Self::new(Arc::new(projector), data.values().to_vec(), eta)
    }

    pub fn operator(&self) -> &dyn LinearOperator {
        self.operator.as_ref()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    /// Overrides the cached Lipschitz bound.
    pub fn with_lipschitz(self, bound: f64) -> Self {
        let cell = OnceLock::new();
        cell.set(bound).expect("fresh cell");
        Self { lipschitz: cell, ..self }
    }

    /// `A x + eta`.
    pub fn expected_counts(&self, x: &Image) -> Result<Vec<f64>> {
        let mut v = self.operator.apply(x)?;
        v.iter_mut().for_each(|v| *v += self.background);
        Ok(v)
    }

    /// Power-method estimate of `|A|`, cached.
    pub fn operator_norm(&self) -> f64 {
        *self
            .operator_norm
            .get_or_init(|| operator_norm(self.operator.as_ref(), NORM_ITERATIONS, &mut RngState::new(NORM_SEED)))
    }

    /// Value at expected counts `v`; [`INFEASIBLE`] when the likelihood is
    /// undefined.
    pub fn value_at_counts(&self, v: &[f64]) -> f64 {
        let mut total = 0.0;
        for (&v, &y) in v.iter().zip(&self.data) {
            if v < 0.0 || (v == 0.0 && y > 0.0) {
                return INFEASIBLE;
            }
            total += v - y;
            if y > 0.0 {
                total += y * (y / v).ln();
            }
        }
        total
    }

    /// `prox_{sigma f*}(z)` for the conjugate of `v -> KL(v + eta; y)`,
    /// applied entrywise in closed form.
    pub fn conjugate_prox(&self, z: &[f64], sigma: f64) -> Vec<f64> {
        z.iter().zip(&self.data).map(|(&z, &y)| conjugate_prox_scalar(z, sigma, y, self.background)).collect()
    }
}

pub(crate) fn default_background(data: &[f64]) -> f64 {
    let max = data.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        DEFAULT_RELATIVE_BACKGROUND * max
    } else {
        DEFAULT_RELATIVE_BACKGROUND
    }
}

/// Smaller root of `u^2 - (1 + z') u + z' - sigma y = 0` with
/// `z' = z + sigma eta`, evaluated without cancellation.
fn conjugate_prox_scalar(z: f64, sigma: f64, y: f64, eta: f64) -> f64 {
    let zs = z + sigma * eta;
    let disc = ((zs - 1.0) * (zs - 1.0) + 4.0 * sigma * y).sqrt();
    let b = 1.0 + zs;
    if b > 0.0 {
        // product of the roots is z' - sigma y
        2.0 * (zs - sigma * y) / (b + disc)
    } else {
        0.5 * (b - disc)
    }
}

impl SmoothFunction for KLFunction {
    fn value(&self, x: &Image) -> f64 {
        match self.expected_counts(x) {
            Ok(v) => self.value_at_counts(&v),
            Err(_) => f64::NAN,
        }
    }

    /// `A^T (1 - y / (A x + eta))`. Entries with `y = 0` contribute `1` for
    /// any expected count, so only bins with positive data need `v > 0`.
    fn gradient(&self, x: &Image) -> Result<Image> {
        let mut v = self.expected_counts(x)?;
        for (j, (v, &y)) in v.iter_mut().zip(&self.data).enumerate() {
            if y == 0.0 {
                *v = 1.0;
            } else if *v > 0.0 {
                *v = 1.0 - y / *v;
            } else {
                return Err(Error::KlGradientUndefined { index: j, value: *v });
            }
        }
        self.operator.apply_adjoint(&v)
    }

    /// `|A|^2 max(y) / eta^2`, which bounds the Hessian
    /// `A^T diag(y / v^2) A` on the nonnegative orthant.
    fn lipschitz(&self) -> Result<f64> {
        if let Some(&l) = self.lipschitz.get() {
            return Ok(l);
        }
        let ymax = self.data.iter().cloned().fold(0.0, f64::max);
        let bound = if ymax == 0.0 {
            0.0
        } else if self.background == 0.0 {
            return Err(Error::UnboundedCurvature);
        } else {
            let norm = self.operator_norm();
            norm * norm * ymax / (self.background * self.background)
        };
        Ok(*self.lipschitz.get_or_init(|| bound))
    }
}
