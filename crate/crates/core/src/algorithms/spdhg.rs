use crate::array::{slice_norm, Image};
use crate::error::{Error, Result};
use crate::functions::{DualProximable, ProxState, Regulariser, SmoothSum};
use crate::operators::operator_norm;
use crate::rng::RngState;
use crate::stochastic::{PassCounter, Sampler};

use super::Algorithm;

/// Safety factor `rho` in `tau sigma_i |A_i|^2 <= rho^2`.
pub const DEFAULT_SAFETY: f64 = 0.99;

/// Relative slack in the step-size check, so that steps built exactly at
/// the bound by [`SpdhgSteps::from_norms`] pass despite rounding.
const CONDITION_SLACK: f64 = 1e-12;

/// Power iterations used for the subset operator norms.
pub const NORM_ITERATIONS: usize = 100;

/// Dual steps `sigma_i` and primal step `tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdhgSteps {
    pub sigma: Vec<f64>,
    pub tau: f64,
}

impl SpdhgSteps {
    /// `sigma_i = rho / |A_i|`, `tau = rho / (n max_i |A_i|)`.
    pub fn from_norms(norms: &[f64], rho: f64) -> Result<Self> {
        let max = norms.iter().cloned().fold(0.0, f64::max);
        if norms.is_empty() || !(max > 0.0 && max.is_finite()) {
            return Err(Error::InvalidArgument("operator norms must be positive".into()));
        }
        let sigma = norms.iter().map(|&a| if a > 0.0 { rho / a } else { rho / max }).collect();
        Ok(Self { sigma, tau: rho / (norms.len() as f64 * max) })
    }

    /// `sigma_i c` and `tau / c`; leaves every `tau sigma_i` unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        Self { sigma: self.sigma.iter().map(|s| s * c).collect(), tau: self.tau / c }
    }

    /// `tau sigma_i |A_i|^2` for each subset.
    pub fn condition_values(&self, norms: &[f64]) -> Vec<f64> {
        self.sigma.iter().zip(norms).map(|(s, a)| self.tau * s * a * a).collect()
    }

    /// Fails on the first subset with `tau sigma_i |A_i|^2 > rho^2`.
    pub fn check(&self, norms: &[f64], rho: f64) -> Result<()> {
        if self.sigma.len() != norms.len() {
            return Err(Error::IncompatibleShapes(format!(
                "{} dual steps for {} subsets",
                self.sigma.len(),
                norms.len()
            )));
        }
        if !(self.tau > 0.0) || self.sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("SPDHG steps must be positive".into()));
        }
        let bound = rho * rho;
        let limit = bound * (1.0 + CONDITION_SLACK);
        for (subset, value) in self.condition_values(norms).into_iter().enumerate() {
            if !(value <= limit) {
                return Err(Error::StepSizeCondition { subset, value, bound });
            }
        }
        Ok(())
    }
}

/// Power-method estimates of `|A_i|` for every term.
pub fn operator_norms<F: DualProximable>(sum: &SmoothSum<F>, iterations: usize, seed: u64) -> Vec<f64> {
    (0..sum.len())
        .map(|i| operator_norm(sum.term(i).operator(), iterations, &mut RngState::derive(seed, i as u64)))
        .collect()
}

/// Stochastic primal-dual hybrid gradient for `sum_i h_i(A_i x) + g(x)`.
///
/// Each iteration draws one subset `i`, updates its dual block
/// `y_i <- prox_{sigma_i h_i*}(y_i + sigma_i A_i x)`, keeps
/// `w = sum_j A_j^T y_j` current with `delta = A_i^T (y_i_new - y_i)`, and
/// sets `x <- prox_{tau g}(x - tau (w + delta / p_i))`. Costs `1/n` data
/// passes per iteration.
pub struct Spdhg<'a, F> {
    terms: &'a SmoothSum<F>,
    regulariser: &'a dyn Regulariser,
    sampler: Sampler,
    steps: SpdhgSteps,
    x: Image,
    y: Vec<Vec<f64>>,
    w: Image,
    counter: PassCounter,
    k: u64,
    last_index: Option<usize>,
    prox_state: ProxState,
}

impl<'a, F: DualProximable> Spdhg<'a, F> {
    /// Checks the step-size condition with safety [`DEFAULT_SAFETY`]
    /// against the given subset norms before anything runs.
    pub fn new(
        terms: &'a SmoothSum<F>,
        regulariser: &'a dyn Regulariser,
        sampler: Sampler,
        steps: SpdhgSteps,
        norms: &[f64],
        x0: Image,
    ) -> Result<Self> {
        if sampler.len() != terms.len() || norms.len() != terms.len() {
            return Err(Error::IncompatibleShapes(format!(
                "{} terms, {} sampler indices, {} norms",
                terms.len(),
                sampler.len(),
                norms.len()
            )));
        }
        steps.check(norms, DEFAULT_SAFETY)?;
        let y = terms.terms().iter().map(|f| vec![0.0; f.operator().range_len()]).collect();
        let w = Image::zeros(x0.geometry());
        Ok(Self {
            terms,
            regulariser,
            sampler,
            steps,
            x: x0,
            y,
            w,
            counter: PassCounter::new(terms.len()),
            k: 0,
            last_index: None,
            prox_state: ProxState::new(),
        })
    }

    pub fn steps(&self) -> &SpdhgSteps {
        &self.steps
    }

    pub fn duals(&self) -> &[Vec<f64>] {
        &self.y
    }

    /// The running aggregate `w`.
    pub fn aggregate(&self) -> &Image {
        &self.w
    }

    pub fn last_index(&self) -> Option<usize> {
        self.last_index
    }

    /// Relative difference between `w` and `sum_j A_j^T y_j` recomputed
    /// from the dual blocks.
    pub fn aggregate_residual(&self) -> Result<f64> {
        let mut fresh = Image::zeros(self.x.geometry());
        for (f, y) in self.terms.terms().iter().zip(&self.y) {
            fresh.axpy(1.0, &f.operator().apply_adjoint(y)?)?;
        }
        let diff = slice_norm(self.w.sub(&fresh)?.values());
        let size = slice_norm(fresh.values());
        Ok(if size > 0.0 { diff / size } else { diff })
    }
}

impl<F: DualProximable> Algorithm for Spdhg<'_, F> {
    fn step(&mut self) -> Result<()> {
        let i = self.sampler.next_index();
        let p = self.sampler.probability(i);
        let sigma = self.steps.sigma[i];
        let tau = self.steps.tau;
        let term = self.terms.term(i);

        let mut z = term.operator().apply(&self.x)?;
        z.iter_mut().zip(&self.y[i]).for_each(|(z, y)| *z = y + sigma * *z);
        let y_new = term.conjugate_prox(&z, sigma);
        let change: Vec<f64> = y_new.iter().zip(&self.y[i]).map(|(a, b)| a - b).collect();
        let delta = term.operator().apply_adjoint(&change)?;
        self.w.axpy(1.0, &delta)?;
        self.y[i] = y_new;

        let mut arg = self.x.clone();
        for ((a, &w), &d) in arg.values_mut().iter_mut().zip(self.w.values()).zip(delta.values()) {
            *a -= tau * (w + d / p);
        }
        self.x = self.regulariser.prox(&arg, tau, &mut self.prox_state);
        self.counter.add(1);
        self.k += 1;
        self.last_index = Some(i);
        Ok(())
    }

    fn iterate(&self) -> &Image {
        &self.x
    }

    fn data_passes(&self) -> f64 {
        self.counter.passes()
    }

    fn iteration(&self) -> u64 {
        self.k
    }
}
