//! Samplers over subset indices and gradient estimators for `f = sum_i f_i`.
//!
//! Every estimator implements [`GradientSource`], as does the deterministic
//! [`FullGradient`], so algorithms never need to know which one they drive.
//!
//! Cost is tracked in subset-gradient evaluations: `n` evaluations make one
//! data pass, and a full gradient costs exactly `n`.

mod estimators;
mod sampler;

pub use estimators::{Estimator, EstimatorKind, TableInit};
pub use sampler::Sampler;

use crate::array::Image;
use crate::error::Result;
use crate::functions::{SmoothFunction, SmoothSum};

/// Anything that produces (estimates of) the gradient of `f` and accounts
/// for the data it touched.
pub trait GradientSource {
    fn estimate(&mut self, x: &Image) -> Result<Image>;

    /// Data passes consumed so far; nondecreasing between resets.
    fn data_passes(&self) -> f64;

    /// Clears internal state and restarts the random stream from `seed`.
    fn reset(&mut self, seed: u64);
}

/// Counts subset-gradient evaluations; `passes = evaluations / n` is computed
/// by one division, so it is exact wherever `k / n` is representable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PassCounter {
    evaluations: u64,
    n: usize,
}

impl PassCounter {
    pub fn new(n: usize) -> Self {
        Self { evaluations: 0, n }
    }

    pub fn add(&mut self, evaluations: u64) {
        self.evaluations += evaluations;
    }

    pub fn add_full_pass(&mut self) {
        self.evaluations += self.n as u64;
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn passes(&self) -> f64 {
        self.evaluations as f64 / self.n as f64
    }
}

/// The exact gradient `sum_i grad f_i(x)`; one data pass per call.
pub struct FullGradient<'a, F> {
    sum: &'a SmoothSum<F>,
    counter: PassCounter,
}

impl<'a, F: SmoothFunction> FullGradient<'a, F> {
    pub fn new(sum: &'a SmoothSum<F>) -> Self {
        Self { sum, counter: PassCounter::new(sum.len()) }
    }
}

impl<F: SmoothFunction> GradientSource for FullGradient<'_, F> {
    fn estimate(&mut self, x: &Image) -> Result<Image> {
        self.counter.add_full_pass();
        self.sum.gradient(x)
    }

    fn data_passes(&self) -> f64 {
        self.counter.passes()
    }

    fn reset(&mut self, _seed: u64) {
        self.counter = PassCounter::new(self.sum.len());
    }
}

impl<S: GradientSource + ?Sized> GradientSource for Box<S> {
    fn estimate(&mut self, x: &Image) -> Result<Image> {
        (**self).estimate(x)
    }

    fn data_passes(&self) -> f64 {
        (**self).data_passes()
    }

    fn reset(&mut self, seed: u64) {
        (**self).reset(seed)
    }
}
