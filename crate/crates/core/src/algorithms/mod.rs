//! Solvers for `min_x F(x) = f(x) + g(x)` with `f = sum_i f_i`.
//!
//! [`ProximalGradient`] covers gradient descent, ISTA and FISTA and accepts
//! any [`GradientSource`](crate::stochastic::GradientSource), so the same
//! loop runs with the exact gradient or with any stochastic estimator.
//! [`Spdhg`] works on the dual of each `f_i` instead. All solvers implement
//! [`Algorithm`] and are driven by [`run`] on a data-pass schedule.

mod driver;
mod problem;
mod proximal_gradient;
mod spdhg;
mod step;

pub use driver::{run, Schedule};
pub use problem::{default_gamma, OptimisationProblem};
pub use proximal_gradient::{ista_step, Acceleration, ProximalGradient};
pub use spdhg::{operator_norms, Spdhg, SpdhgSteps, DEFAULT_SAFETY, NORM_ITERATIONS};
pub use step::StepSizeRule;

use crate::array::Image;
use crate::error::Result;

/// One solver run, advanced one iteration at a time.
pub trait Algorithm {
    fn step(&mut self) -> Result<()>;

    fn iterate(&self) -> &Image;

    /// Data passes consumed since construction.
    fn data_passes(&self) -> f64;

    /// Iterations completed.
    fn iteration(&self) -> u64;
}
