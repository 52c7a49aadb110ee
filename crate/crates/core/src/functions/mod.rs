//! Objective pieces: smooth data terms, their sum, and proximable
//! regularisers.

mod kl;
mod least_squares;
mod sum;
mod tv;

pub use kl::{KLFunction, DEFAULT_RELATIVE_BACKGROUND};
pub use least_squares::LeastSquares;
pub use sum::SmoothSum;
pub use tv::{NonNegativity, ProxState, TvRegulariser, ZeroRegulariser};

use crate::array::Image;
use crate::error::Result;
use crate::operators::LinearOperator;

/// Value returned for points outside a function's domain.
pub const INFEASIBLE: f64 = f64::INFINITY;

/// A differentiable term of the objective.
pub trait SmoothFunction: Send + Sync {
    fn value(&self, x: &Image) -> f64;

    fn gradient(&self, x: &Image) -> Result<Image>;

    /// Upper bound on the Lipschitz constant of the gradient.
    fn lipschitz(&self) -> Result<f64>;
}

impl<T: SmoothFunction + ?Sized> SmoothFunction for Box<T> {
    fn value(&self, x: &Image) -> f64 {
        (**self).value(x)
    }

    fn gradient(&self, x: &Image) -> Result<Image> {
        (**self).gradient(x)
    }

    fn lipschitz(&self) -> Result<f64> {
        (**self).lipschitz()
    }
}

/// A possibly nonsmooth term with an (approximately) computable proximal
/// operator `prox_{gamma g}(x) = argmin_u 1/2 |u - x|^2 + gamma g(u)`.
pub trait Regulariser: Send + Sync {
    fn value(&self, x: &Image) -> f64;

    /// `state` carries warm-start information between calls of one run.
    fn prox(&self, x: &Image, gamma: f64, state: &mut ProxState) -> Image;
}

/// A smooth term of the form `x -> h(A x)` whose outer function `h` has a
/// computable conjugate prox; this is what primal-dual methods need.
pub trait DualProximable: SmoothFunction {
    fn operator(&self) -> &dyn LinearOperator;

    /// `prox_{sigma h*}(z)` for `z` in the range of the operator.
    fn conjugate_prox(&self, z: &[f64], sigma: f64) -> Vec<f64>;
}

impl DualProximable for KLFunction {
    fn operator(&self) -> &dyn LinearOperator {
        KLFunction::operator(self)
    }

    fn conjugate_prox(&self, z: &[f64], sigma: f64) -> Vec<f64> {
        KLFunction::conjugate_prox(self, z, sigma)
    }
}
