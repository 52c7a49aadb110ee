use crate::array::Image;
use crate::error::{Error, Result};
use crate::functions::{Regulariser, SmoothFunction, SmoothSum};
use crate::operators::Partition;

/// `F = f + g` with `f = sum_i f_i`.
pub struct OptimisationProblem<F> {
    smooth: SmoothSum<F>,
    regulariser: Box<dyn Regulariser>,
    partition: Option<Partition>,
}

impl<F: SmoothFunction> OptimisationProblem<F> {
    pub fn new(smooth: SmoothSum<F>, regulariser: Box<dyn Regulariser>) -> Self {
        Self { smooth, regulariser, partition: None }
    }

    /// Records the view partition the terms were built from; the number of
    /// cells must equal the number of terms.
    pub fn with_partition(mut self, partition: Partition) -> Result<Self> {
        if partition.n_subsets() != self.smooth.len() {
            return Err(Error::IncompatibleShapes(format!(
                "{} subsets for {} smooth terms",
                partition.n_subsets(),
                self.smooth.len()
            )));
        }
        self.partition = Some(partition);
        Ok(self)
    }

    pub fn smooth(&self) -> &SmoothSum<F> {
        &self.smooth
    }

    pub fn regulariser(&self) -> &dyn Regulariser {
        self.regulariser.as_ref()
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn n(&self) -> usize {
        self.smooth.len()
    }

    /// `F(x)`; infinite outside the domain of either term.
    pub fn objective(&self, x: &Image) -> f64 {
        self.smooth.value(x) + self.regulariser.value(x)
    }
}

/// Default constant step from the Lipschitz bounds `L_i` of the terms:
/// `1 / sum_i L_i` for the exact gradient, `1 / (n max_i L_i)` for an
/// estimator that rescales one term by `1 / p_i`.
pub fn default_gamma(lipschitz: &[f64], stochastic: bool) -> Result<f64> {
    if lipschitz.is_empty() {
        return Err(Error::MissingLipschitz(0));
    }
    if let Some(i) = lipschitz.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::MissingLipschitz(i));
    }
    let bound = if stochastic {
        lipschitz.len() as f64 * lipschitz.iter().cloned().fold(0.0, f64::max)
    } else {
        lipschitz.iter().sum()
    };
    if bound <= 0.0 {
        return Err(Error::InvalidArgument("all Lipschitz bounds are zero".into()));
    }
    Ok(1.0 / bound)
}
