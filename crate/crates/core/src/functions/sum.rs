use crate::array::Image;
use crate::error::{Error, Result};

use super::SmoothFunction;

/// `f = sum_i f_i`, evaluated term by term in order.
///
/// One call of [`SmoothSum::gradient`] evaluates every term and is the unit
/// of one data pass.
#[derive(Clone)]
pub struct SmoothSum<F> {
    terms: Vec<F>,
}

impl<F: SmoothFunction> SmoothSum<F> {
    pub fn new(terms: Vec<F>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("a sum needs at least one term".into()));
        }
        Ok(Self { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[F] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &F {
        &self.terms[i]
    }

    pub fn value(&self, x: &Image) -> f64 {
        self.terms.iter().map(|t| t.value(x)).sum()
    }

    pub fn gradient(&self, x: &Image) -> Result<Image> {
        let mut total = self.terms[0].gradient(x)?;
        for t in &self.terms[1..] {
            total.axpy(1.0, &t.gradient(x)?)?;
        }
        Ok(total)
    }

    /// Every term's gradient at `x`, plus their ordered sum.
    pub fn term_gradients(&self, x: &Image) -> Result<(Vec<Image>, Image)> {
        let grads = self.terms.iter().map(|t| t.gradient(x)).collect::<Result<Vec<_>>>()?;
        let total = sum_images(&grads)?;
        Ok((grads, total))
    }

    pub fn lipschitz_constants(&self) -> Result<Vec<f64>> {
        self.terms.iter().map(|t| t.lipschitz()).collect()
    }
}

/// Ordered sum; the first image is cloned so a single-term sum is exact.
pub(crate) fn sum_images(images: &[Image]) -> Result<Image> {
    let mut total = images[0].clone();
    for g in &images[1..] {
        total.axpy(1.0, g)?;
    }
    Ok(total)
}

impl<F: SmoothFunction> SmoothFunction for SmoothSum<F> {
    fn value(&self, x: &Image) -> f64 {
        SmoothSum::value(self, x)
    }

    fn gradient(&self, x: &Image) -> Result<Image> {
        SmoothSum::gradient(self, x)
    }

    fn lipschitz(&self) -> Result<f64> {
        Ok(self.lipschitz_constants()?.iter().sum())
    }
}
