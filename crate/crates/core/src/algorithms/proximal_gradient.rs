use crate::array::Image;
use crate::error::Result;
use crate::functions::{ProxState, Regulariser};
use crate::stochastic::GradientSource;

use super::{Algorithm, StepSizeRule};

/// `prox_{gamma g}(x - gamma grad)`.
pub fn ista_step(
    x: &Image,
    gamma: f64,
    grad: &Image,
    regulariser: &dyn Regulariser,
    state: &mut ProxState,
) -> Result<Image> {
    let forward = x.add_scaled(-gamma, grad)?;
    Ok(regulariser.prox(&forward, gamma, state))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Acceleration {
    None,
    /// Nesterov extrapolation with `t_0 = 1`,
    /// `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`.
    Fista,
}

/// Gradient descent, ISTA or FISTA driven by any gradient source.
///
/// With acceleration the gradient estimate is taken at the extrapolated
/// point `z_{k+1} = x_{k+1} + (t_k - 1) / t_{k+1} (x_{k+1} - x_k)`, mapped
/// back into the domain of `g` with `prox_{0 g}`. Data terms such as KL are
/// only defined on that domain; when `g` is finite everywhere the map is
/// the identity and this is textbook FISTA.
pub struct ProximalGradient<'a, S> {
    regulariser: Option<&'a dyn Regulariser>,
    source: S,
    rule: StepSizeRule,
    acceleration: Acceleration,
    x: Image,
    z: Option<Image>,
    t: f64,
    k: u64,
    prox_state: ProxState,
}

impl<'a, S: GradientSource> ProximalGradient<'a, S> {
    /// `x <- x - gamma_k grad`, no regulariser.
    pub fn gd(source: S, rule: StepSizeRule, x0: Image) -> Self {
        Self::build(None, source, rule, Acceleration::None, x0)
    }

    pub fn ista(regulariser: &'a dyn Regulariser, source: S, rule: StepSizeRule, x0: Image) -> Self {
        Self::build(Some(regulariser), source, rule, Acceleration::None, x0)
    }

    pub fn fista(regulariser: &'a dyn Regulariser, source: S, rule: StepSizeRule, x0: Image) -> Self {
        Self::build(Some(regulariser), source, rule, Acceleration::Fista, x0)
    }

    fn build(
        regulariser: Option<&'a dyn Regulariser>,
        source: S,
        rule: StepSizeRule,
        acceleration: Acceleration,
        x0: Image,
    ) -> Self {
        Self { regulariser, source, rule, acceleration, x: x0, z: None, t: 1.0, k: 0, prox_state: ProxState::new() }
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn source_mut(&mut self) -> &mut S {
        &mut self.source
    }

    pub fn into_parts(self) -> (Image, S) {
        (self.x, self.source)
    }

    /// Current FISTA momentum parameter `t_k` (1 without acceleration).
    pub fn momentum(&self) -> f64 {
        self.t
    }

    /// The point the next gradient estimate is taken at.
    pub fn evaluation_point(&self) -> &Image {
        self.z.as_ref().unwrap_or(&self.x)
    }
}

impl<S: GradientSource> Algorithm for ProximalGradient<'_, S> {
    fn step(&mut self) -> Result<()> {
        let gamma = self.rule.step(self.k);
        let point = self.z.take().unwrap_or_else(|| self.x.clone());
        let grad = self.source.estimate(&point)?;
        let next = match self.regulariser {
            Some(g) => ista_step(&point, gamma, &grad, g, &mut self.prox_state)?,
            None => point.add_scaled(-gamma, &grad)?,
        };
        if self.acceleration == Acceleration::Fista {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * self.t * self.t).sqrt());
            let beta = (self.t - 1.0) / t_next;
            let mut z = next.clone();
            if beta != 0.0 {
                z.axpy(beta, &next.sub(&self.x)?)?;
                if let Some(g) = self.regulariser {
                    z = g.prox(&z, 0.0, &mut ProxState::new());
                }
            }
            self.z = Some(z);
            self.t = t_next;
        }
        self.x = next;
        self.k += 1;
        Ok(())
    }

    fn iterate(&self) -> &Image {
        &self.x
    }

    fn data_passes(&self) -> f64 {
        self.source.data_passes()
    }

    fn iteration(&self) -> u64 {
        self.k
    }
}
