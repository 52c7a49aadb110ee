use crate::error::{Error, Result};
use crate::rng::RngState;

/// Draws subset indices with replacement from a fixed distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampler {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
    rng: RngState,
}

impl Sampler {
    pub fn uniform(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("sampler needs at least one index".into()));
        }
        Self::new(vec![1.0 / n as f64; n], seed)
    }

    /// `probabilities` must be nonnegative and sum to one within `1e-12`.
    pub fn new(probabilities: Vec<f64>, seed: u64) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidArgument("sampler needs at least one index".into()));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidArgument("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self { probabilities, cumulative, rng: RngState::new(seed) })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.probabilities[i]
    }

    pub fn rng(&self) -> RngState {
        self.rng
    }

    pub fn reseed(&mut self, seed: u64) {
        self.rng = RngState::new(seed);
    }

    /// One uniform draw in `[0, 1)` from the sampler's stream.
    pub fn next_uniform(&mut self) -> f64 {
        self.rng.next_uniform()
    }

    /// Inverse-CDF draw from one uniform; never returns a zero-probability
    /// index.
    pub fn next_index(&mut self) -> usize {
        let u = self.rng.next_uniform();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.len() - 1);
        if self.probabilities[i] > 0.0 {
            i
        } else {
            // only reachable through the forced final cumulative value
            self.probabilities.iter().rposition(|&p| p > 0.0).expect("some positive probability")
        }
    }
}
