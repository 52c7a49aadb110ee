use serde::{Deserialize, Serialize};

use crate::array::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::operators::Projector;
use crate::rng::RngState;

/// Means below this are sampled directly by inverse-transform search;
/// larger means are split into equal parts below it and the draws summed.
pub const DIRECT_CUTOFF: f64 = 50.0;

const MAX_SEARCH: u64 = 10_000;

/// Draws from Poisson(`mean`) using the given stream.
///
/// Below [`DIRECT_CUTOFF`] one uniform `u` is consumed and the smallest `k`
/// with `P(X <= k) >= u` is returned. Above it, `mean` is split into
/// `ceil(mean / DIRECT_CUTOFF)` equal parts, each sampled that way; a sum of
/// independent Poisson variables is Poisson, so the result is exact.
pub fn poisson(mean: f64, rng: &mut RngState) -> f64 {
    if !(mean > 0.0) {
        return 0.0;
    }
    if mean < DIRECT_CUTOFF {
        return direct(mean, rng.next_uniform()) as f64;
    }
    let parts = (mean / DIRECT_CUTOFF).floor() as u64 + 1;
    let part = mean / parts as f64;
    (0..parts).map(|_| direct(part, rng.next_uniform())).sum::<u64>() as f64
}

fn direct(mean: f64, u: f64) -> u64 {
    let mut k = 0;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf && k < MAX_SEARCH {
        k += 1;
        p *= mean / k as f64;
        if p == 0.0 && cdf > 0.5 {
            // the remaining tail is below double precision
            break;
        }
        cdf += p;
    }
    k
}

/// Count level and background of a simulated scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionSim {
    pub counts_scale: f64,
    pub background: f64,
    pub seed: u64,
}

/// Poisson counts with mean `counts_scale * A x + background`, drawn in
/// sinogram order from one stream seeded by `sim.seed`.
pub fn simulate_acquisition(x: &Image, projector: &Projector, sim: &AcquisitionSim) -> Result<Sinogram> {
    if x.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("activity must be nonnegative".into()));
    }
    if !(sim.counts_scale > 0.0) || !(sim.background >= 0.0) {
        return Err(Error::InvalidArgument("counts_scale must be positive and background nonnegative".into()));
    }
    let mut sino = projector.forward_project(x)?;
    let mut rng = RngState::new(sim.seed);
    for v in sino.values_mut() {
        *v = poisson(sim.counts_scale * *v + sim.background, &mut rng);
    }
    Ok(sino)
}
