//! Counter-based SplitMix64 generator.
//!
//! The `k`-th output (0-based) for seed `s` is
//! `mix(s + (k + 1) * 0x9E3779B97F4A7C15)` with the standard SplitMix64
//! finaliser, so the stream is the reference SplitMix64 sequence and any
//! position can be reached without replaying earlier draws. Uniform reals
//! take the top 53 bits of one output and lie in `[0, 1)`.

use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngState {
    seed: u64,
    position: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { seed, position: 0 }
    }

    pub fn at(seed: u64, position: u64) -> Self {
        Self { seed, position }
    }

    /// Independent stream for a named purpose, derived from a master seed.
    pub fn derive(seed: u64, stream: u64) -> Self {
        Self::new(mix(seed ^ mix(stream.wrapping_add(GOLDEN_GAMMA))))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn next_u64(&mut self) -> u64 {
        self.position = self.position.wrapping_add(1);
        mix(self.seed.wrapping_add(self.position.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform draw in `[0, 1)`; advances the position by one.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
