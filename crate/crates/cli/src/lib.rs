//! Config-driven experiments comparing deterministic and stochastic
//! reconstruction algorithms on a simulated emission scan.

pub mod config;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod plot;
