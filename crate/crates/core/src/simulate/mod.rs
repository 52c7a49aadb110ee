//! A small emission-tomography benchmark: a thorax-like phantom, Poisson
//! acquisition, the KL + TV reconstruction problem, and its high-accuracy
//! reference solution.

mod phantom;
mod poisson;
mod reference;

pub use phantom::{make_phantom, Ellipse, PhantomSpec};
pub use poisson::{poisson, simulate_acquisition, AcquisitionSim, DIRECT_CUTOFF};
pub use reference::{compute_reference, kl_tv_problem, Reference, ReferenceSettings};
