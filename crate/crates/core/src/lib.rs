pub mod algorithms;
pub mod array;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod io;
pub mod operators;
pub mod rng;
pub mod simulate;
pub mod stochastic;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problem.md")]
    mod problem {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/proximal.md")]
    mod proximal {}
    #[doc = include_str!("../../../book/src/spdhg.md")]
    mod spdhg {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
