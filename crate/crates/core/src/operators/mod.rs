//! Linear operators: the parallel-beam projector and its subset
//! restrictions, the view partitioner, finite differences for TV, and
//! power-method norm estimation.

mod dense;
mod gradient;
mod norm;
mod partition;
mod projector;

pub use dense::DenseMatrix;
pub use gradient::{grad_adjoint, grad_forward, GradientField};
pub use norm::{operator_norm, operator_norm_estimate};
pub use partition::{partition_views, Partition, PartitionScheme};
pub use projector::{Projector, SystemMatrix};

use crate::array::Image;
use crate::error::Result;
use crate::geometry::ImageGeometry;

/// A linear map from images to flat data vectors together with its adjoint.
pub trait LinearOperator: Send + Sync {
    fn domain(&self) -> &ImageGeometry;

    fn range_len(&self) -> usize;

    fn apply(&self, x: &Image) -> Result<Vec<f64>>;

    fn apply_adjoint(&self, y: &[f64]) -> Result<Image>;
}
