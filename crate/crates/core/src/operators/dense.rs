use crate::array::{dot, Image};
use crate::error::{Error, Result};
use crate::geometry::ImageGeometry;

use super::LinearOperator;

/// Explicit row-major matrix acting on flattened images. Used for toy
/// problems and as a reference for operator tests.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    domain: ImageGeometry,
    rows: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(domain: &ImageGeometry, rows: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * domain.len() {
            return Err(Error::IncompatibleShapes(format!(
                "{} entries for a {rows}x{} matrix",
                data.len(),
                domain.len()
            )));
        }
        Ok(Self { domain: domain.clone(), rows, data })
    }

    pub fn identity(domain: &ImageGeometry) -> Self {
        Self::diagonal(domain, &vec![1.0; domain.len()]).expect("diagonal matches domain")
    }

    pub fn diagonal(domain: &ImageGeometry, diag: &[f64]) -> Result<Self> {
        let n = domain.len();
        if diag.len() != n {
            return Err(Error::IncompatibleShapes(format!("{} diagonal entries for {n} pixels", diag.len())));
        }
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self::new(domain, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.domain.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.cols();
        &self.data[i * n..(i + 1) * n]
    }
}

impl LinearOperator for DenseMatrix {
    fn domain(&self) -> &ImageGeometry {
        &self.domain
    }

    fn range_len(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &Image) -> Result<Vec<f64>> {
        if x.geometry() != &self.domain {
            return Err(Error::IncompatibleShapes("image does not match the operator domain".into()));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x.values())).collect())
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Image> {
        if y.len() != self.rows {
            return Err(Error::IncompatibleShapes(format!("{} data entries for {} rows", y.len(), self.rows)));
        }
        let mut out = Image::zeros(&self.domain);
        for (i, &yi) in y.iter().enumerate() {
            for (o, &a) in out.values_mut().iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Ok(out)
    }
}
