//! Forward differences with Neumann boundary and their adjoint.

use crate::array::Image;
use crate::error::{Error, Result};
use crate::geometry::ImageGeometry;

/// Discrete gradient of an image: `vertical[r, c] = x[r+1, c] - x[r, c]`
/// (zero on the last row) and `horizontal[r, c] = x[r, c+1] - x[r, c]`
/// (zero on the last column).
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    geometry: ImageGeometry,
    pub vertical: Vec<f64>,
    pub horizontal: Vec<f64>,
}

impl GradientField {
    pub fn zeros(geometry: &ImageGeometry) -> Self {
        let n = geometry.len();
        Self { geometry: geometry.clone(), vertical: vec![0.0; n], horizontal: vec![0.0; n] }
    }

    pub fn from_channels(geometry: &ImageGeometry, vertical: Vec<f64>, horizontal: Vec<f64>) -> Result<Self> {
        if vertical.len() != geometry.len() || horizontal.len() != geometry.len() {
            return Err(Error::IncompatibleShapes("gradient channels do not match the geometry".into()));
        }
        Ok(Self { geometry: geometry.clone(), vertical, horizontal })
    }

    pub fn geometry(&self) -> &ImageGeometry {
        &self.geometry
    }

    /// Pointwise Euclidean magnitude `sqrt(v^2 + h^2)`.
    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.vertical.iter().zip(&self.horizontal).map(|(v, h)| v.hypot(*h))
    }

    pub fn inner(&self, other: &GradientField) -> f64 {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0, |s, (x, y)| s + x * y);
        dot(&self.vertical, &other.vertical) + dot(&self.horizontal, &other.horizontal)
    }
}

pub fn grad_forward(x: &Image) -> GradientField {
    let g = x.geometry();
    let (rows, cols) = (g.rows(), g.cols());
    let v = x.values();
    let mut out = GradientField::zeros(g);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if r + 1 < rows {
                out.vertical[i] = v[i + cols] - v[i];
            }
            if c + 1 < cols {
                out.horizontal[i] = v[i + 1] - v[i];
            }
        }
    }
    out
}

/// Adjoint of [`grad_forward`] (the negative divergence).
pub fn grad_adjoint(field: &GradientField) -> Image {
    let g = field.geometry();
    let (rows, cols) = (g.rows(), g.cols());
    let (pv, ph) = (&field.vertical, &field.horizontal);
    let mut out = Image::zeros(g);
    let xs = out.values_mut();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let mut acc = 0.0;
            if r + 1 < rows {
                acc -= pv[i];
            }
            if r > 0 {
                acc += pv[i - cols];
            }
            if c + 1 < cols {
                acc -= ph[i];
            }
            if c > 0 {
                acc += ph[i - 1];
            }
            xs[i] = acc;
        }
    }
    out
}
