//! Image and acquisition geometries.
//!
//! Images are stored row-major with `(row, col)` indexing. Row 0 is the top
//! of the image; physical coordinates have `x` pointing right along columns
//! and `y` pointing up, with the origin at the centre of the image (which is
//! also the rotation axis of the scanner).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageGeometry {
    rows: usize,
    cols: usize,
    pixel_size: f64,
}

impl ImageGeometry {
    pub fn new(rows: usize, cols: usize, pixel_size: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGeometry(format!(
                "image must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if !(pixel_size > 0.0 && pixel_size.is_finite()) {
            return Err(Error::InvalidGeometry(format!("pixel size must be positive, got {pixel_size}")));
        }
        Ok(Self { rows, cols, pixel_size })
    }

    /// Square image with unit pixels.
    pub fn square(size: usize) -> Result<Self> {
        Self::new(size, size, 1.0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.pixel_size
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.pixel_size
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Physical `(x, y)` coordinates of the centre of pixel `(row, col)`.
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let x = (col as f64 + 0.5) * self.pixel_size - 0.5 * self.width();
        let y = 0.5 * self.height() - (row as f64 + 0.5) * self.pixel_size;
        (x, y)
    }
}

/// 2D parallel-beam acquisition geometry.
///
/// A view at angle `theta` has rays travelling along `(cos theta, sin theta)`;
/// the detector coordinate `s` runs along the normal `(-sin theta, cos theta)`
/// and bins are placed symmetrically around the rotation axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionGeometry {
    view_angles: Vec<f64>,
    num_bins: usize,
    detector_spacing: f64,
}

impl AcquisitionGeometry {
    pub fn new(view_angles: Vec<f64>, num_bins: usize, detector_spacing: f64) -> Result<Self> {
        if view_angles.is_empty() {
            return Err(Error::InvalidGeometry("at least one view is required".into()));
        }
        if num_bins == 0 {
            return Err(Error::InvalidGeometry("at least one detector bin is required".into()));
        }
        if !(detector_spacing > 0.0 && detector_spacing.is_finite()) {
            return Err(Error::InvalidGeometry(format!("detector spacing must be positive, got {detector_spacing}")));
        }
        if view_angles.iter().any(|a| !(0.0..PI).contains(a)) {
            return Err(Error::InvalidGeometry("view angles must lie in [0, pi)".into()));
        }
        if view_angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGeometry("view angles must be strictly increasing".into()));
        }
        Ok(Self { view_angles, num_bins, detector_spacing })
    }

    /// `num_views` equally spaced angles `k * pi / num_views`.
    pub fn equiangular(num_views: usize, num_bins: usize, detector_spacing: f64) -> Result<Self> {
        let angles = (0..num_views).map(|k| k as f64 * PI / num_views as f64).collect();
        Self::new(angles, num_bins, detector_spacing)
    }

    pub fn num_views(&self) -> usize {
        self.view_angles.len()
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn detector_spacing(&self) -> f64 {
        self.detector_spacing
    }

    pub fn view_angles(&self) -> &[f64] {
        &self.view_angles
    }

    /// Detector coordinate of the centre of `bin`.
    pub fn bin_center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5 - 0.5 * self.num_bins as f64) * self.detector_spacing
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_images() {
        assert!(ImageGeometry::new(0, 3, 1.0).is_err());
        assert!(ImageGeometry::new(3, 0, 1.0).is_err());
        assert!(ImageGeometry::new(3, 3, 0.0).is_err());
        assert!(ImageGeometry::new(3, 3, -1.0).is_err());
    }

    #[test]
    fn pixel_centers_are_symmetric() {
        let g = ImageGeometry::new(4, 2, 0.5).unwrap();
        assert_eq!(g.pixel_center(0, 0), (-0.25, 0.75));
        assert_eq!(g.pixel_center(3, 1), (0.25, -0.75));
    }

    #[test]
    fn angles_must_increase_within_half_turn() {
        assert!(AcquisitionGeometry::new(vec![0.0, 0.0], 3, 1.0).is_err());
        assert!(AcquisitionGeometry::new(vec![0.5, 0.1], 3, 1.0).is_err());
        assert!(AcquisitionGeometry::new(vec![0.0, PI], 3, 1.0).is_err());
        assert!(AcquisitionGeometry::new(vec![0.0, 1.0], 0, 1.0).is_err());
        let g = AcquisitionGeometry::equiangular(90, 95, 1.0).unwrap();
        assert_eq!(g.num_views(), 90);
        assert!(g.view_angles().iter().all(|a| (0.0..PI).contains(a)));
    }

    #[test]
    fn bins_are_centred_on_the_axis() {
        let g = AcquisitionGeometry::equiangular(1, 4, 2.0).unwrap();
        assert_eq!(g.bin_center(0), -3.0);
        assert_eq!(g.bin_center(3), 3.0);
    }
}
