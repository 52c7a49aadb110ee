use serde::{Deserialize, Serialize};

use crate::array::Image;
use crate::error::{Error, Result};
use crate::geometry::ImageGeometry;

/// An ellipse in normalised coordinates: the image spans `[-1, 1]` on both
/// axes, `x` to the right and `y` up. `rotation` is in radians,
/// counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    #[serde(default)]
    pub rotation: f64,
    pub intensity: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        let (s, c) = self.rotation.sin_cos();
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u / self.semi_axes[0]).powi(2) + (v / self.semi_axes[1]).powi(2) <= 1.0
    }

    /// Area in normalised units.
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.semi_axes[0] * self.semi_axes[1]
    }
}

/// Square phantom built from overlapping ellipses whose intensities add.
/// Intensities may be negative to carve low-activity regions out of a
/// larger one; the result is clipped at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub size: usize,
    pub ellipses: Vec<Ellipse>,
}

impl PhantomSpec {
    /// Body outline, two low-activity lungs, heart, spine and a small hot
    /// lesion in the left lung.
    pub fn thorax(size: usize) -> Self {
        let e =
            |cx, cy, a, b, rotation, intensity| Ellipse { center: [cx, cy], semi_axes: [a, b], rotation, intensity };
        Self {
            size,
            ellipses: vec![
                e(0.0, 0.0, 0.85, 0.6, 0.0, 1.0),
                e(-0.42, 0.05, 0.22, 0.36, 0.15, -0.7),
                e(0.42, 0.05, 0.22, 0.36, -0.15, -0.7),
                e(0.02, -0.15, 0.17, 0.14, 0.3, 1.5),
                e(0.0, -0.45, 0.09, 0.09, 0.0, 0.8),
                e(-0.4, 0.15, 0.06, 0.06, 0.0, 2.5),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidArgument("phantom size must be positive".into()));
        }
        for (i, e) in self.ellipses.iter().enumerate() {
            let finite = e.center.iter().chain(&e.semi_axes).chain([&e.rotation, &e.intensity]).all(|v| v.is_finite());
            if !finite || e.semi_axes.iter().any(|&a| a <= 0.0) {
                return Err(Error::InvalidArgument(format!("ellipse {i} needs finite values and positive semi-axes")));
            }
        }
        Ok(())
    }

    /// Sum of `intensity * area` over the ellipses, in pixel units. Equal
    /// to the phantom's total activity up to pixelisation when no clipping
    /// occurs.
    pub fn analytic_total(&self) -> f64 {
        let pixels_per_unit = self.size as f64 / 2.0;
        self.ellipses.iter().map(|e| e.intensity * e.area()).sum::<f64>() * pixels_per_unit * pixels_per_unit
    }
}

/// Pixel value = clipped sum of the intensities of the ellipses containing
/// the pixel centre. Pixels have unit size.
pub fn make_phantom(spec: &PhantomSpec) -> Result<Image> {
    spec.validate()?;
    let geometry = ImageGeometry::square(spec.size)?;
    let half = 0.5 * spec.size as f64;
    let mut image = Image::zeros(&geometry);
    for row in 0..spec.size {
        for col in 0..spec.size {
            let (x, y) = geometry.pixel_center(row, col);
            let (x, y) = (x / half, y / half);
            let value: f64 = spec.ellipses.iter().filter(|e| e.contains(x, y)).map(|e| e.intensity).sum();
            image.set(row, col, value.max(0.0));
        }
    }
    Ok(image)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_spec_is_zero() {
        let im = make_phantom(&PhantomSpec { size: 8, ellipses: vec![] }).unwrap();
        assert!(im.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn covering_ellipse_is_constant() {
        let e = Ellipse { center: [0.0, 0.0], semi_axes: [1.5, 1.5], rotation: 0.0, intensity: 1.0 };
        let im = make_phantom(&PhantomSpec { size: 9, ellipses: vec![e] }).unwrap();
        assert!(im.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn orientation() {
        // a small disc in the upper-left quadrant lands in the top-left pixels
        let e = Ellipse { center: [-0.75, 0.75], semi_axes: [0.2, 0.2], rotation: 0.0, intensity: 1.0 };
        let im = make_phantom(&PhantomSpec { size: 8, ellipses: vec![e] }).unwrap();
        assert_eq!(im.get(1, 1), 1.0);
        assert_eq!(im.get(6, 6), 0.0);
        assert_eq!(im.get(1, 6), 0.0);
        assert_eq!(im.get(6, 1), 0.0);
    }

    #[test]
    fn rotation_turns_the_long_axis() {
        let flat = Ellipse { center: [0.0, 0.0], semi_axes: [0.9, 0.1], rotation: 0.0, intensity: 1.0 };
        let upright = Ellipse { rotation: std::f64::consts::FRAC_PI_2, ..flat };
        assert!(flat.contains(0.8, 0.0) && !flat.contains(0.0, 0.8));
        assert!(upright.contains(0.0, 0.8) && !upright.contains(0.8, 0.0));
    }

    #[test]
    fn thorax_structure_and_total() {
        let spec = PhantomSpec::thorax(64);
        let im = make_phantom(&spec).unwrap();
        assert!(im.values().iter().all(|&v| v >= 0.0));
        let at = |x: f64, y: f64| {
            let col = ((x + 1.0) * 32.0) as usize;
            let row = ((1.0 - y) * 32.0) as usize;
            im.get(row, col)
        };
        assert_eq!(at(0.95, 0.95), 0.0);
        assert!((at(0.6, -0.3) - 1.0).abs() < 1e-12);
        assert!(at(0.42, 0.05) < at(0.6, -0.3));
        assert!(at(-0.4, 0.15) > at(0.02, -0.15));
        let total = im.sum();
        let analytic = spec.analytic_total();
        assert!((total - analytic).abs() <= 0.05 * analytic, "{total} vs {analytic}");
    }

    #[test]
    fn invalid_ellipse() {
        let e = Ellipse { center: [0.0, 0.0], semi_axes: [0.0, 1.0], rotation: 0.0, intensity: 1.0 };
        assert!(make_phantom(&PhantomSpec { size: 4, ellipses: vec![e] }).is_err());
    }
}
