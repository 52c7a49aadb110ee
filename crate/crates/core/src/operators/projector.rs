//! Siddon ray-driven parallel-beam projector.
//!
//! Every (view, bin) pair is one ray through the bin centre. The system
//! matrix stores, per ray, the exact intersection length of the ray with each
//! pixel it crosses. Forward projection gathers along rays and
//! back-projection scatters along the same rays in the same order, so the
//! pair is adjoint up to rounding.

use std::sync::Arc;

use crate::array::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::{AcquisitionGeometry, ImageGeometry};

use super::LinearOperator;

const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug)]
pub struct SystemMatrix {
    image: ImageGeometry,
    acquisition: AcquisitionGeometry,
    ray_start: Vec<usize>,
    pixels: Vec<u32>,
    weights: Vec<f64>,
}

impl SystemMatrix {
    pub fn new(image: &ImageGeometry, acquisition: &AcquisitionGeometry) -> Self {
        let rays = acquisition.num_views() * acquisition.num_bins();
        let mut ray_start = Vec::with_capacity(rays + 1);
        let mut pixels = Vec::new();
        let mut weights = Vec::new();
        ray_start.push(0);
        for &theta in acquisition.view_angles() {
            for bin in 0..acquisition.num_bins() {
                trace_ray(image, theta, acquisition.bin_center(bin), &mut pixels, &mut weights);
                ray_start.push(pixels.len());
            }
        }
        Self { image: image.clone(), acquisition: acquisition.clone(), ray_start, pixels, weights }
    }

    pub fn image_geometry(&self) -> &ImageGeometry {
        &self.image
    }

    pub fn acquisition_geometry(&self) -> &AcquisitionGeometry {
        &self.acquisition
    }

    /// Pixel indices and intersection lengths of one ray.
    pub fn ray(&self, view: usize, bin: usize) -> (&[u32], &[f64]) {
        let r = view * self.acquisition.num_bins() + bin;
        let span = self.ray_start[r]..self.ray_start[r + 1];
        (&self.pixels[span.clone()], &self.weights[span])
    }

    pub fn nonzeros(&self) -> usize {
        self.weights.len()
    }
}

/// Appends the Siddon traversal of the ray at angle `theta` and detector
/// offset `s`, merging consecutive segments in the same pixel.
fn trace_ray(g: &ImageGeometry, theta: f64, s: f64, pixels: &mut Vec<u32>, weights: &mut Vec<f64>) {
    let (sin, cos) = theta.sin_cos();
    let (dx, dy) = (cos, sin);
    let (px, py) = (-s * sin, s * cos);
    let ps = g.pixel_size();
    let (xmin, ymin) = (-0.5 * g.width(), -0.5 * g.height());
    let (xmax, ymax) = (-xmin, -ymin);

    let mut tmin = f64::NEG_INFINITY;
    let mut tmax = f64::INFINITY;
    for (p, d, lo, hi) in [(px, dx, xmin, xmax), (py, dy, ymin, ymax)] {
        if d.abs() < PARALLEL_EPS {
            if p < lo || p >= hi {
                return;
            }
        } else {
            let (a, b) = ((lo - p) / d, (hi - p) / d);
            tmin = tmin.max(a.min(b));
            tmax = tmax.min(a.max(b));
        }
    }
    if tmax <= tmin {
        return;
    }

    let crossings = |p: f64, d: f64, lo: f64, count: usize| -> Vec<f64> {
        if d.abs() < PARALLEL_EPS {
            return Vec::new();
        }
        let mut ts: Vec<f64> =
            (0..=count).map(|i| (lo + i as f64 * ps - p) / d).filter(|&t| t > tmin && t < tmax).collect();
        if d < 0.0 {
            ts.reverse();
        }
        ts
    };
    let tx = crossings(px, dx, xmin, g.cols());
    let ty = crossings(py, dy, ymin, g.rows());

    let mut bounds = Vec::with_capacity(tx.len() + ty.len() + 2);
    bounds.push(tmin);
    let (mut i, mut j) = (0, 0);
    while i < tx.len() || j < ty.len() {
        if j == ty.len() || (i < tx.len() && tx[i] <= ty[j]) {
            bounds.push(tx[i]);
            i += 1;
        } else {
            bounds.push(ty[j]);
            j += 1;
        }
    }
    bounds.push(tmax);

    let first = pixels.len();
    for w in bounds.windows(2) {
        let len = w[1] - w[0];
        if len <= PARALLEL_EPS * ps {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let (xm, ym) = (px + tm * dx, py + tm * dy);
        let col = (((xm - xmin) / ps).floor().max(0.0) as usize).min(g.cols() - 1);
        let row = (((ymax - ym) / ps).floor().max(0.0) as usize).min(g.rows() - 1);
        let pixel = g.index(row, col) as u32;
        if pixels.len() > first && *pixels.last().unwrap() == pixel {
            *weights.last_mut().unwrap() += len;
        } else {
            pixels.push(pixel);
            weights.push(len);
        }
    }
}

/// The projector restricted to an ordered set of views. Cheap to clone; all
/// restrictions of one system matrix share its storage.
#[derive(Clone, Debug)]
pub struct Projector {
    system: Arc<SystemMatrix>,
    view_ids: Vec<usize>,
}

impl Projector {
    /// Full-view projector.
    pub fn new(image: &ImageGeometry, acquisition: &AcquisitionGeometry) -> Self {
        let system = Arc::new(SystemMatrix::new(image, acquisition));
        let view_ids = (0..acquisition.num_views()).collect();
        Self { system, view_ids }
    }

    pub fn restrict(&self, view_ids: &[usize]) -> Result<Self> {
        let views = self.system.acquisition.num_views();
        if let Some(v) = view_ids.iter().find(|&&v| v >= views) {
            return Err(Error::InvalidGeometry(format!("view {v} out of range for {views} views")));
        }
        Ok(Self { system: Arc::clone(&self.system), view_ids: view_ids.to_vec() })
    }

    pub fn system(&self) -> &SystemMatrix {
        &self.system
    }

    pub fn image_geometry(&self) -> &ImageGeometry {
        &self.system.image
    }

    pub fn acquisition_geometry(&self) -> &AcquisitionGeometry {
        &self.system.acquisition
    }

    pub fn view_ids(&self) -> &[usize] {
        &self.view_ids
    }

    pub fn forward_project(&self, x: &Image) -> Result<Sinogram> {
        let values = self.forward_values(x)?;
        Sinogram::from_vec(self.acquisition_geometry(), self.view_ids.clone(), values)
    }

    pub fn back_project(&self, s: &Sinogram) -> Result<Image> {
        if s.view_ids() != self.view_ids.as_slice() || s.geometry() != self.acquisition_geometry() {
            return Err(Error::IncompatibleShapes("sinogram views do not match the projector".into()));
        }
        self.back_values(s.values())
    }

    fn forward_values(&self, x: &Image) -> Result<Vec<f64>> {
        if x.geometry() != self.image_geometry() {
            return Err(Error::IncompatibleShapes("image does not match the projector geometry".into()));
        }
        let xs = x.values();
        let bins = self.acquisition_geometry().num_bins();
        let mut out = Vec::with_capacity(self.view_ids.len() * bins);
        for &view in &self.view_ids {
            for bin in 0..bins {
                let (pix, w) = self.system.ray(view, bin);
                out.push(pix.iter().zip(w).fold(0.0, |acc, (&p, &w)| acc + w * xs[p as usize]));
            }
        }
        Ok(out)
    }

    fn back_values(&self, y: &[f64]) -> Result<Image> {
        let bins = self.acquisition_geometry().num_bins();
        if y.len() != self.view_ids.len() * bins {
            return Err(Error::IncompatibleShapes(format!(
                "{} data entries for {} views of {bins} bins",
                y.len(),
                self.view_ids.len()
            )));
        }
        let mut out = Image::zeros(self.image_geometry());
        let xs = out.values_mut();
        for (k, &view) in self.view_ids.iter().enumerate() {
            for bin in 0..bins {
                let v = y[k * bins + bin];
                if v == 0.0 {
                    continue;
                }
                let (pix, w) = self.system.ray(view, bin);
                for (&p, &w) in pix.iter().zip(w) {
                    xs[p as usize] += w * v;
                }
            }
        }
        Ok(out)
    }
}

impl LinearOperator for Projector {
    fn domain(&self) -> &ImageGeometry {
        self.image_geometry()
    }

    fn range_len(&self) -> usize {
        self.view_ids.len() * self.acquisition_geometry().num_bins()
    }

    fn apply(&self, x: &Image) -> Result<Vec<f64>> {
        self.forward_values(x)
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Image> {
        self.back_values(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{inner, norm2};
    use crate::rng::RngState;

    fn random_image(g: &ImageGeometry, rng: &mut RngState) -> Image {
        Image::from_vec(g, (0..g.len()).map(|_| rng.next_uniform() - 0.3).collect()).unwrap()
    }

    #[test]
    fn axial_ray_crosses_one_full_row() {
        for k in [1, 4, 7] {
            let g = ImageGeometry::square(k).unwrap();
            let a = AcquisitionGeometry::new(vec![0.0], k, 1.0).unwrap();
            let p = Projector::new(&g, &a);
            let y = p.forward_project(&Image::filled(&g, 1.0)).unwrap();
            assert!(y.values().iter().all(|&v| (v - k as f64).abs() < 1e-12), "{:?}", y.values());
            // bin b follows row k-1-b
            let (pix, w) = p.system().ray(0, 0);
            assert_eq!(pix.len(), k);
            assert!(pix.iter().all(|&q| q as usize / k == k - 1));
            assert!(w.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn vertical_ray_crosses_one_column() {
        let g = ImageGeometry::new(5, 3, 2.0).unwrap();
        let a = AcquisitionGeometry::new(vec![std::f64::consts::FRAC_PI_2], 3, 2.0).unwrap();
        let p = Projector::new(&g, &a);
        for bin in 0..3 {
            let (pix, w) = p.system().ray(0, bin);
            assert_eq!(pix.len(), 5);
            assert!((w.iter().sum::<f64>() - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_ray_length_is_the_chord() {
        // ray through the centre at 45 degrees crosses the square's diagonal
        let g = ImageGeometry::square(8).unwrap();
        let a = AcquisitionGeometry::new(vec![std::f64::consts::FRAC_PI_4], 1, 1.0).unwrap();
        let p = Projector::new(&g, &a);
        let (_, w) = p.system().ray(0, 0);
        assert!((w.iter().sum::<f64>() - 8.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(w.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn rays_outside_the_image_are_empty() {
        let g = ImageGeometry::square(4).unwrap();
        let a = AcquisitionGeometry::new(vec![0.0, 1.0], 12, 1.0).unwrap();
        let p = Projector::new(&g, &a);
        assert_eq!(p.system().ray(0, 0).0.len(), 0);
        let y = p.forward_project(&Image::filled(&g, 1.0)).unwrap();
        assert_eq!(y.values()[0], 0.0);
        assert_eq!(y.values()[11], 0.0);
    }

    #[test]
    fn zero_inputs_give_zero_outputs() {
        let g = ImageGeometry::square(6).unwrap();
        let a = AcquisitionGeometry::equiangular(5, 9, 1.0).unwrap();
        let p = Projector::new(&g, &a);
        assert!(p.forward_project(&Image::zeros(&g)).unwrap().values().iter().all(|&v| v == 0.0));
        let s = Sinogram::zeros(&a, (0..5).collect()).unwrap();
        assert!(p.back_project(&s).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_and_adjoint() {
        let g = ImageGeometry::new(9, 7, 0.8).unwrap();
        let a = AcquisitionGeometry::equiangular(13, 14, 0.75).unwrap();
        let p = Projector::new(&g, &a);
        let mut rng = RngState::new(11);
        for _ in 0..20 {
            let (x1, x2) = (random_image(&g, &mut rng), random_image(&g, &mut rng));
            let sum = p.forward_project(&x1.add_scaled(1.0, &x2).unwrap()).unwrap();
            let (y1, y2) = (p.forward_project(&x1).unwrap(), p.forward_project(&x2).unwrap());
            for ((s, a), b) in sum.values().iter().zip(y1.values()).zip(y2.values()) {
                assert!((s - a - b).abs() <= 1e-12 * (1.0 + s.abs()));
            }
            let y: Vec<f64> = (0..13 * 14).map(|_| rng.next_uniform() - 0.5).collect();
            let y = Sinogram::full(&a, y).unwrap();
            let lhs = inner(&y1, &y).unwrap();
            let rhs = inner(&x1, &p.back_project(&y).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * norm2(&y1) * norm2(&y));
        }
    }

    #[test]
    fn one_hot_backprojection_is_the_ray_footprint() {
        let g = ImageGeometry::square(6).unwrap();
        let a = AcquisitionGeometry::equiangular(7, 9, 1.0).unwrap();
        let p = Projector::new(&g, &a);
        let mut s = Sinogram::zeros(&a, (0..7).collect()).unwrap();
        s.values_mut()[3 * 9 + 4] = 1.0;
        let b = p.back_project(&s).unwrap();
        let mut expected = vec![0.0; 36];
        let (pix, w) = p.system().ray(3, 4);
        for (&q, &w) in pix.iter().zip(w) {
            expected[q as usize] += w;
        }
        assert_eq!(b.values(), expected.as_slice());
    }

    #[test]
    fn subset_blocks_stack_to_the_full_projection() {
        let g = ImageGeometry::square(8).unwrap();
        let a = AcquisitionGeometry::equiangular(10, 12, 1.0).unwrap();
        let p = Projector::new(&g, &a);
        let x = random_image(&g, &mut RngState::new(5));
        let full = p.forward_project(&x).unwrap();
        for cell in [vec![0, 3, 6, 9], vec![1, 4, 7], vec![8, 2, 5]] {
            let sub = p.restrict(&cell).unwrap().forward_project(&x).unwrap();
            let expected = full.subset(&cell).unwrap();
            let bits = |s: &Sinogram| s.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&sub), bits(&expected));
        }
    }

    #[test]
    fn geometry_mismatches_are_errors() {
        let g = ImageGeometry::square(4).unwrap();
        let a = AcquisitionGeometry::equiangular(4, 5, 1.0).unwrap();
        let p = Projector::new(&g, &a);
        assert!(p.forward_project(&Image::zeros(&ImageGeometry::square(5).unwrap())).is_err());
        let s = Sinogram::zeros(&a, vec![0, 1]).unwrap();
        assert!(p.back_project(&s).is_err());
        assert!(p.restrict(&[4]).is_err());
    }
}
