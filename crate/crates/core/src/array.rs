//! Dense containers for images and sinograms, and the vector-space
//! primitives shared by every operator and algorithm.
//!
//! All reductions accumulate sequentially in index order, so results are
//! bit-identical between runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AcquisitionGeometry, ImageGeometry};

/// Flat real-valued storage with a shape that can be compared.
pub trait DenseArray {
    fn as_slice(&self) -> &[f64];
    fn same_shape(&self, other: &Self) -> bool;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Image {
    geometry: ImageGeometry,
    values: Vec<f64>,
}

impl Image {
    pub fn zeros(geometry: &ImageGeometry) -> Self {
        Self::filled(geometry, 0.0)
    }

    pub fn filled(geometry: &ImageGeometry, value: f64) -> Self {
        Self { values: vec![value; geometry.len()], geometry: geometry.clone() }
    }

    pub fn from_vec(geometry: &ImageGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::IncompatibleShapes(format!(
                "{} values for a {}x{} image",
                values.len(),
                geometry.rows(),
                geometry.cols()
            )));
        }
        Ok(Self { geometry: geometry.clone(), values })
    }

    pub fn geometry(&self) -> &ImageGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.geometry.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let i = self.geometry.index(row, col);
        self.values[i] = value;
    }

    /// Same geometry, values produced by `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { geometry: self.geometry.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: f64, other: &Image) -> Result<Self> {
        check_shapes(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(&u, &v)| u + a * v).collect();
        Ok(Self { geometry: self.geometry.clone(), values })
    }

    /// `self - other`.
    pub fn sub(&self, other: &Image) -> Result<Self> {
        check_shapes(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(&u, &v)| u - v).collect();
        Ok(Self { geometry: self.geometry.clone(), values })
    }

    /// In-place `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Image) -> Result<()> {
        check_shapes(self, other)?;
        for (u, &v) in self.values.iter_mut().zip(&other.values) {
            *u += a * v;
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl DenseArray for Image {
    fn as_slice(&self) -> &[f64] {
        &self.values
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.geometry == other.geometry
    }
}

/// Projection data for an ordered block of views.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinogram {
    geometry: AcquisitionGeometry,
    view_ids: Vec<usize>,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(geometry: &AcquisitionGeometry, view_ids: Vec<usize>) -> Result<Self> {
        let len = view_ids.len() * geometry.num_bins();
        Self::from_vec(geometry, view_ids, vec![0.0; len])
    }

    pub fn from_vec(geometry: &AcquisitionGeometry, view_ids: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_view_ids(geometry, &view_ids)?;
        if values.len() != view_ids.len() * geometry.num_bins() {
            return Err(Error::IncompatibleShapes(format!(
                "{} values for {} views of {} bins",
                values.len(),
                view_ids.len(),
                geometry.num_bins()
            )));
        }
        Ok(Self { geometry: geometry.clone(), view_ids, values })
    }

    /// Covers all views of `geometry` in order.
    pub fn full(geometry: &AcquisitionGeometry, values: Vec<f64>) -> Result<Self> {
        Self::from_vec(geometry, (0..geometry.num_views()).collect(), values)
    }

    pub fn geometry(&self) -> &AcquisitionGeometry {
        &self.geometry
    }

    pub fn view_ids(&self) -> &[usize] {
        &self.view_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn num_bins(&self) -> usize {
        self.geometry.num_bins()
    }

    /// Bins of the `k`-th view in this block.
    pub fn view(&self, k: usize) -> &[f64] {
        let b = self.num_bins();
        &self.values[k * b..(k + 1) * b]
    }

    /// Restriction to the given views, which must all be present in `self`.
    pub fn subset(&self, view_ids: &[usize]) -> Result<Self> {
        let b = self.num_bins();
        let mut values = Vec::with_capacity(view_ids.len() * b);
        for &v in view_ids {
            let k = self
                .view_ids
                .iter()
                .position(|&w| w == v)
                .ok_or_else(|| Error::IncompatibleShapes(format!("view {v} is not part of this sinogram")))?;
            values.extend_from_slice(self.view(k));
        }
        Self::from_vec(&self.geometry, view_ids.to_vec(), values)
    }

    /// True when every entry is a nonnegative integer count.
    pub fn is_count_data(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0 && v.fract() == 0.0)
    }
}

impl DenseArray for Sinogram {
    fn as_slice(&self) -> &[f64] {
        &self.values
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.geometry == other.geometry && self.view_ids == other.view_ids
    }
}

fn check_view_ids(geometry: &AcquisitionGeometry, view_ids: &[usize]) -> Result<()> {
    let mut seen = vec![false; geometry.num_views()];
    for &v in view_ids {
        if v >= geometry.num_views() {
            return Err(Error::InvalidGeometry(format!("view {v} out of range for {} views", geometry.num_views())));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidGeometry(format!("view {v} listed twice")));
        }
    }
    Ok(())
}

fn check_shapes<T: DenseArray>(u: &T, v: &T) -> Result<()> {
    if u.same_shape(v) {
        Ok(())
    } else {
        Err(Error::IncompatibleShapes("operands differ in geometry".into()))
    }
}

/// Sequential dot product of two equally long slices.
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b)
}

pub fn inner<T: DenseArray>(u: &T, v: &T) -> Result<f64> {
    check_shapes(u, v)?;
    Ok(dot(u.as_slice(), v.as_slice()))
}

pub fn norm2<T: DenseArray>(u: &T) -> f64 {
    slice_norm(u.as_slice())
}

pub fn slice_norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// `‖u − v‖₂`.
pub fn distance(u: &Image, v: &Image) -> Result<f64> {
    check_shapes(u, v)?;
    let sq = u.values.iter().zip(&v.values).fold(0.0, |acc, (a, b)| acc + (a - b) * (a - b));
    Ok(sq.sqrt())
}

pub fn project_nonneg(u: &Image) -> Image {
    u.map(|v| if v > 0.0 { v } else { 0.0 })
}
