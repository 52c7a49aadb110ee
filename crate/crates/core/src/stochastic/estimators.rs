//! Stochastic estimators of `grad f` for `f = sum_i f_i`.
//!
//! With index `i` drawn with probability `p_i`:
//!
//! | kind  | estimate                                         | cost (evaluations) |
//! |-------|--------------------------------------------------|--------------------|
//! | SGD   | `g_i(x) / p_i`                                   | 1                  |
//! | SAG   | `sum_j v_j` after `v_i <- g_i(x)`                | 1                  |
//! | SAGA  | `(g_i(x) - v_i) / p_i + sum_j v_j`, then `v_i <- g_i(x)` | 1          |
//! | SVRG  | `(g_i(x) - g_i(s)) / p_i + grad f(s)`            | 2, or `n` on a snapshot |
//! | LSVRG | as SVRG, snapshot refreshed with probability `q` | 2, or `n` on a snapshot |
//!
//! Here `g_i = grad f_i`, `v` is the stored gradient table and `s` the
//! snapshot point. SVRG refreshes its snapshot every `m` calls; LSVRG draws
//! its coin from the sampler's stream before the index. On a snapshot call
//! `x = s`, so the estimate is `grad f(s)` and no further evaluation is made.

use crate::array::Image;
use crate::error::{Error, Result};
use crate::functions::{SmoothFunction, SmoothSum};

use super::{GradientSource, PassCounter, Sampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Sgd,
    Sag,
    Saga,
    Svrg,
    Lsvrg,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [Self::Sgd, Self::Sag, Self::Saga, Self::Svrg, Self::Lsvrg];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sgd => "sgd",
            Self::Sag => "sag",
            Self::Saga => "saga",
            Self::Svrg => "svrg",
            Self::Lsvrg => "lsvrg",
        }
    }

    pub fn uses_table(self) -> bool {
        matches!(self, Self::Sag | Self::Saga)
    }

    pub fn uses_snapshot(self) -> bool {
        matches!(self, Self::Svrg | Self::Lsvrg)
    }
}

/// How a SAG/SAGA gradient table is filled before the first estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableInit {
    /// `v_j = grad f_j(x0)` for every `j`; costs one data pass.
    FullPass,
    /// `v_j = 0`; free.
    Zeros,
}

#[derive(Clone, Debug)]
struct Snapshot {
    point: Image,
    full_gradient: Image,
}

#[derive(Clone)]
pub struct Estimator<'a, F> {
    kind: EstimatorKind,
    sum: &'a SmoothSum<F>,
    sampler: Sampler,
    table: Option<Vec<Image>>,
    table_sum: Option<Image>,
    snapshot: Option<Snapshot>,
    update_frequency: usize,
    snapshot_probability: f64,
    calls: u64,
    snapshots_taken: u64,
    last_index: Option<usize>,
    counter: PassCounter,
}

impl<'a, F: SmoothFunction> Estimator<'a, F> {
    /// Estimator with the default parameters: SVRG update frequency `2n`,
    /// LSVRG snapshot probability `1/n`.
    pub fn new(kind: EstimatorKind, sum: &'a SmoothSum<F>, sampler: Sampler) -> Result<Self> {
        let n = sum.len();
        if sampler.len() != n {
            return Err(Error::InvalidArgument(format!(
                "sampler over {} indices for a sum of {n} terms",
                sampler.len()
            )));
        }
        Ok(Self {
            kind,
            sum,
            sampler,
            table: None,
            table_sum: None,
            snapshot: None,
            update_frequency: 2 * n,
            snapshot_probability: 1.0 / n as f64,
            calls: 0,
            snapshots_taken: 0,
            last_index: None,
            counter: PassCounter::new(n),
        })
    }

    /// SVRG snapshot period `m`, in estimate calls.
    pub fn with_update_frequency(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("update frequency must be at least 1".into()));
        }
        self.update_frequency = m;
        Ok(self)
    }

    /// LSVRG snapshot probability `q` in `(0, 1]`.
    pub fn with_snapshot_probability(mut self, q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidArgument(format!("snapshot probability must be in (0, 1], got {q}")));
        }
        self.snapshot_probability = q;
        Ok(self)
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.sum.len()
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn update_frequency(&self) -> usize {
        self.update_frequency
    }

    pub fn snapshot_probability(&self) -> f64 {
        self.snapshot_probability
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn snapshots_taken(&self) -> u64 {
        self.snapshots_taken
    }

    pub fn last_index(&self) -> Option<usize> {
        self.last_index
    }

    pub fn evaluations(&self) -> u64 {
        self.counter.evaluations()
    }

    pub fn table(&self) -> Option<&[Image]> {
        self.table.as_deref()
    }

    pub fn table_sum(&self) -> Option<&Image> {
        self.table_sum.as_ref()
    }

    pub fn snapshot_point(&self) -> Option<&Image> {
        self.snapshot.as_ref().map(|s| &s.point)
    }

    pub fn snapshot_gradient(&self) -> Option<&Image> {
        self.snapshot.as_ref().map(|s| &s.full_gradient)
    }

    pub fn initialize_table(&mut self, x0: &Image, mode: TableInit) -> Result<()> {
        if !self.kind.uses_table() {
            return Err(Error::InvalidArgument(format!("{} keeps no gradient table", self.kind.name())));
        }
        let (table, total) = match mode {
            TableInit::FullPass => {
                let (grads, total) = self.sum.term_gradients(x0)?;
                self.counter.add_full_pass();
                (grads, total)
            }
            TableInit::Zeros => {
                let zero = Image::zeros(x0.geometry());
                (vec![zero.clone(); self.n()], zero)
            }
        };
        self.table = Some(table);
        self.table_sum = Some(total);
        Ok(())
    }

    /// Makes `x` the SVRG/LSVRG anchor, evaluating the full gradient there.
    pub fn take_snapshot(&mut self, x: &Image) -> Result<()> {
        let full_gradient = self.sum.gradient(x)?;
        self.counter.add_full_pass();
        self.snapshots_taken += 1;
        self.snapshot = Some(Snapshot { point: x.clone(), full_gradient });
        Ok(())
    }

    /// The estimate for a given index, bypassing the random draws. For
    /// SVRG/LSVRG, `refresh` takes a snapshot at `x` first. Updates all state
    /// exactly as [`GradientSource::estimate`] does.
    pub fn estimate_with(&mut self, x: &Image, index: usize, refresh: bool) -> Result<Image> {
        let p = self.sampler.probability(index);
        self.calls += 1;
        self.last_index = Some(index);
        match self.kind {
            EstimatorKind::Sgd => {
                let g = self.sum.term(index).gradient(x)?;
                self.counter.add(1);
                Ok(if p == 1.0 { g } else { g.map(|v| v / p) })
            }
            EstimatorKind::Sag => {
                let g = self.sum.term(index).gradient(x)?;
                self.counter.add(1);
                let (table, total) = self.table_parts()?;
                replace_in_sum(total, &table[index], &g);
                table[index] = g;
                Ok(total.clone())
            }
            EstimatorKind::Saga => {
                let g = self.sum.term(index).gradient(x)?;
                self.counter.add(1);
                let (table, total) = self.table_parts()?;
                let out = corrected(&g, &table[index], total, p);
                replace_in_sum(total, &table[index], &g);
                table[index] = g;
                Ok(out)
            }
            EstimatorKind::Svrg | EstimatorKind::Lsvrg => {
                if refresh || self.snapshot.is_none() {
                    self.take_snapshot(x)?;
                    return Ok(self.snapshot.as_ref().unwrap().full_gradient.clone());
                }
                let snap = self.snapshot.as_ref().unwrap();
                let term = self.sum.term(index);
                let g = term.gradient(x)?;
                let anchor = term.gradient(&snap.point)?;
                self.counter.add(2);
                Ok(corrected(&g, &anchor, &snap.full_gradient, p))
            }
        }
    }

    fn table_parts(&mut self) -> Result<(&mut Vec<Image>, &mut Image)> {
        match (self.table.as_mut(), self.table_sum.as_mut()) {
            (Some(t), Some(s)) => Ok((t, s)),
            _ => Err(Error::TableUninitialized),
        }
    }
}

/// `fresh / p + (base - anchor / p)` entrywise, taking `base` unchanged
/// wherever `fresh` and `anchor` agree exactly.
fn corrected(fresh: &Image, anchor: &Image, base: &Image, p: f64) -> Image {
    let mut out = base.clone();
    for ((o, &f), &a) in out.values_mut().iter_mut().zip(fresh.values()).zip(anchor.values()) {
        if f != a {
            *o = f / p + (*o - a / p);
        }
    }
    out
}

/// `total <- (total - old) + new`.
fn replace_in_sum(total: &mut Image, old: &Image, new: &Image) {
    for ((t, &o), &n) in total.values_mut().iter_mut().zip(old.values()).zip(new.values()) {
        *t = (*t - o) + n;
    }
}

impl<F: SmoothFunction> GradientSource for Estimator<'_, F> {
    fn estimate(&mut self, x: &Image) -> Result<Image> {
        let refresh = match self.kind {
            EstimatorKind::Svrg => self.snapshot.is_none() || self.calls % self.update_frequency as u64 == 0,
            EstimatorKind::Lsvrg => {
                let coin = self.sampler.next_uniform() < self.snapshot_probability;
                coin || self.snapshot.is_none()
            }
            _ => false,
        };
        let index = self.sampler.next_index();
        self.estimate_with(x, index, refresh)
    }

    fn data_passes(&self) -> f64 {
        self.counter.passes()
    }

    fn reset(&mut self, seed: u64) {
        self.sampler.reseed(seed);
        self.table = None;
        self.table_sum = None;
        self.snapshot = None;
        self.calls = 0;
        self.snapshots_taken = 0;
        self.last_index = None;
        self.counter = PassCounter::new(self.n());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::LeastSquares;
    use crate::geometry::ImageGeometry;
    use crate::operators::DenseMatrix;
    use std::sync::Arc;

    /// `f_i(x) = c_i x^2` on a 1x1 image.
    fn scalar_quadratics(coeffs: &[f64]) -> (SmoothSum<LeastSquares>, ImageGeometry) {
        let g = ImageGeometry::square(1).unwrap();
        let id = Arc::new(DenseMatrix::identity(&g));
        let terms = coeffs.iter().map(|&c| LeastSquares::new(id.clone(), vec![0.0], 2.0 * c).unwrap()).collect();
        (SmoothSum::new(terms).unwrap(), g)
    }

    fn at(g: &ImageGeometry, v: f64) -> Image {
        Image::filled(g, v)
    }

    fn scalar(im: &Image) -> f64 {
        im.values()[0]
    }

    #[test]
    fn sgd_enumeration() {
        let (sum, g) = scalar_quadratics(&[1.0, 2.0]);
        let x = at(&g, 1.0);
        let mut est = Estimator::new(EstimatorKind::Sgd, &sum, Sampler::uniform(2, 0).unwrap()).unwrap();
        assert_eq!(scalar(&est.estimate_with(&x, 0, false).unwrap()), 4.0);
        assert_eq!(scalar(&est.estimate_with(&x, 1, false).unwrap()), 8.0);

        let p = Sampler::new(vec![0.25, 0.75], 0).unwrap();
        let mut est = Estimator::new(EstimatorKind::Sgd, &sum, p).unwrap();
        let e0 = scalar(&est.estimate_with(&x, 0, false).unwrap());
        let e1 = scalar(&est.estimate_with(&x, 1, false).unwrap());
        assert_eq!(e0, 8.0);
        assert!((e1 - 16.0 / 3.0).abs() < 1e-15);
        assert!((0.25 * e0 + 0.75 * e1 - 6.0).abs() < 1e-14);
    }

    #[test]
    fn single_subset_sgd_is_the_full_gradient() {
        let (sum, g) = scalar_quadratics(&[1.5]);
        let mut est = Estimator::new(EstimatorKind::Sgd, &sum, Sampler::uniform(1, 0).unwrap()).unwrap();
        let x = at(&g, 0.7);
        assert_eq!(est.estimate(&x).unwrap(), sum.gradient(&x).unwrap());
    }

    #[test]
    fn sag_and_saga_need_a_table() {
        let (sum, g) = scalar_quadratics(&[1.0, 2.0]);
        for kind in [EstimatorKind::Sag, EstimatorKind::Saga] {
            let mut est = Estimator::new(kind, &sum, Sampler::uniform(2, 0).unwrap()).unwrap();
            assert!(matches!(est.estimate(&at(&g, 1.0)), Err(Error::TableUninitialized)));
        }
        let mut sgd = Estimator::new(EstimatorKind::Sgd, &sum, Sampler::uniform(2, 0).unwrap()).unwrap();
        assert!(sgd.initialize_table(&at(&g, 1.0), TableInit::Zeros).is_err());
    }

    #[test]
    fn table_initialization() {
        let (sum, g) = scalar_quadratics(&[1.0, 2.0, 0.5]);
        let x0 = at(&g, 1.5);
        let mut est = Estimator::new(EstimatorKind::Saga, &sum, Sampler::uniform(3, 0).unwrap()).unwrap();
        est.initialize_table(&x0, TableInit::FullPass).unwrap();
        assert_eq!(est.data_passes(), 1.0);
        for (j, v) in est.table().unwrap().iter().enumerate() {
            assert_eq!(v, &sum.term(j).gradient(&x0).unwrap());
        }
        let full = scalar(&sum.gradient(&x0).unwrap());
        assert!((scalar(est.table_sum().unwrap()) - full).abs() <= 1e-12 * full.abs());

        let mut est = Estimator::new(EstimatorKind::Sag, &sum, Sampler::uniform(3, 0).unwrap()).unwrap();
        est.initialize_table(&x0, TableInit::Zeros).unwrap();
        assert_eq!(scalar(est.table_sum().unwrap()), 0.0);
        assert_eq!(est.data_passes(), 0.0);
    }

    #[test]
    fn saga_at_the_initial_point_is_exact() {
        let (sum, g) = scalar_quadratics(&[1.0, 2.0, 0.5]);
        let x0 = at(&g, 1.5);
        for i in 0..3 {
            let mut est = Estimator::new(EstimatorKind::Saga, &sum, Sampler::uniform(3, 0).unwrap()).unwrap();
            est.initialize_table(&x0, TableInit::FullPass).unwrap();
            let e = est.estimate_with(&x0, i, false).unwrap();
            assert_eq!(&e, est.table_sum().unwrap());
        }
    }

    #[test]
    fn sag_hand_trace() {
        let (sum, g) = scalar_quadratics(&[1.0, 2.0]);
        let mut est = Estimator::new(EstimatorKind::Sag, &sum, Sampler::uniform(2, 0).unwrap()).unwrap();
        est.initialize_table(&at(&g, 1.0), TableInit::FullPass).unwrap();
        assert_eq!(scalar(&est.estimate_with(&at(&g, 2.0), 0, false).unwrap()), 8.0);
        // once every entry is refreshed at x the estimate is exact
        let x = at(&g, 2.0);
        est.estimate_with(&x, 1, false).unwrap();
        assert_eq!(scalar(&est.estimate_with(&x, 0, false).unwrap()), scalar(&sum.gradient(&x).unwrap()));
    }

    #[test]
    fn svrg_snapshot_behaviour() {
        let (sum, g) = scalar_quadratics(&[1.0, 2.0, 0.5]);
        let s = at(&g, 0.8);
        let mut est = Estimator::new(EstimatorKind::Svrg, &sum, Sampler::uniform(3, 0).unwrap()).unwrap();
        est.take_snapshot(&s).unwrap();
        let full = sum.gradient(&s).unwrap();
        assert_eq!(est.snapshot_gradient().unwrap(), &full);
        for i in 0..3 {
            assert_eq!(est.estimate_with(&s, i, false).unwrap(), full);
        }
        // m = 1: every call is a snapshot and exact
        let mut est = Estimator::new(EstimatorKind::Svrg, &sum, Sampler::uniform(3, 2).unwrap())
            .unwrap()
            .with_update_frequency(1)
            .unwrap();
        for k in 0..10 {
            let x = at(&g, 0.1 * k as f64 - 0.3);
            assert_eq!(est.estimate(&x).unwrap(), sum.gradient(&x).unwrap());
        }
    }

    #[test]
    fn lsvrg_with_certain_refresh_is_exact() {
        let (sum, g) = scalar_quadratics(&[1.0, 2.0, 0.5]);
        let mut est = Estimator::new(EstimatorKind::Lsvrg, &sum, Sampler::uniform(3, 4).unwrap())
            .unwrap()
            .with_snapshot_probability(1.0)
            .unwrap();
        for k in 0..10 {
            let x = at(&g, 0.37 * k as f64);
            assert_eq!(est.estimate(&x).unwrap(), sum.gradient(&x).unwrap());
        }
        assert_eq!(est.snapshots_taken(), 10);
    }

    #[test]
    fn lsvrg_refresh_rate() {
        let (sum, g) = scalar_quadratics(&[1.0; 32]);
        let mut est = Estimator::new(EstimatorKind::Lsvrg, &sum, Sampler::uniform(32, 2024).unwrap()).unwrap();
        assert_eq!(est.snapshot_probability(), 1.0 / 32.0);
        let x = at(&g, 1.0);
        for _ in 0..10_000 {
            est.estimate(&x).unwrap();
        }
        let refreshes = est.snapshots_taken() as i64;
        assert!((refreshes - 312).abs() <= 70, "{refreshes}");
    }

    #[test]
    fn invalid_parameters() {
        let (sum, _) = scalar_quadratics(&[1.0, 2.0]);
        let est = Estimator::new(EstimatorKind::Lsvrg, &sum, Sampler::uniform(2, 0).unwrap()).unwrap();
        assert!(est.clone().with_snapshot_probability(0.0).is_err());
        assert!(est.clone().with_snapshot_probability(1.5).is_err());
        assert!(est.with_update_frequency(0).is_err());
        assert!(Estimator::new(EstimatorKind::Sgd, &sum, Sampler::uniform(3, 0).unwrap()).is_err());
    }

    #[test]
    fn reset_restarts_the_stream() {
        let (sum, g) = scalar_quadratics(&[1.0, 2.0, 3.0, 4.0]);
        let x = at(&g, 1.0);
        let mut est = Estimator::new(EstimatorKind::Sgd, &sum, Sampler::uniform(4, 8).unwrap()).unwrap();
        let first: Vec<f64> = (0..20).map(|_| scalar(&est.estimate(&x).unwrap())).collect();
        est.reset(8);
        assert_eq!(est.data_passes(), 0.0);
        let again: Vec<f64> = (0..20).map(|_| scalar(&est.estimate(&x).unwrap())).collect();
        assert_eq!(first, again);
    }
}
