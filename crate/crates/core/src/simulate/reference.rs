use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algorithms::{operator_norms, run, Algorithm, OptimisationProblem, Schedule, Spdhg, SpdhgSteps};
use crate::algorithms::{DEFAULT_SAFETY, NORM_ITERATIONS};
use crate::array::{norm2, Image, Sinogram};
use crate::error::{Error, Result};
use crate::functions::{KLFunction, SmoothSum, TvRegulariser};
use crate::io;
use crate::operators::{Partition, Projector};
use crate::stochastic::Sampler;

/// KL data terms, one per partition cell, plus `alpha TV` with
/// nonnegativity.
pub fn kl_tv_problem(
    projector: &Projector,
    data: &Sinogram,
    partition: &Partition,
    background: f64,
    regulariser: TvRegulariser,
) -> Result<OptimisationProblem<KLFunction>> {
    let terms = partition
        .cells()
        .iter()
        .map(|cell| KLFunction::from_sinogram(projector.restrict(cell)?, &data.subset(cell)?, Some(background)))
        .collect::<Result<Vec<_>>>()?;
    OptimisationProblem::new(SmoothSum::new(terms)?, Box::new(regulariser)).with_partition(partition.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSettings {
    pub passes: f64,
    pub seed: u64,
    /// Multiplies every dual step and divides the primal step.
    pub dual_scale: f64,
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        Self { passes: 500.0, seed: 0x5EED, dual_scale: 1.0 }
    }
}

/// A benchmark optimum and how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub image: Image,
    pub objective: f64,
    pub provenance: Value,
}

impl Reference {
    pub fn save(&self, stem: &Path) -> Result<()> {
        io::write_image(stem, &self.image, self.provenance.clone())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let image = io::read_image(stem)?;
        let provenance = match io::read_header(stem)? {
            io::ArrayHeader::Image { provenance, .. } => provenance,
            _ => return Err(Error::ArrayFormat("reference is not an image".into())),
        };
        let objective = provenance
            .get("objective")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::ArrayFormat("reference provenance lacks the objective".into()))?;
        Ok(Self { image, objective, provenance })
    }
}

/// Runs SPDHG with uniform sampling and default steps for
/// `settings.passes` data passes from `x0`.
pub fn compute_reference(
    problem: &OptimisationProblem<KLFunction>,
    x0: Image,
    settings: &ReferenceSettings,
) -> Result<Reference> {
    if !(settings.dual_scale > 0.0) {
        return Err(Error::InvalidArgument("dual_scale must be positive".into()));
    }
    let n = problem.n();
    let norms = operator_norms(problem.smooth(), NORM_ITERATIONS, settings.seed);
    let steps = SpdhgSteps::from_norms(&norms, DEFAULT_SAFETY)?.scaled(settings.dual_scale);
    let sampler = Sampler::uniform(n, settings.seed)?;
    let mut alg = Spdhg::new(problem.smooth(), problem.regulariser(), sampler, steps.clone(), &norms, x0)?;
    let schedule = Schedule::new(settings.passes, settings.passes.max(1.0))?;
    run(&mut alg, &schedule, |_, _| Ok(()))?;
    let image = alg.iterate().clone();
    let objective = problem.objective(&image);
    let partition = problem.partition().map(|p| json!({"scheme": p.scheme(), "n_subsets": p.n_subsets()}));
    let provenance = json!({
        "algorithm": "spdhg",
        "passes": alg.data_passes(),
        "seed": settings.seed,
        "dual_scale": settings.dual_scale,
        "safety": DEFAULT_SAFETY,
        "norm_iterations": NORM_ITERATIONS,
        "operator_norms": norms,
        "sigma": steps.sigma,
        "tau": steps.tau,
        "partition": partition,
        "objective": objective,
        "norm": norm2(&image),
    });
    Ok(Reference { image, objective, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AcquisitionGeometry, ImageGeometry};
    use crate::operators::{partition_views, PartitionScheme};

    fn setup(alpha: f64) -> (OptimisationProblem<KLFunction>, Image) {
        let g = ImageGeometry::square(8).unwrap();
        let acq = AcquisitionGeometry::equiangular(12, 13, 1.0).unwrap();
        let p = Projector::new(&g, &acq);
        let truth = Image::filled(&g, 2.0);
        let data = p.forward_project(&truth).unwrap().values().iter().map(|v| v + 0.1).collect();
        let data = Sinogram::full(&acq, data).unwrap();
        let part = partition_views(12, 4, PartitionScheme::Equidistant).unwrap();
        let tv = TvRegulariser::new(alpha).unwrap();
        (kl_tv_problem(&p, &data, &part, 0.1, tv).unwrap(), truth)
    }

    #[test]
    fn noiseless_constant_phantom_is_recovered() {
        let (problem, truth) = setup(1e-6);
        let g = truth.geometry().clone();
        let settings = ReferenceSettings { passes: 300.0, ..Default::default() };
        let r = compute_reference(&problem, Image::filled(&g, 1.0), &settings).unwrap();
        let err = crate::array::distance(&r.image, &truth).unwrap() / norm2(&truth);
        assert!(err < 0.01, "relative error {err}");
    }

    #[test]
    fn deterministic_and_round_trips() {
        let (problem, truth) = setup(0.1);
        let g = truth.geometry().clone();
        let settings = ReferenceSettings { passes: 20.0, ..Default::default() };
        let a = compute_reference(&problem, Image::filled(&g, 1.0), &settings).unwrap();
        let b = compute_reference(&problem, Image::filled(&g, 1.0), &settings).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.provenance["passes"], json!(20.0));
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("reference");
        a.save(&stem).unwrap();
        assert_eq!(Reference::load(&stem).unwrap(), a);
    }
}
