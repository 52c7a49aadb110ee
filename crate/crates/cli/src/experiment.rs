//! The comparison protocol: simulate a scan, obtain the reference optimum,
//! warm start every solver with one pass of Prox-SGD, run each solver on a
//! data-pass schedule and log its distance to the optimum.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use recon_core::algorithms::{
    default_gamma, operator_norms, run, Algorithm, OptimisationProblem, ProximalGradient, Schedule, Spdhg, SpdhgSteps,
    StepSizeRule, DEFAULT_SAFETY, NORM_ITERATIONS,
};
use recon_core::array::{distance, Image, Sinogram};
use recon_core::functions::{KLFunction, TvRegulariser};
use recon_core::geometry::{AcquisitionGeometry, ImageGeometry};
use recon_core::io;
use recon_core::operators::{partition_views, Projector};
use recon_core::simulate::{compute_reference, kl_tv_problem, make_phantom, simulate_acquisition, AcquisitionSim};
use recon_core::simulate::{Reference, ReferenceSettings};
use recon_core::stochastic::{Estimator, EstimatorKind, FullGradient, GradientSource, Sampler, TableInit};
use serde_json::{json, Value};

use crate::config::TableInitName;
use crate::config::{AlgorithmName, EstimatorName, ExperimentConfig, Gamma, RuleKind, SolverConfig, StepConfig};
use crate::error::{CliError, Result};
use crate::metrics::{write_csv, RunRecord};
use crate::plot::{render, Series};

/// A simulated scan and the reconstruction problem built from it.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub phantom: Image,
    pub projector: Projector,
    pub data: Sinogram,
    pub problem: OptimisationProblem<KLFunction>,
    lipschitz: OnceLock<Vec<f64>>,
}

/// The outcome of one solver.
#[derive(Clone, Debug)]
pub struct SolverRun {
    pub id: String,
    pub records: Vec<RunRecord>,
    pub image: Image,
    pub provenance: Value,
}

impl Experiment {
    pub fn build(config: ExperimentConfig) -> Result<Self> {
        let p = &config.problem;
        let phantom = make_phantom(&config.phantom())?;
        let image = ImageGeometry::square(p.image_size)?;
        let spacing = p.detector_spacing.expect("materialised");
        let acquisition = AcquisitionGeometry::equiangular(p.views, p.bins, spacing)?;
        let projector = Projector::new(&image, &acquisition);
        let sim = AcquisitionSim {
            counts_scale: p.counts_scale,
            background: p.background,
            seed: p.simulation_seed.expect("materialised"),
        };
        let data = simulate_acquisition(&phantom, &projector, &sim)?;
        let partition = partition_views(p.views, p.n_subsets, p.partition)?;
        let tv = TvRegulariser::with_solver(p.alpha, p.tv_inner_iterations, p.tv_inner_tolerance, true)?;
        // the model sees counts in units of the phantom scale
        let model_background = p.model_background.expect("materialised") / p.counts_scale;
        let scaled = Sinogram::full(&acquisition, data.values().iter().map(|v| v / p.counts_scale).collect())?;
        let problem = kl_tv_problem(&projector, &scaled, &partition, model_background, tv)?;
        Ok(Self { config, phantom, projector, data, problem, lipschitz: OnceLock::new() })
    }

    pub fn output_dir(&self) -> &Path {
        &self.config.output_dir
    }

    pub fn initial_image(&self) -> Image {
        Image::filled(self.phantom.geometry(), self.config.warm_start.initial_value)
    }

    /// Lipschitz bounds of the subset terms, computed once.
    pub fn lipschitz(&self) -> Result<&[f64]> {
        if self.lipschitz.get().is_none() {
            let values = self.problem.smooth().lipschitz_constants()?;
            let _ = self.lipschitz.set(values);
        }
        Ok(self.lipschitz.get().expect("set above"))
    }

    /// Turns a configured step into a rule, resolving `"auto"` with the
    /// Lipschitz-based default for the given kind of gradient source.
    pub fn resolve_step(&self, step: &StepConfig, stochastic: bool) -> Result<StepSizeRule> {
        let gamma0 = match step.gamma0 {
            Gamma::Value(g) => g,
            Gamma::Auto => default_gamma(self.lipschitz()?, stochastic)?,
        };
        Ok(match step.rule {
            RuleKind::Constant => StepSizeRule::constant(gamma0)?,
            RuleKind::Decreasing => StepSizeRule::decreasing(gamma0, step.exponent.unwrap_or(0.0))?,
        })
    }

    /// Files written by `simulate`: the phantom and the counts.
    pub fn write_data(&self) -> Result<()> {
        let dir = self.output_dir().join("data");
        create_dir(&dir)?;
        let provenance = json!({"problem": self.problem_fingerprint()});
        io::write_image(&dir.join("phantom"), &self.phantom, provenance.clone())?;
        io::write_sinogram(&dir.join("sinogram"), &self.data, provenance)?;
        Ok(())
    }

    fn problem_fingerprint(&self) -> Value {
        serde_json::to_value(&self.config.problem).expect("problem config serialises")
    }

    fn reference_settings(&self) -> ReferenceSettings {
        let r = &self.config.reference;
        ReferenceSettings {
            passes: r.passes,
            seed: r.seed.expect("materialised"),
            dual_scale: r.dual_scale.expect("materialised"),
        }
    }

    /// Loads the stored reference when it was computed for this problem and
    /// these settings; otherwise computes and stores it, if allowed.
    pub fn reference(&self) -> Result<Reference> {
        let path = self.config.reference_path();
        let settings = self.reference_settings();
        let fingerprint = self.problem_fingerprint();
        if io::header_path(&path).exists() {
            if let Ok(stored) = Reference::load(&path) {
                let prov = &stored.provenance;
                let matches = prov.get("problem") == Some(&fingerprint)
                    && prov.get("seed") == Some(&json!(settings.seed))
                    && prov.get("requested_passes") == Some(&json!(settings.passes))
                    && prov.get("dual_scale") == Some(&json!(settings.dual_scale))
                    && prov.get("initial_value") == Some(&json!(self.config.warm_start.initial_value));
                if matches {
                    return Ok(stored);
                }
            }
        }
        if !self.config.reference.compute {
            return Err(CliError::NoReference(path));
        }
        let mut reference = compute_reference(&self.problem, self.initial_image(), &settings)?;
        let prov = reference.provenance.as_object_mut().expect("provenance is an object");
        prov.insert("problem".into(), fingerprint);
        prov.insert("requested_passes".into(), json!(settings.passes));
        prov.insert("initial_value".into(), json!(self.config.warm_start.initial_value));
        if let Some(parent) = path.parent() {
            create_dir(parent)?;
        }
        reference.save(&path)?;
        Ok(reference)
    }

    /// One run of Prox-SGD (ISTA with the SGD estimator) from the constant
    /// initial image for `warm_start.passes` data passes.
    pub fn warm_start(&self) -> Result<Image> {
        let w = &self.config.warm_start;
        let x0 = self.initial_image();
        if w.passes == 0.0 {
            return Ok(x0);
        }
        let rule = self.resolve_step(w.step.as_ref().expect("materialised"), true)?;
        let n = self.problem.n();
        let sampler = Sampler::uniform(n, w.seed.expect("materialised"))?;
        let source = Estimator::new(EstimatorKind::Sgd, self.problem.smooth(), sampler)?;
        let mut alg = ProximalGradient::ista(self.problem.regulariser(), source, rule, x0);
        run(&mut alg, &Schedule::new(w.passes, w.passes)?, |_, _| Ok(()))?;
        Ok(alg.iterate().clone())
    }

    /// Runs one solver from `warm` and logs metrics against `reference`.
    /// The first record is the constant initial image at zero passes; the
    /// warm start's passes are included in every later record.
    pub fn run_solver(&self, solver: &SolverConfig, warm: &Image, reference: &Reference) -> Result<SolverRun> {
        let offset = self.config.warm_start.passes;
        let schedule = Schedule::new(solver.max_passes, solver.callback_interval)?.with_offset(offset);
        let seed = solver.seed.expect("materialised");
        let n = self.problem.n();
        let mut records = Vec::new();
        let record = |passes: f64, x: &Image, start: &Instant| -> recon_core::error::Result<RunRecord> {
            Ok(RunRecord {
                solver: solver.id.clone(),
                data_passes: passes,
                iterate_distance: distance(x, &reference.image)?,
                objective_gap: self.problem.objective(x) - reference.objective,
                wall_seconds: start.elapsed().as_secs_f64(),
            })
        };
        let start = Instant::now();
        if offset > 0.0 {
            records.push(record(0.0, &self.initial_image(), &start)?);
        }
        let mut details = json!({
            "id": solver.id,
            "algorithm": solver.algorithm,
            "seed": seed,
            "warm_start_passes": offset,
            "max_passes": solver.max_passes,
            "callback_interval": solver.callback_interval,
        });
        let mut algorithm: Box<dyn Algorithm + '_> = match solver.algorithm {
            AlgorithmName::Spdhg => {
                let norms = operator_norms(self.problem.smooth(), NORM_ITERATIONS, seed);
                let scale = solver.dual_scale.expect("materialised");
                let steps = SpdhgSteps::from_norms(&norms, DEFAULT_SAFETY)?.scaled(scale);
                details["dual_scale"] = json!(scale);
                details["tau"] = json!(steps.tau);
                details["sigma"] = json!(steps.sigma);
                let sampler = Sampler::uniform(n, seed)?;
                Box::new(Spdhg::new(
                    self.problem.smooth(),
                    self.problem.regulariser(),
                    sampler,
                    steps,
                    &norms,
                    warm.clone(),
                )?)
            }
            algorithm => {
                let estimator = solver.estimator.expect("materialised");
                let stochastic = estimator != EstimatorName::Full;
                let rule = self.resolve_step(solver.step.as_ref().expect("materialised"), stochastic)?;
                details["estimator"] = json!(estimator);
                details["step"] = serde_json::to_value(rule)?;
                let source = self.source(solver, estimator, warm, &mut details)?;
                let reg = self.problem.regulariser();
                match algorithm {
                    AlgorithmName::Gd => Box::new(ProximalGradient::gd(source, rule, warm.clone())),
                    AlgorithmName::Ista => Box::new(ProximalGradient::ista(reg, source, rule, warm.clone())),
                    AlgorithmName::Fista => Box::new(ProximalGradient::fista(reg, source, rule, warm.clone())),
                    AlgorithmName::Spdhg => unreachable!("handled above"),
                }
            }
        };
        run(algorithm.as_mut(), &schedule, |passes, alg| {
            records.push(record(passes, alg.iterate(), &start)?);
            Ok(())
        })?;
        details["iterations"] = json!(algorithm.iteration());
        details["final_passes"] = json!(offset + algorithm.data_passes());
        Ok(SolverRun { id: solver.id.clone(), records, image: algorithm.iterate().clone(), provenance: details })
    }

    fn source(
        &self,
        solver: &SolverConfig,
        estimator: EstimatorName,
        warm: &Image,
        details: &mut Value,
    ) -> Result<Box<dyn GradientSource + '_>> {
        let sum = self.problem.smooth();
        let kind = match estimator {
            EstimatorName::Full => return Ok(Box::new(FullGradient::new(sum))),
            EstimatorName::Sgd => EstimatorKind::Sgd,
            EstimatorName::Sag => EstimatorKind::Sag,
            EstimatorName::Saga => EstimatorKind::Saga,
            EstimatorName::Svrg => EstimatorKind::Svrg,
            EstimatorName::Lsvrg => EstimatorKind::Lsvrg,
        };
        let sampler = Sampler::uniform(self.problem.n(), solver.seed.expect("materialised"))?;
        let mut est = Estimator::new(kind, sum, sampler)?;
        if let Some(m) = solver.update_frequency {
            est = est.with_update_frequency(m)?;
            details["update_frequency"] = json!(m);
        }
        if let Some(q) = solver.snapshot_probability {
            est = est.with_snapshot_probability(q)?;
            details["snapshot_probability"] = json!(q);
        }
        if let Some(init) = solver.table_init {
            let mode = match init {
                TableInitName::FullPass => TableInit::FullPass,
                TableInitName::Zeros => TableInit::Zeros,
            };
            est.initialize_table(warm, mode)?;
            details["table_init"] = json!(init);
        }
        Ok(Box::new(est))
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Paths of the per-solver outputs inside the output directory.
pub fn metrics_path(dir: &Path, id: &str) -> PathBuf {
    dir.join("metrics").join(format!("{id}.csv"))
}

/// Runs the selected solvers (all when `only` is `None`) concurrently and
/// writes their metric tables, final images and run descriptions.
pub fn solve(experiment: &Experiment, only: Option<&str>) -> Result<Vec<SolverRun>> {
    let dir = experiment.output_dir().to_path_buf();
    let solvers: Vec<&SolverConfig> =
        experiment.config.solvers.iter().filter(|s| only.is_none_or(|id| s.id == id)).collect();
    if let Some(id) = only {
        if solvers.is_empty() {
            return Err(CliError::Config(format!("no solver with id \"{id}\"")));
        }
    }
    create_dir(&dir)?;
    write_text(&dir.join("config.toml"), &experiment.config.to_toml_string())?;
    let reference = experiment.reference()?;
    if solvers.is_empty() {
        return Ok(Vec::new());
    }
    let warm = experiment.warm_start()?;
    // resolve the shared bounds before the threads need them
    if solvers.iter().any(|s| s.step.is_some_and(|st| st.gamma0 == Gamma::Auto)) {
        experiment.lipschitz()?;
    }
    let runs: Vec<SolverRun> =
        solvers.par_iter().map(|s| experiment.run_solver(s, &warm, &reference)).collect::<Result<_>>()?;
    for sub in ["metrics", "images", "runs"] {
        create_dir(&dir.join(sub))?;
    }
    for r in &runs {
        write_csv(&metrics_path(&dir, &r.id), &r.records)?;
        io::write_image(&dir.join("images").join(&r.id), &r.image, r.provenance.clone())?;
        let text = serde_json::to_string_pretty(&r.provenance)? + "\n";
        write_text(&dir.join("runs").join(format!("{}.json", r.id)), &text)?;
    }
    Ok(runs)
}

/// Writes the distance and objective-gap plots for the given tables.
/// Returns a warning for every table that had nothing to draw.
pub fn emit_plots(dir: &Path, tables: &[(String, Vec<RunRecord>)]) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    let mut distance = Vec::new();
    let mut gap = Vec::new();
    for (id, rows) in tables {
        if rows.is_empty() {
            warnings.push(format!("table for solver \"{id}\" is empty; skipped"));
            continue;
        }
        distance.push(Series {
            name: id.clone(),
            points: rows.iter().map(|r| (r.data_passes, r.iterate_distance)).collect(),
        });
        gap.push(Series { name: id.clone(), points: rows.iter().map(|r| (r.data_passes, r.objective_gap)).collect() });
    }
    let plots = dir.join("plots");
    create_dir(&plots)?;
    let pairs = [
        ("iterate_distance.svg", "Distance to the reference solution", "|x_k - x*|", distance),
        ("objective_gap.svg", "Objective gap to the reference solution", "F(x_k) - F(x*)", gap),
    ];
    for (file, title, label, series) in pairs {
        if let Some(svg) = render(title, "data passes", label, &series) {
            write_text(&plots.join(file), &svg)?;
        }
    }
    Ok(warnings)
}

/// The full pipeline: reference, warm start, every solver, tables and
/// plots.
pub fn compare(experiment: &Experiment) -> Result<(Vec<SolverRun>, Vec<String>)> {
    let runs = solve(experiment, None)?;
    if runs.is_empty() {
        return Ok((runs, Vec::new()));
    }
    let tables: Vec<(String, Vec<RunRecord>)> = runs.iter().map(|r| (r.id.clone(), r.records.clone())).collect();
    let warnings = emit_plots(experiment.output_dir(), &tables)?;
    Ok((runs, warnings))
}

/// Plots from metric tables already on disk, in configuration order.
pub fn plot_from_disk(config: &ExperimentConfig) -> Result<Vec<String>> {
    let dir = &config.output_dir;
    let mut tables = Vec::new();
    for s in &config.solvers {
        let path = metrics_path(dir, &s.id);
        if path.exists() {
            tables.push((s.id.clone(), crate::metrics::read_csv(&path)?));
        }
    }
    if tables.is_empty() {
        return Err(CliError::Config(format!("no metric tables under {}", dir.join("metrics").display())));
    }
    emit_plots(dir, &tables)
}

/// Sum of the Lipschitz bounds and the step defaults, for reports.
pub fn step_defaults(experiment: &Experiment) -> Result<Value> {
    let l = experiment.lipschitz()?;
    Ok(json!({
        "lipschitz_sum": l.iter().sum::<f64>(),
        "lipschitz_max": l.iter().cloned().fold(0.0, f64::max),
        "deterministic_gamma": default_gamma(l, false)?,
        "stochastic_gamma": default_gamma(l, true)?,
        "smooth_value_at_start": experiment.problem.smooth().value(&experiment.initial_image()),
    }))
}
