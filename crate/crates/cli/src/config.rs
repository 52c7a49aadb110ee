//! Experiment configuration: a TOML file describing the simulated problem,
//! the reference solve, the warm start and the list of solvers.
//!
//! [`parse_config`] validates everything and fills in every default, so the
//! returned value (and its serialisation) records the complete recipe.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use recon_core::operators::PartitionScheme;
use recon_core::rng::RngState;
use recon_core::simulate::{Ellipse, PhantomSpec};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{CliError, Result};

macro_rules! positive {
    ($name:ident, $field:literal) => {
        fn $name<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
            let v = f64::deserialize(d)?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(de::Error::custom(format!("{} must be positive, got {v}", $field)))
            }
        }
    };
}

positive!(positive_alpha, "alpha");
positive!(positive_counts_scale, "counts_scale");
positive!(positive_passes, "passes");
positive!(positive_interval, "callback_interval");

fn nonneg_passes<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(de::Error::custom(format!("max_passes must be >= 0, got {v}")))
    }
}

fn background<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(de::Error::custom(format!("background must be positive, got {v}")))
    }
}

fn optional_background<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    background(d).map(Some)
}

fn optional_dual_scale<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    let v = f64::deserialize(d)?;
    if v > 0.0 && v.is_finite() {
        Ok(Some(v))
    } else {
        Err(de::Error::custom(format!("dual_scale must be positive, got {v}")))
    }
}

fn optional_probability<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
    let v = f64::deserialize(d)?;
    if v > 0.0 && v <= 1.0 {
        Ok(Some(v))
    } else {
        Err(de::Error::custom(format!("snapshot_probability must be in (0, 1], got {v}")))
    }
}

/// A step size `gamma0`: a positive number, or `"auto"` for the
/// Lipschitz-based default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gamma {
    Auto,
    Value(f64),
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Auto => s.serialize_str("auto"),
            Self::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct GammaVisitor;

        impl Visitor<'_> for GammaVisitor {
            type Value = Gamma;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or \"auto\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Gamma, E> {
                if v > 0.0 && v.is_finite() {
                    Ok(Gamma::Value(v))
                } else {
                    Err(E::custom(format!("gamma0 must be positive, got {v}")))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Gamma, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Gamma, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Gamma, E> {
                if v == "auto" {
                    Ok(Gamma::Auto)
                } else {
                    Err(E::custom(format!("gamma0 must be a positive number or \"auto\", got \"{v}\"")))
                }
            }
        }

        d.deserialize_any(GammaVisitor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Constant,
    Decreasing,
}

/// `gamma_k = gamma0` or `gamma0 / (1 + k)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub rule: RuleKind,
    pub gamma0: Gamma,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

impl StepConfig {
    pub fn auto() -> Self {
        Self { rule: RuleKind::Constant, gamma0: Gamma::Auto, exponent: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmName {
    Gd,
    Ista,
    Fista,
    Spdhg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorName {
    Full,
    Sgd,
    Sag,
    Saga,
    Svrg,
    Lsvrg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableInitName {
    FullPass,
    Zeros,
}

fn default_seed() -> u64 {
    2024
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub warm_start: WarmStartConfig,
    #[serde(default, rename = "solver", skip_serializing_if = "Vec::is_empty")]
    pub solvers: Vec<SolverConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "defaults::image_size")]
    pub image_size: usize,
    #[serde(default = "defaults::views")]
    pub views: usize,
    #[serde(default = "defaults::bins")]
    pub bins: usize,
    /// Defaults to `image_size * sqrt(2) / bins`, so the detector covers
    /// the image diagonal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector_spacing: Option<f64>,
    #[serde(default = "defaults::counts_scale", deserialize_with = "positive_counts_scale")]
    pub counts_scale: f64,
    /// Constant background added to every expected count in the simulation.
    #[serde(default = "defaults::background", deserialize_with = "background")]
    pub background: f64,
    /// Background assumed by the reconstruction model; defaults to
    /// `background`.
    #[serde(default, deserialize_with = "optional_background", skip_serializing_if = "Option::is_none")]
    pub model_background: Option<f64>,
    #[serde(default = "defaults::alpha", deserialize_with = "positive_alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::n_subsets")]
    pub n_subsets: usize,
    #[serde(default = "defaults::partition")]
    pub partition: PartitionScheme,
    #[serde(default = "defaults::tv_inner_iterations")]
    pub tv_inner_iterations: usize,
    #[serde(default = "defaults::tv_inner_tolerance")]
    pub tv_inner_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation_seed: Option<u64>,
    /// Phantom ellipses; defaults to the thorax phantom.
    #[serde(default, rename = "ellipse", skip_serializing_if = "Option::is_none")]
    pub ellipses: Option<Vec<Ellipse>>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        toml::from_str("").expect("all problem fields have defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Compute the reference when no matching stored one exists.
    #[serde(default = "defaults::yes")]
    pub compute: bool,
    #[serde(default = "defaults::reference_passes", deserialize_with = "positive_passes")]
    pub passes: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, deserialize_with = "optional_dual_scale", skip_serializing_if = "Option::is_none")]
    pub dual_scale: Option<f64>,
    /// File stem of the stored reference; defaults to
    /// `<output_dir>/reference`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        toml::from_str("").expect("all reference fields have defaults")
    }
}

/// One data pass of Prox-SGD shared by every solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmStartConfig {
    #[serde(default = "defaults::warm_passes", deserialize_with = "nonneg_passes")]
    pub passes: f64,
    /// Value of the constant initial image.
    #[serde(default = "defaults::initial_value")]
    pub initial_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for WarmStartConfig {
    fn default() -> Self {
        toml::from_str("").expect("all warm start fields have defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub id: String,
    pub algorithm: AlgorithmName,
    /// Gradient source for gd/ista/fista; must be absent for spdhg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepConfig>,
    /// SVRG snapshot period in estimate calls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_frequency: Option<usize>,
    /// LSVRG snapshot probability.
    #[serde(default, deserialize_with = "optional_probability", skip_serializing_if = "Option::is_none")]
    pub snapshot_probability: Option<f64>,
    /// SAG/SAGA table initialisation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_init: Option<TableInitName>,
    /// SPDHG dual step multiplier.
    #[serde(default, deserialize_with = "optional_dual_scale", skip_serializing_if = "Option::is_none")]
    pub dual_scale: Option<f64>,
    #[serde(default = "defaults::max_passes", deserialize_with = "nonneg_passes")]
    pub max_passes: f64,
    #[serde(default = "defaults::interval", deserialize_with = "positive_interval")]
    pub callback_interval: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

mod defaults {
    use recon_core::operators::PartitionScheme;

    pub fn image_size() -> usize {
        64
    }
    pub fn views() -> usize {
        90
    }
    pub fn bins() -> usize {
        95
    }
    pub fn counts_scale() -> f64 {
        0.75
    }
    pub fn background() -> f64 {
        1.0
    }
    pub fn alpha() -> f64 {
        0.1
    }
    pub fn n_subsets() -> usize {
        32
    }
    pub fn partition() -> PartitionScheme {
        PartitionScheme::Equidistant
    }
    pub fn tv_inner_iterations() -> usize {
        100
    }
    pub fn tv_inner_tolerance() -> f64 {
        1e-6
    }
    pub fn yes() -> bool {
        true
    }
    pub fn reference_passes() -> f64 {
        500.0
    }
    pub fn warm_passes() -> f64 {
        1.0
    }
    pub fn initial_value() -> f64 {
        1.0
    }
    pub fn max_passes() -> f64 {
        100.0
    }
    pub fn interval() -> f64 {
        1.0
    }
}

/// Seed streams derived from the experiment seed.
mod streams {
    pub const SIMULATION: u64 = 1;
    pub const REFERENCE: u64 = 2;
    pub const WARM_START: u64 = 3;
    pub const SOLVER: u64 = 100;
}

fn derived_seed(seed: u64, stream: u64) -> u64 {
    RngState::derive(seed, stream).next_u64()
}

impl ExperimentConfig {
    pub fn n_subsets(&self) -> usize {
        self.problem.n_subsets
    }

    pub fn phantom(&self) -> PhantomSpec {
        match &self.problem.ellipses {
            Some(ellipses) => PhantomSpec { size: self.problem.image_size, ellipses: ellipses.clone() },
            None => PhantomSpec::thorax(self.problem.image_size),
        }
    }

    pub fn reference_path(&self) -> PathBuf {
        self.reference.path.clone().unwrap_or_else(|| self.output_dir.join("reference"))
    }

    pub fn solver(&self, id: &str) -> Option<&SolverConfig> {
        self.solvers.iter().find(|s| s.id == id)
    }

    /// Fills every unset field with its default. Idempotent.
    pub fn materialize(&mut self) {
        let seed = self.seed;
        let n = self.problem.n_subsets;
        let p = &mut self.problem;
        p.detector_spacing.get_or_insert(p.image_size as f64 * std::f64::consts::SQRT_2 / p.bins.max(1) as f64);
        p.model_background.get_or_insert(p.background);
        p.simulation_seed.get_or_insert(derived_seed(seed, streams::SIMULATION));
        if p.ellipses.is_none() {
            p.ellipses = Some(PhantomSpec::thorax(p.image_size).ellipses);
        }
        let r = &mut self.reference;
        r.seed.get_or_insert(derived_seed(seed, streams::REFERENCE));
        r.dual_scale.get_or_insert(1.0);
        if r.path.is_none() {
            r.path = Some(self.output_dir.join("reference"));
        }
        let w = &mut self.warm_start;
        w.step.get_or_insert(StepConfig::auto());
        w.seed.get_or_insert(derived_seed(seed, streams::WARM_START));
        for (k, s) in self.solvers.iter_mut().enumerate() {
            s.seed.get_or_insert(derived_seed(seed, streams::SOLVER + k as u64));
            if s.algorithm == AlgorithmName::Spdhg {
                s.dual_scale.get_or_insert(1.0);
                continue;
            }
            let estimator = *s.estimator.get_or_insert(EstimatorName::Full);
            s.step.get_or_insert(StepConfig::auto());
            match estimator {
                EstimatorName::Sag | EstimatorName::Saga => {
                    s.table_init.get_or_insert(TableInitName::FullPass);
                }
                EstimatorName::Svrg => {
                    s.update_frequency.get_or_insert(2 * n);
                }
                EstimatorName::Lsvrg => {
                    s.snapshot_probability.get_or_insert(1.0 / n as f64);
                }
                _ => {}
            }
        }
    }

    /// Cross-field checks; each failure names the offending key.
    fn validate(&self) -> std::result::Result<(), (Location, String)> {
        let p = &self.problem;
        let at = |key: &'static str| Location { table: "problem", index: 0, key };
        if p.image_size == 0 {
            return Err((at("image_size"), "problem.image_size must be positive".into()));
        }
        if p.views == 0 || p.bins == 0 {
            return Err((
                at(if p.views == 0 { "views" } else { "bins" }),
                "problem.views and problem.bins must be positive".into(),
            ));
        }
        if p.n_subsets == 0 || p.n_subsets > p.views {
            return Err((
                at("n_subsets"),
                format!("problem.n_subsets must be in 1..={}, got {}", p.views, p.n_subsets),
            ));
        }
        if let Some(d) = p.detector_spacing {
            if !(d > 0.0 && d.is_finite()) {
                return Err((at("detector_spacing"), format!("problem.detector_spacing must be positive, got {d}")));
            }
        }
        if p.tv_inner_iterations == 0 {
            return Err((at("tv_inner_iterations"), "problem.tv_inner_iterations must be positive".into()));
        }
        if !(p.tv_inner_tolerance >= 0.0) {
            return Err((at("tv_inner_tolerance"), "problem.tv_inner_tolerance must be >= 0".into()));
        }
        if let Some(ellipses) = &p.ellipses {
            let spec = PhantomSpec { size: p.image_size, ellipses: ellipses.clone() };
            if let Err(e) = spec.validate() {
                return Err((at("ellipse"), format!("problem.ellipse: {e}")));
            }
        }
        if !(self.warm_start.initial_value > 0.0) {
            let loc = Location { table: "warm_start", index: 0, key: "initial_value" };
            return Err((loc, "warm_start.initial_value must be positive".into()));
        }
        if let Some(step) = &self.warm_start.step {
            check_step(step).map_err(|m| {
                (Location { table: "warm_start", index: 0, key: "step" }, format!("warm_start.step: {m}"))
            })?;
        }
        let mut ids = HashSet::new();
        for (k, s) in self.solvers.iter().enumerate() {
            let at = |key: &'static str| Location { table: "solver", index: k, key };
            let name = format!("solver[{k}] ({})", s.id);
            let allowed = |c: char| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.');
            if s.id.is_empty() || s.id.starts_with('.') || !s.id.chars().all(allowed) {
                return Err((
                    at("id"),
                    format!("{name}: id must use only letters, digits, '-', '_' and '.', and not start with '.'"),
                ));
            }
            if !ids.insert(s.id.as_str()) {
                return Err((at("id"), format!("{name}: duplicate solver id")));
            }
            let spdhg = s.algorithm == AlgorithmName::Spdhg;
            if spdhg {
                for (set, key) in [
                    (s.estimator.is_some(), "estimator"),
                    (s.step.is_some(), "step"),
                    (s.update_frequency.is_some(), "update_frequency"),
                    (s.snapshot_probability.is_some(), "snapshot_probability"),
                    (s.table_init.is_some(), "table_init"),
                ] {
                    if set {
                        return Err((at(key), format!("{name}: spdhg takes no {key}")));
                    }
                }
            } else if s.dual_scale.is_some() {
                return Err((at("dual_scale"), format!("{name}: dual_scale applies to spdhg only")));
            }
            let est = s.estimator;
            if s.update_frequency.is_some() && est != Some(EstimatorName::Svrg) {
                return Err((
                    at("update_frequency"),
                    format!("{name}: update_frequency applies to the svrg estimator only"),
                ));
            }
            if s.update_frequency == Some(0) {
                return Err((at("update_frequency"), format!("{name}: update_frequency must be positive")));
            }
            if s.snapshot_probability.is_some() && est != Some(EstimatorName::Lsvrg) {
                return Err((
                    at("snapshot_probability"),
                    format!("{name}: snapshot_probability applies to the lsvrg estimator only"),
                ));
            }
            if s.table_init.is_some() && !matches!(est, Some(EstimatorName::Sag | EstimatorName::Saga)) {
                return Err((
                    at("table_init"),
                    format!("{name}: table_init applies to the sag and saga estimators only"),
                ));
            }
            if let Some(step) = &s.step {
                check_step(step).map_err(|m| (at("step"), format!("{name}: step: {m}")))?;
            }
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

fn check_step(step: &StepConfig) -> std::result::Result<(), String> {
    match (step.rule, step.exponent) {
        (RuleKind::Constant, Some(_)) => Err("exponent applies to the decreasing rule only".into()),
        (RuleKind::Decreasing, None) => Err("the decreasing rule needs an exponent".into()),
        (RuleKind::Decreasing, Some(e)) if !(e >= 0.0 && e.is_finite()) => {
            Err(format!("exponent must be >= 0, got {e}"))
        }
        _ => Ok(()),
    }
}

/// Where a key lives: `table` is a top-level table name, `index` selects
/// among `[[table]]` entries.
struct Location {
    table: &'static str,
    index: usize,
    key: &'static str,
}

impl Location {
    /// 1-based line of the key in `text`, or of its table header when the
    /// key is absent (defaults).
    fn line(&self, text: &str) -> Option<usize> {
        let nested = format!("{}.{}", self.table, self.key);
        let mut current: Option<(String, usize)> = None;
        let mut counts = std::collections::HashMap::<String, usize>::new();
        let mut header = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let (name, array) = if let Some(rest) = line.strip_prefix("[[") {
                (rest.split("]]").next(), true)
            } else if let Some(rest) = line.strip_prefix('[') {
                (rest.split(']').next(), false)
            } else {
                (None, false)
            };
            if let Some(name) = name {
                let name = name.trim().to_string();
                if name == nested {
                    return Some(n + 1);
                }
                let index = if array {
                    let count = counts.entry(name.clone()).or_insert(0);
                    *count += 1;
                    *count - 1
                } else {
                    0
                };
                if name == self.table && index == self.index && header.is_none() {
                    header = Some(n + 1);
                }
                current = Some((name, index));
                continue;
            }
            let Some((key, _)) = line.split_once('=') else { continue };
            let in_table = current.as_ref().is_some_and(|(t, i)| t == self.table && *i == self.index);
            if in_table && key.trim().split('.').next().map(str::trim) == Some(self.key) {
                return Some(n + 1);
            }
        }
        header
    }
}

fn line_of_offset(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, col)
}

/// Command-line replacements applied before defaults are filled in.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// Parses, validates and materialises a configuration, applying
/// `overrides` first so derived seeds and paths follow them.
pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().trim().to_string();
        match e.span() {
            Some(span) => {
                let (line, col) = line_of_offset(text, span.start);
                CliError::Config(format!("line {line}, column {col}: {message}"))
            }
            None => CliError::Config(message),
        }
    })?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(dir) = &overrides.output_dir {
        config.output_dir = dir.clone();
    }
    config.validate().map_err(|(loc, message)| match loc.line(text) {
        Some(line) => CliError::Config(format!("line {line}: {message}")),
        None => CliError::Config(message),
    })?;
    config.materialize();
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with(text, &Overrides::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str) -> String {
        match parse_config(text) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_materialises_defaults() {
        let c = parse_config("[[solver]]\nid = \"a\"\nalgorithm = \"ista\"\nestimator = \"svrg\"\n\n[[solver]]\nid = \"b\"\nalgorithm = \"ista\"\nestimator = \"lsvrg\"\n").unwrap();
        assert_eq!(c.problem.n_subsets, 32);
        assert_eq!(c.problem.alpha, 0.1);
        assert_eq!(c.solvers[0].update_frequency, Some(64));
        assert_eq!(c.solvers[1].snapshot_probability, Some(1.0 / 32.0));
        assert_eq!(c.solvers[0].step, Some(StepConfig::auto()));
        assert_eq!(c.problem.model_background, Some(c.problem.background));
        assert!(c.problem.ellipses.is_some());
        assert!(c.reference.seed.is_some() && c.warm_start.seed.is_some());
        assert_ne!(c.solvers[0].seed, c.solvers[1].seed);
        let empty = parse_config("").unwrap();
        assert!(empty.solvers.is_empty());
    }

    #[test]
    fn round_trip() {
        let text = "seed = 9\n[problem]\nalpha = 0.3\n[[solver]]\nid = \"f\"\nalgorithm = \"fista\"\nstep = { rule = \"decreasing\", gamma0 = 0.5, exponent = 0.5 }\n[[solver]]\nid = \"p\"\nalgorithm = \"spdhg\"\n";
        let a = parse_config(text).unwrap();
        let b = parse_config(&a.to_toml_string()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_toml_string(), b.to_toml_string());
    }

    #[test]
    fn negative_alpha_is_reported_with_its_line() {
        let m = err("seed = 1\n\n[problem]\nalpha = -0.1\n");
        assert!(m.contains("line 4") && m.contains("alpha"), "{m}");
    }

    #[test]
    fn unknown_names_are_rejected() {
        let m = err("[problem]\nalpah = 0.1\n");
        assert!(m.contains("line 2") && m.contains("alpah"), "{m}");
        let m = err("[[solver]]\nid = \"x\"\nalgorithm = \"adam\"\n");
        assert!(m.contains("line 3") && m.contains("adam"), "{m}");
        let m = err("[[solver]]\nid = \"x\"\nalgorithm = \"ista\"\nestimator = \"sarah\"\n");
        assert!(m.contains("line 4"), "{m}");
    }

    #[test]
    fn gamma_validation() {
        let m = err("[[solver]]\nid = \"x\"\nalgorithm = \"ista\"\nstep = { rule = \"constant\", gamma0 = 0 }\n");
        assert!(m.contains("line 4") && m.contains("gamma0"), "{m}");
        let m = err("[[solver]]\nid = \"x\"\nalgorithm = \"ista\"\nstep = { rule = \"constant\", gamma0 = \"big\" }\n");
        assert!(m.contains("gamma0"), "{m}");
        let c =
            parse_config("[[solver]]\nid = \"x\"\nalgorithm = \"ista\"\nstep = { rule = \"constant\", gamma0 = 2 }\n")
                .unwrap();
        assert_eq!(c.solvers[0].step.unwrap().gamma0, Gamma::Value(2.0));
    }

    #[test]
    fn cross_field_errors_name_the_key() {
        let m = err("[problem]\nviews = 10\nn_subsets = 11\n");
        assert!(m.contains("line 3") && m.contains("n_subsets"), "{m}");
        let m = err("[[solver]]\nid = \"a\"\nalgorithm = \"ista\"\n\n[[solver]]\nid = \"b\"\nalgorithm = \"spdhg\"\nestimator = \"sgd\"\n");
        assert!(m.contains("line 8") && m.contains("estimator"), "{m}");
        let m = err("[[solver]]\nid = \"a\"\nalgorithm = \"ista\"\nestimator = \"sgd\"\nupdate_frequency = 3\n");
        assert!(m.contains("line 5") && m.contains("update_frequency"), "{m}");
        let m = err("[[solver]]\nid = \"a\"\nalgorithm = \"ista\"\n[[solver]]\nid = \"a\"\nalgorithm = \"fista\"\n");
        assert!(m.contains("duplicate"), "{m}");
        let m = err("[[solver]]\nid = \"a\"\nalgorithm = \"ista\"\nstep = { rule = \"decreasing\", gamma0 = 1.0 }\n");
        assert!(m.contains("line 4") && m.contains("exponent"), "{m}");
    }

    #[test]
    fn seed_override_changes_derived_seeds_only() {
        let text = "[reference]\nseed = 5\n";
        let a = parse_config_with(text, &Overrides { seed: Some(1), output_dir: None }).unwrap();
        let b = parse_config_with(text, &Overrides { seed: Some(2), output_dir: Some("elsewhere".into()) }).unwrap();
        assert_eq!(b.reference_path(), PathBuf::from("elsewhere/reference"));
        assert_eq!(a.reference.seed, Some(5));
        assert_eq!(b.reference.seed, Some(5));
        assert_ne!(a.warm_start.seed, b.warm_start.seed);
        assert_eq!(b.seed, 2);
    }
}
