//! Per-solver metric tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Column order of the metrics CSV.
pub const HEADER: [&str; 5] = ["solver", "data_passes", "iterate_distance", "objective_gap", "wall_seconds"];

/// One logged iterate: `|x_k - x*|`, `F(x_k) - F(x*)` and the wall time
/// since the solver started.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: String,
    pub data_passes: f64,
    pub iterate_distance: f64,
    pub objective_gap: f64,
    pub wall_seconds: f64,
}

/// Writes `records` with a header row; floats use the shortest
/// representation that reads back to the same `f64`.
pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| crate::error::CliError::io(path, e))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<RunRecord>, _>>()?)
}

/// The CSV text with the `wall_seconds` column removed; equal for two runs
/// of the same configuration.
pub fn without_wall_time(csv_text: &str) -> String {
    csv_text.lines().map(|line| line.rsplit_once(',').map_or(line, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}
