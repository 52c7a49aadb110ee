//! Step-size grid runner.
//!
//! Runs every solver of a configuration (see `configs/grid/`) against the
//! shared reference and prints the objective gap at chosen data passes.
//! Replicates of one candidate share an id up to a `.s<k>` suffix; the
//! summary lists the worst gap over replicates per candidate.
//!
//! ```text
//! cargo run --release -p recon-cli --example step_grid -- configs/grid/coarse.toml 30 100
//! ```

use std::collections::BTreeMap;
use std::process::ExitCode;

use recon_cli::config::parse_config;
use recon_cli::experiment::{solve, Experiment};
use recon_cli::metrics::RunRecord;

fn gap_at(records: &[RunRecord], passes: f64) -> f64 {
    records.iter().find(|r| r.data_passes >= passes - 1e-9).map_or(f64::NAN, |r| r.objective_gap)
}

fn candidate(id: &str) -> &str {
    match id.rsplit_once(".s") {
        Some((head, tail)) if !tail.is_empty() && tail.chars().all(|c| c.is_ascii_digit()) => head,
        _ => id,
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(path) = args.first() else {
        eprintln!("usage: step_grid <config.toml> [passes...]");
        return ExitCode::FAILURE;
    };
    let mut checkpoints: Vec<f64> = args[1..].iter().filter_map(|a| a.parse().ok()).collect();
    if checkpoints.is_empty() {
        checkpoints = vec![30.0, 100.0];
    }
    let result = std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|text| parse_config(&text).map_err(|e| e.to_string()))
        .and_then(|config| Experiment::build(config).map_err(|e| e.to_string()))
        .and_then(|experiment| solve(&experiment, None).map_err(|e| e.to_string()));
    let runs = match result {
        Ok(runs) => runs,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };

    let mut worst: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for run in &runs {
        let gaps: Vec<f64> = checkpoints.iter().map(|&p| gap_at(&run.records, p)).collect();
        let cells: Vec<String> = gaps.iter().map(|g| format!("{g:>11.4e}")).collect();
        println!("{:<28} {}", run.id, cells.join(" "));
        let entry = worst.entry(candidate(&run.id)).or_insert_with(|| vec![f64::NEG_INFINITY; gaps.len()]);
        for (w, g) in entry.iter_mut().zip(&gaps) {
            *w = w.max(*g);
        }
    }
    println!();
    let header: Vec<String> = checkpoints.iter().map(|p| format!("{:>11}", format!("@{p}"))).collect();
    println!("{:<28} {}", "worst over replicates", header.join(" "));
    for (id, gaps) in worst {
        let cells: Vec<String> = gaps.iter().map(|g| format!("{g:>11.4e}")).collect();
        println!("{id:<28} {}", cells.join(" "));
    }
    ExitCode::SUCCESS
}
