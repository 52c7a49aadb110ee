use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use recon_cli::config::{parse_config_with, Overrides};
use recon_cli::error::{CliError, Result};
use recon_cli::experiment::{compare, plot_from_disk, solve, Experiment};
use serde_json::json;

#[derive(Parser)]
#[command(name = "recon", version, about = "Compare deterministic and stochastic reconstruction algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the phantom and its noisy counts.
    Simulate(Common),
    /// Compute (or load) the reference solution.
    Reference(Common),
    /// Run the configured solvers and write their metric tables.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Run only the solver with this id.
        #[arg(long)]
        solver: Option<String>,
    },
    /// Reference, every solver, metric tables and plots.
    Compare(Common),
    /// Plot metric tables already in the output directory.
    Plot(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Replaces the experiment seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<recon_cli::config::ExperimentConfig> {
        let text = std::fs::read_to_string(&self.config).map_err(|e| CliError::io(&self.config, e))?;
        let overrides = Overrides { seed: self.seed, output_dir: self.out.clone() };
        parse_config_with(&text, &overrides).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", self.config.display())),
            other => other,
        })
    }
}

fn report(value: serde_json::Value) {
    println!("{value}");
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let e = Experiment::build(c.load()?)?;
            e.write_data()?;
            let total: f64 = e.data.values().iter().sum();
            report(json!({"command": "simulate", "output_dir": e.output_dir(), "total_counts": total}));
        }
        Command::Reference(c) => {
            let e = Experiment::build(c.load()?)?;
            let r = e.reference()?;
            report(json!({"command": "reference", "path": e.config.reference_path(), "objective": r.objective}));
        }
        Command::Solve { common, solver } => {
            let e = Experiment::build(common.load()?)?;
            let runs = solve(&e, solver.as_deref())?;
            let ids: Vec<&str> = runs.iter().map(|r| r.id.as_str()).collect();
            report(json!({"command": "solve", "output_dir": e.output_dir(), "solvers": ids}));
        }
        Command::Compare(c) => {
            let e = Experiment::build(c.load()?)?;
            let (runs, warnings) = compare(&e)?;
            for w in &warnings {
                eprintln!("{}", json!({"warning": w}));
            }
            let summary: Vec<_> = runs
                .iter()
                .map(|r| {
                    let last = r.records.last();
                    json!({
                        "solver": r.id,
                        "data_passes": last.map(|l| l.data_passes),
                        "objective_gap": last.map(|l| l.objective_gap),
                        "iterate_distance": last.map(|l| l.iterate_distance),
                    })
                })
                .collect();
            report(json!({"command": "compare", "output_dir": e.output_dir(), "final": summary}));
        }
        Command::Plot(c) => {
            let config = c.load()?;
            for w in plot_from_disk(&config)? {
                eprintln!("{}", json!({"warning": w}));
            }
            report(json!({"command": "plot", "output_dir": config.output_dir}));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::FAILURE
        }
    }
}
