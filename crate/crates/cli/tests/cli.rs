use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use recon_cli::metrics::read_csv;
use serde_json::Value;

const SMALL: &str = r#"
seed = 11

[problem]
image_size = 16
views = 12
bins = 23
n_subsets = 4
counts_scale = 2.0

[reference]
passes = 20

[warm_start]
step = { rule = "constant", gamma0 = 1e-3 }

[[solver]]
id = "fista"
algorithm = "fista"
max_passes = 5

[[solver]]
id = "saga"
algorithm = "ista"
estimator = "saga"
step = { rule = "constant", gamma0 = 1e-3 }
max_passes = 5

[[solver]]
id = "spdhg"
algorithm = "spdhg"
max_passes = 5
"#;

fn recon(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recon"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("recon runs")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("experiment.toml");
    fs::write(&path, text).unwrap();
    path
}

fn stdout_json(output: &Output) -> Value {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("one JSON object on stdout")
}

fn stderr_error(output: &Output) -> Value {
    assert!(!output.status.success());
    let text = String::from_utf8_lossy(&output.stderr);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "{text}");
    serde_json::from_str(lines[0]).expect("machine-readable error")
}

#[test]
fn compare_writes_tables_images_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let summary = stdout_json(&recon(&["compare"], &config, &out));
    assert_eq!(summary["command"], "compare");
    assert_eq!(summary["final"].as_array().unwrap().len(), 3);

    for id in ["fista", "saga", "spdhg"] {
        assert!(out.join("metrics").join(format!("{id}.csv")).is_file());
        assert!(out.join("images").join(format!("{id}.raw")).is_file());
        assert!(out.join("runs").join(format!("{id}.json")).is_file());
    }
    for plot in ["iterate_distance.svg", "objective_gap.svg"] {
        let svg = fs::read_to_string(out.join("plots").join(plot)).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("data-series=\"saga\""));
    }
    assert!(out.join("reference.raw").is_file() && out.join("config.toml").is_file());
}

#[test]
fn fista_table_has_one_row_per_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    stdout_json(&recon(&["solve", "--solver", "fista"], &config, &out));
    let records = read_csv(&out.join("metrics").join("fista.csv")).unwrap();
    let passes: Vec<f64> = records.iter().map(|r| r.data_passes).collect();
    assert_eq!(passes, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    assert!(records.iter().all(|r| r.objective_gap.is_finite() && r.iterate_distance >= 0.0));
    assert!(records.last().unwrap().objective_gap < records[1].objective_gap);
    assert!(!out.join("metrics").join("saga.csv").exists());
}

#[test]
fn missing_reference_is_an_error_when_computing_is_disabled() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("passes = 20", "passes = 20\ncompute = false");
    let config = write_config(tmp.path(), &text);
    let output = recon(&["solve"], &config, &tmp.path().join("out"));
    let error = stderr_error(&output);
    assert!(error["message"].as_str().unwrap().contains("no reference solution"), "{error}");
}

#[test]
fn stored_reference_is_reused() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let first = stdout_json(&recon(&["reference"], &config, &out));

    let frozen = write_config(tmp.path(), &SMALL.replace("passes = 20", "passes = 20\ncompute = false"));
    stdout_json(&recon(&["solve", "--solver", "spdhg"], &frozen, &out));
    let again = stdout_json(&recon(&["reference"], &frozen, &out));
    assert_eq!(first["objective"], again["objective"]);
}

#[test]
fn simulate_writes_phantom_and_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let summary = stdout_json(&recon(&["simulate"], &config, &out));
    assert!(summary["total_counts"].as_f64().unwrap() > 0.0);
    let sinogram = recon_core::io::read_sinogram(&out.join("data").join("sinogram")).unwrap();
    assert!(sinogram.is_count_data());
    assert_eq!(sinogram.values().len(), 12 * 23);
    let phantom = recon_core::io::read_image(&out.join("data").join("phantom")).unwrap();
    assert_eq!(phantom.len(), 16 * 16);
}

#[test]
fn plot_redraws_the_compare_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    stdout_json(&recon(&["compare"], &config, &out));
    let before = fs::read(out.join("plots").join("objective_gap.svg")).unwrap();
    fs::remove_dir_all(out.join("plots")).unwrap();
    stdout_json(&recon(&["plot"], &config, &out));
    assert_eq!(fs::read(out.join("plots").join("objective_gap.svg")).unwrap(), before);
}

#[test]
fn invalid_config_reports_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &SMALL.replace("counts_scale = 2.0", "counts_scale = 2.0\nalpha = -1.0"));
    let error = stderr_error(&recon(&["compare"], &config, &tmp.path().join("out")));
    let message = error["message"].as_str().unwrap();
    assert!(message.contains("alpha") && message.contains("line 10"), "{message}");
}

#[test]
fn seed_override_changes_the_data() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let a = stdout_json(&recon(&["simulate"], &config, &tmp.path().join("a")));
    let b = stdout_json(&recon(&["simulate", "--seed", "12"], &config, &tmp.path().join("b")));
    let c = stdout_json(&recon(&["simulate"], &config, &tmp.path().join("c")));
    assert_ne!(a["total_counts"], b["total_counts"]);
    assert_eq!(a["total_counts"], c["total_counts"]);
}
