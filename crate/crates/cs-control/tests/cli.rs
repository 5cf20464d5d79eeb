//! Black-box tests of the command-line tool: exit codes, artifact layout,
//! pinned CSV headers, determinism, and the machine-readable error line.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cs-control");

const TINY_CONFIG: &str = r#"
[plant]
a = [[0.0, 1.0], [-0.5, -1.5]]
b = [0.0, 1.0]
c = [-0.5, 1.0]
x0 = [0.0, 0.0]

[space]
horizon = 6.283185307179586
band = 8

[[reference.terms]]
kind = "sin"
m = 2
amplitude = 1.0

[sampling]
k = 9

[solver]
mu1 = 2e-2
mu2 = 1e-3
max_iters = 5000

[experiment]
trials = 5
seed = 31
grid_points = 64

[rip]
l = 2
method = "exact"

[bounds]
s = 1
method = "exact"
"#;

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, TINY_CONFIG).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("CS_CONTROL_WORKERS", "1").output().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn experiment_produces_all_artifacts_with_pinned_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out = tmp.path().join("out");
    let result = run(&["experiment", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));

    let timeseries = read(&out, "timeseries.csv");
    assert!(timeseries.starts_with("t,r,y_l2,y_l1l2,y_trunc,err_l2,err_l1l2,err_trunc\n"));
    assert_eq!(timeseries.lines().count(), 65, "header plus one row per grid point");

    let coefficients = read(&out, "coefficients.csv");
    assert!(coefficients.starts_with("m,abs_theta_l2,abs_theta_l1l2\n"));
    assert_eq!(coefficients.lines().count(), 18, "header plus one row per frequency");
    assert!(coefficients.lines().nth(1).unwrap().starts_with("-8,"));

    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["trials"]["requested"], 5);
    assert_eq!(summary["trials"]["completed"], 5);
    assert_eq!(summary["config"]["sampling"]["k"], 9);
}

#[test]
fn simulate_runs_one_trial() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out = tmp.path().join("out");
    let result = run(&["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success());
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["trials"]["requested"], 1, "simulate overrides the configured trial count");
}

#[test]
fn seed_override_changes_outputs_and_reruns_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let dirs: Vec<_> = (0..3).map(|i| tmp.path().join(format!("out{i}"))).collect();

    for (dir, seed) in [(&dirs[0], "7"), (&dirs[1], "7"), (&dirs[2], "8")] {
        let result = run(&[
            "experiment",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    for name in ["timeseries.csv", "coefficients.csv", "summary.json"] {
        assert_eq!(read(&dirs[0], name), read(&dirs[1], name), "same seed must reproduce {name}");
    }
    assert_ne!(
        read(&dirs[0], "timeseries.csv"),
        read(&dirs[2], "timeseries.csv"),
        "different seed must change the traces"
    );
}

#[test]
fn solver_subcommands_fill_only_their_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out_l2 = tmp.path().join("l2");
    let out_l1 = tmp.path().join("l1");

    let result = run(&["solve-l2", "--config", config.to_str().unwrap(), "--out", out_l2.to_str().unwrap()]);
    assert!(result.status.success());
    let result = run(&["solve-l1l2", "--config", config.to_str().unwrap(), "--out", out_l1.to_str().unwrap()]);
    assert!(result.status.success());

    // Row layout: t,r,y_l2,y_l1l2,y_trunc,err_l2,err_l1l2,err_trunc.
    let row = read(&out_l2, "timeseries.csv").lines().nth(5).unwrap().to_string();
    let cols: Vec<String> = row.split(',').map(str::to_string).collect();
    assert_ne!(cols[2], "0", "solve-l2 fills the ridge column");
    assert_eq!(cols[3], "0", "solve-l2 leaves the l1l2 column empty");

    let row = read(&out_l1, "timeseries.csv").lines().nth(5).unwrap().to_string();
    let cols: Vec<String> = row.split(',').map(str::to_string).collect();
    assert_eq!(cols[2], "0", "solve-l1l2 leaves the ridge column empty");
    assert_ne!(cols[3], "0", "solve-l1l2 fills its column");

    let summary: serde_json::Value = serde_json::from_str(&read(&out_l1, "summary.json")).unwrap();
    assert!(summary["solution"]["iterations"].as_u64().unwrap() >= 1);
    assert!(summary["solution"]["converged"].is_boolean());
}

#[test]
fn rip_and_bounds_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out = tmp.path().join("rip");
    let result = run(&["rip", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&out, "rip.json")).unwrap();
    assert_eq!(report["rip"]["l"], 2);
    assert_eq!(report["rip"]["method"], "exact-enumeration");
    assert!(report["rip"]["delta"].as_f64().unwrap() >= 0.0);
    assert!(report["applicable"].is_boolean());

    let out = tmp.path().join("bounds");
    let result = run(&["bounds", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&out, "bounds.json")).unwrap();
    assert!(report["bounds"]["delta_2s"].is_number());
    assert!(report["bounds"]["certified"].is_boolean());
}

#[test]
fn failures_exit_nonzero_with_machine_readable_line() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    // Missing config file.
    let result = run(&["experiment", "--config", "/nonexistent/config.toml", "--out", out.to_str().unwrap()]);
    assert!(!result.status.success());
    let stderr = String::from_utf8(result.stderr).unwrap();
    let line = stderr.lines().last().unwrap();
    let parsed: serde_json::Value = serde_json::from_str(line).unwrap();
    assert!(parsed["error"].is_string());
    assert!(parsed["message"].is_string());

    // Structurally valid TOML that violates a config invariant.
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, TINY_CONFIG.replace("k = 9", "k = 99")).unwrap();
    let result = run(&["experiment", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!result.status.success());
    let stderr = String::from_utf8(result.stderr).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(parsed["error"], "config");
}

#[test]
fn trials_override_is_respected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path());
    let out = tmp.path().join("out");
    let result = run(&[
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--trials",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "summary.json")).unwrap();
    assert_eq!(summary["trials"]["requested"], 2);
}
