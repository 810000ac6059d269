//! End-to-end tests of the `mmd-robust` binary: every subcommand runs
//! against a real config file and produces the documented artifacts, and
//! reruns are byte-identical regardless of the thread count.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mmd-robust"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = binary().args(args).output().expect("spawning mmd-robust");
    assert!(
        output.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).unwrap();
}

#[test]
fn bounds_subcommand_writes_expected_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bounds.toml");
    write(&config, "n = 100\nsigma_coef = 2.0\n");
    let out = dir.path().join("out");
    run_ok(&[
        "bounds",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let table = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert!(table.starts_with("theorem,value,vacuous,uninformative,inputs,note"));
    // 2√((1+2·2)/100) = √(1/5), printed in shortest-round-trip form.
    let expectation_line = table
        .lines()
        .find(|l| l.starts_with("expectation_stationary"))
        .expect("expectation_stationary row");
    assert!(
        expectation_line.contains("0.4472135954999579"),
        "unexpected bound value in {expectation_line}"
    );
    assert!(table.contains("cauchy_param"));
    // A vacuous bound is flagged, not hidden.
    let gauss_line = table.lines().find(|l| l.starts_with("gauss_param")).unwrap();
    assert!(gauss_line.contains("inf,true,"), "vacuous flag missing: {gauss_line}");
}

#[test]
fn estimate_subcommand_fits_gaussian_location() {
    let dir = tempfile::tempdir().unwrap();
    // 1-D data centered near 2; the exact path should land close to it.
    let data_path = dir.path().join("data.csv");
    let values: Vec<String> =
        (0..200).map(|i| format!("{}", 2.0 + ((i * 37) % 100) as f64 / 100.0 - 0.5)).collect();
    write(&data_path, &(values.join("\n") + "\n"));
    let config = dir.path().join("estimate.toml");
    write(
        &config,
        r#"
data = "data.csv"
[model]
kind = "gaussian_location"
dim = 1
[optimizer]
algorithm = "exact"
t_steps = 300
"#,
    );
    let out = dir.path().join("out");
    run_ok(&[
        "estimate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    let table = fs::read_to_string(out.join("estimate.csv")).unwrap();
    let theta_line = table.lines().find(|l| l.starts_with("theta_0,")).unwrap();
    let theta: f64 = theta_line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((theta - 2.0).abs() < 0.2, "theta_0 = {theta}");
    assert!(table.lines().any(|l| l.starts_with("final_crit,")));
}

#[test]
fn experiment_subcommand_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    write(
        &config,
        r#"
kind = "eps_sweep"
repetitions = 2
n = 50
dim = 2
eps_grid = [0.0, 0.1, 0.2]
"#,
    );
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    run_ok(&[
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "42",
        "--out",
        out1.to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    run_ok(&[
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "42",
        "--out",
        out2.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    let csv1 = fs::read(out1.join("results.csv")).unwrap();
    let csv2 = fs::read(out2.join("results.csv")).unwrap();
    assert_eq!(csv1, csv2, "results.csv differs between --jobs 1 and --jobs 4");
    let svg1 = fs::read(out1.join("error_vs_eps.svg")).unwrap();
    let svg2 = fs::read(out2.join("error_vs_eps.svg")).unwrap();
    assert_eq!(svg1, svg2);
    assert!(String::from_utf8(svg1).unwrap().starts_with("<svg"));
}

#[test]
fn rho_subcommand_tabulates_lags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("rho.toml");
    write(
        &config,
        r#"
max_lag = 4
n_traj = 8
traj_len = 64
[process]
kind = "ar1"
a = 0.5
"#,
    );
    let out = dir.path().join("out");
    run_ok(&[
        "rho",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let table = fs::read_to_string(out.join("rho.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "lag,rho,stderr,n_pairs");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("1,"));
    assert!(rows[3].starts_with("4,"));
}

#[test]
fn bad_config_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    write(&config, "kind = \"table1\"\ndims = [2]\n");
    let out = dir.path().join("out");
    let output = binary()
        .args([
            "experiment",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("dims"), "stderr should name the offending field: {stderr}");
}
