use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn macrokin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macrokin"))
        .args(args)
        .arg("--output")
        .arg(out)
        .env("MACROKIN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn last_row(csv: &str) -> Vec<f64> {
    let line = csv.lines().last().unwrap();
    line.split(',').map(|c| c.parse().unwrap()).collect()
}

#[test]
fn missing_network_file_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(&["simulate", "--network", "/nonexistent/net.txt", "--n0", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/net.txt"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(&["simulate", "--config", "/nonexistent/run.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/run.toml"));
}

#[test]
fn unknown_suite_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(&["verify", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("ehrenfest") && err.contains("majority"), "{err}");
}

#[test]
fn invalid_values_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["meanfield", "--model", "ehrenfest", "--step", "0"][..],
        &["simulate", "--model", "ehrenfest", "--horizon", "-1"],
        &["simulate", "--model", "no_such_model"],
        &["simulate", "--model", "ehrenfest", "--params", "bogus=1"],
        &["simulate", "--bad-flag"],
    ] {
        let o = macrokin(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn bad_thread_count_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_macrokin"))
        .args(["simulate", "--model", "ehrenfest", "--output"])
        .arg(dir.path())
        .env("MACROKIN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--model", "ehrenfest", "--N", "50", "--replicas", "6", "--seed", "11"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(macrokin(&args, &a).status.success());
    assert!(macrokin(&args, &b).status.success());
    for name in ["ensemble.csv", "mean.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let csv = fs::read_to_string(a.join("ensemble.csv")).unwrap();
    assert!(csv.starts_with("# macrokin "));
    assert!(csv.lines().next().unwrap().contains("config-sha256="));
}

#[test]
fn single_replica_trajectory_starts_at_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(
        &["simulate", "--model", "ehrenfest", "--N", "30", "--horizon", "2", "--sample-dt", "0.5"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(rows[0].starts_with("t,"));
    assert_eq!(rows.len(), 1 + 5);
    let first: Vec<f64> = rows[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1] + first[2], 30.0);
}

#[test]
fn json_format_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(&["meanfield", "--model", "ehrenfest", "--format", "json"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("meanfield.json")).unwrap()).unwrap();
    assert!(v["provenance"]["config_sha256"].is_string());
    assert_eq!(v["columns"][0], "t");
}

#[test]
fn meanfield_ehrenfest_relaxes_to_half() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(&["meanfield", "--model", "ehrenfest", "--horizon", "10"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let row = last_row(&fs::read_to_string(dir.path().join("meanfield.csv")).unwrap());
    assert!((row[0] - 10.0).abs() < 1e-9);
    assert!((row[1] - 0.5).abs() < 1e-6 && (row[2] - 0.5).abs() < 1e-6, "{row:?}");
}

#[test]
fn equilibrium_flags_lotka_volterra_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(&["equilibrium", "--model", "lotka_volterra"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("UNITARITY INFEASIBLE"));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("equilibrium.json")).unwrap()).unwrap();
    assert_eq!(v["feasible"], false);
}

#[test]
fn equilibrium_ehrenfest_is_binomial() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(&["equilibrium", "--model", "ehrenfest", "--N", "10"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("equilibrium.json")).unwrap()).unwrap();
    assert_eq!(v["feasible"], true);
    let csv = fs::read_to_string(dir.path().join("stationary.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with(|c: char| c.is_alphabetic()))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    for r in rows {
        let k = r[0] as u64;
        let binom = (0..k).fold(1.0, |acc, i| acc * (10 - i) as f64 / (i + 1) as f64) / 1024.0;
        assert!((r[2] - binom).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn all_truncated_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(
        &["simulate", "--model", "ehrenfest", "--N", "100", "--replicas", "3", "--max-events", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn toml_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("birth_death.txt"), "0 -> A @ 2\nA -> 0 @ 1\n").unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "network = \"birth_death.txt\"\nN = 50\nn0 = [10]\nhorizon = 3.0\nreplicas = 4\nseed = 9\n",
    )
    .unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out");
    let o = macrokin(&["simulate", "--config", cfg.to_str().unwrap(), "--replicas", "2"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let ens = fs::read_to_string(out.join("ensemble.csv")).unwrap();
    assert_eq!(ens.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["horizon"], 3.0);
}

#[test]
fn verify_majority_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrokin(&["verify", "majority"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("suite majority: PASS"));
    assert!(dir.path().join("verify_majority.json").exists());
}
