use std::fs;
use std::process::{Command, Output};

use treepark::{regular_closed_form, Time};

fn treepark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treepark"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Rows of a CSV as string fields, header first.
fn csv(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn analytic_default_is_the_classical_constant() {
    let out = treepark(&["analytic"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(&stdout(&out));
    assert_eq!(rows[0], ["t", "u", "alpha", "occupancy", "derivative"]);
    assert_eq!(rows[1][0], "inf");
    assert_eq!(rows[1][3], "0.432332358382");
}

#[test]
fn analytic_matches_closed_form() {
    let out = treepark(&["analytic", "--dist", r#"{"kind":"regular","D":5}"#, "--t", "0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(&stdout(&out));
    assert_eq!(rows[1][3], "0");
    let value: f64 = rows[2][3].parse().unwrap();
    assert!((value - regular_closed_form(5, Time::Finite(1.0)).unwrap()).abs() < 1e-9);
}

#[test]
fn invalid_distribution_is_a_validation_error() {
    let out = treepark(&["analytic", "--dist", r#"{"kind":"regular","D":1}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error"));
    let out = treepark(&["analytic", "--dist", "not json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = treepark(&["analytic", "--t", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let base = ["simulate", "--dist", r#"{"kind":"geometric","p":0.5}"#, "--t", "1,inf", "--radius", "6", "--samples", "4000", "--seed", "9"];
    let a = treepark(&base);
    assert_eq!(a.status.code(), Some(0));
    let b = treepark(&base);
    assert_eq!(a.stdout, b.stdout);
    let mut threaded = base.to_vec();
    threaded.extend(["--threads", "3"]);
    assert_eq!(treepark(&threaded).stdout, a.stdout);

    let rows = csv(&stdout(&a));
    assert_eq!(
        rows[0],
        ["command", "distribution", "t", "analytic_value", "mc_mean", "mc_stderr", "n_samples", "radius", "seed", "z_score"]
    );
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let (exact, mean, se, z): (f64, f64, f64, f64) =
            (row[3].parse().unwrap(), row[4].parse().unwrap(), row[5].parse().unwrap(), row[9].parse().unwrap());
        assert!(((mean - exact) / se - z).abs() < 1e-6);
    }
}

#[test]
fn simulate_rejects_zero_samples() {
    let out = treepark(&["simulate", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_reports_growth_cap() {
    let out = treepark(&["simulate", "--dist", r#"{"kind":"regular","D":4}"#, "--radius", "10", "--max-vertices", "500"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("replicate 0") && err.contains("depth"), "{err}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let out_path = dir.path().join("out.csv");
    fs::write(
        &config,
        r#"{"distribution":{"kind":"regular","D":3},"times":[1.0,"inf"],"radius":4,"n_samples":50}"#,
    )
    .unwrap();
    let out = treepark(&["analytic", "--config", config.to_str().unwrap(), "--t", "inf", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rows = csv(&fs::read_to_string(&out_path).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][3], "0.375");

    fs::write(&config, r#"{"bogus":1}"#).unwrap();
    assert_eq!(treepark(&["analytic", "--config", config.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn oracle_on_edge_lists() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edge.txt");
    fs::write(&edges, "# one edge\n0 1\n").unwrap();
    let out = treepark(&["oracle", "--edges", edges.to_str().unwrap(), "--t", "inf"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(&stdout(&out));
    assert_eq!(rows[0], ["vertex", "t", "occupancy_prob"]);
    for row in &rows[1..] {
        let p: f64 = row[2].parse().unwrap();
        assert!((p - 0.5).abs() < 1e-8);
    }

    fs::write(&edges, "0 1\n1 two\n").unwrap();
    let out = treepark(&["oracle", "--edges", edges.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    fs::write(&edges, "0 1\n1 2\n2 0\n").unwrap();
    assert_eq!(treepark(&["oracle", "--edges", edges.to_str().unwrap()]).status.code(), Some(1));

    let path20: String = (1..20).map(|v| format!("{} {v}\n", v - 1)).collect();
    fs::write(&edges, path20).unwrap();
    let out = treepark(&["oracle", "--edges", edges.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("20"));

    assert_eq!(treepark(&["oracle"]).status.code(), Some(1));
}

#[test]
fn verify_default_passes() {
    let out = treepark(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 8);
}

#[test]
fn verify_with_tampered_tolerance_fails() {
    let out = treepark(&["verify", "--checks", "closed_form,round_trip", "--abs-tol", "1e-20"]);
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["checks"][0]["passed"], false);
}

#[test]
fn verify_rejects_bad_check_lists() {
    assert_eq!(treepark(&["verify", "--checks", ""]).status.code(), Some(1));
    assert_eq!(treepark(&["verify", "--checks", "nonsense"]).status.code(), Some(1));
}

#[test]
fn usage_errors() {
    assert_eq!(treepark(&["--help"]).status.code(), Some(0));
    assert_eq!(treepark(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(treepark(&[]).status.code(), Some(1));
}
