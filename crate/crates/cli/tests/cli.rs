use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bivcox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bivcox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = bivcox(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json_ok(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout_ok(args)).unwrap()
}

#[test]
fn propagate_matches_closed_form() {
    // Gumbel-Barnett θ=0.5 with Φ=2 ≥ Ψ propagates to Gumbel-Barnett θ/2.
    let text = stdout_ok(&[
        "propagate", "--family", "gumbel-barnett", "--theta", "0.5", "--phi", "2", "--psi", "1.3", "--at", "0.3,0.6",
    ]);
    let line = text.lines().nth(1).unwrap();
    let got: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
    let (u, v) = (0.3f64, 0.6f64);
    let want = u * v * (-0.25 * u.ln() * v.ln()).exp();
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn propagate_pickands_endpoints() {
    let text = stdout_ok(&[
        "propagate", "--pickands", "--family", "gumbel", "--theta", "3", "--alpha", "1.5", "--beta", "2", "--z", "1",
        "--resolution", "3",
    ]);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], 1.0);
    assert_eq!(rows[2][2], 1.0);
    assert!(rows[1][2] > rows[1][1] && rows[1][2] < 1.0);
}

#[test]
fn propagate_without_points_fails() {
    let out = bivcox(&["propagate", "--family", "clayton"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--at"));
}

#[test]
fn verify_reports_tp2_witness() {
    let v = json_ok(&["verify", "--family", "gumbel-barnett", "--theta", "0.5", "--checks", "tp2", "--resolution", "16"]);
    let report = &v["reports"][0];
    assert_eq!(report["passed"], false);
    assert_eq!(report["witness"].as_array().unwrap().len(), 2);
    let v = json_ok(&["verify", "--family", "clayton", "--theta", "3", "--resolution", "16"]);
    assert!(v["reports"].as_array().unwrap().iter().all(|r| r["passed"] == true));
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--family", "gumbel", "--theta", "2", "-n", "50", "--seed", "11"];
    let a = stdout_ok(&args);
    assert_eq!(a, stdout_ok(&args));
    assert_ne!(a, stdout_ok(&["sample", "--family", "gumbel", "--theta", "2", "-n", "50", "--seed", "12"]));
    assert!(a.starts_with("u,v\n"));
    assert_eq!(a.lines().count(), 51);
}

#[test]
fn sample_then_estimate_lifetimes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lifetimes.csv");
    let path_s = path.to_str().unwrap();
    for (z, seed) in [("0", "1"), ("1", "2")] {
        let file = dir.path().join(format!("part{z}.csv"));
        stdout_ok(&[
            "sample", "--lifetimes", "--family", "clayton", "--theta", "3", "--alpha", "0.5", "--beta", "0.5", "--z", z,
            "-n", "400", "--seed", seed, "--out", file.to_str().unwrap(),
        ]);
    }
    let a = fs::read_to_string(dir.path().join("part0.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("part1.csv")).unwrap();
    fs::write(&path, format!("{a}{}", b.split_once('\n').unwrap().1)).unwrap();

    let v = json_ok(&["estimate", path_s, "--family", "clayton"]);
    assert_eq!(v["n"], 800);
    assert_eq!(v["cox_x"]["converged"], true);
    let bx = v["cox_x"]["coefficients"][0].as_f64().unwrap();
    assert!((bx - 0.5).abs() < 0.25, "{bx}");

    let v = json_ok(&["estimate", path_s, "--stratum", "0"]);
    assert_eq!(v["n"], 400);
    let theta = v["plug_in"]["theta"].as_f64().unwrap();
    assert!((theta - 3.0).abs() < 1.0, "{theta}");
}

#[test]
fn estimate_rejects_bad_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "a,b\n1,2\n3,4\n").unwrap();
    let out = bivcox(&["estimate", path.to_str().unwrap()]);
    assert!(!out.status.success());
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const ORACLE_STABILITY: &str = r#"{
    "experiment": "stability",
    "baseline_family": "clayton",
    "theta": 3,
    "alpha_coefs": [1.5],
    "beta_coefs": [2],
    "sample_sizes": [50],
    "replications": 4,
    "z_grid": [0, 0.15, 0.3],
    "seed": 5,
    "oracle_theta": true
}"#;

#[test]
fn experiment_from_config_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ORACLE_STABILITY);
    let out = dir.path().join("out");
    let text = stdout_ok(&["experiment", "stability", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(text.contains("mean-relative-error"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("stability.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["mean"] == 0.0 && r["count"] == 4));
    assert!(out.join("stability.csv").exists());
}

#[test]
fn experiment_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &ORACLE_STABILITY.replace("\"oracle_theta\": true", "\"oracle_theta\": false"));
    // The output directory is echoed in the report, so both runs share it.
    let out = dir.path().join("out");
    let mut outputs = Vec::new();
    for _ in 0..2 {
        stdout_ok(&["experiment", "stability", "--config", &cfg, "--out", out.to_str().unwrap()]);
        outputs.push(fs::read(out.join("stability.json")).unwrap());
    }
    assert!(outputs[0] == outputs[1], "reports differ");
}

#[test]
fn experiment_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ORACLE_STABILITY);
    let v = json_ok(&[
        "experiment", "stability", "--config", &cfg, "--dry-run", "--seed", "99", "--reps", "7", "--scheme", "mc",
    ]);
    assert_eq!(v["seed"], 99);
    assert_eq!(v["replications"], 7);
    assert!(v["scheme"]["mc"]["draws"].as_u64().unwrap() > 0);
}

#[test]
fn experiment_kind_mismatch_and_bad_config_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ORACLE_STABILITY);
    assert!(!bivcox(&["experiment", "case-study", "--config", &cfg]).status.success());
    let bad = write_config(dir.path(), &ORACLE_STABILITY.replace("\"replications\": 4", "\"replications\": 0"));
    let out = bivcox(&["experiment", "stability", "--config", &bad]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("replications"));
}

#[test]
fn figures_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    stdout_ok(&["experiment", "figures", "--out", out.to_str().unwrap()]);
    let pickands = fs::read_to_string(out.join("pickands.csv")).unwrap();
    assert!(pickands.starts_with("s,z=0,z=0.25,z=0.5,z=1\n"));
    assert_eq!(pickands.lines().count(), 1002);
    let density = fs::read_to_string(out.join("density_z0.csv")).unwrap();
    assert_eq!(density.lines().count(), 101 * 101 + 1);
}
