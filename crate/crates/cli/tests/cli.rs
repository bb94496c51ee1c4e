use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hermitana(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermitana")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn c(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn analyze_example1_maps_to_constant_hermitian() {
    let out = hermitana(&["analyze", "--model", "example1", "--B", "2", "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["tool"]["name"], "hermitana");
    assert_eq!(r["command"], "analyze");
    assert_eq!(r["verdicts"]["obstruction"], "none");
    let h = &r["results"]["frame"]["h_tilde_start"];
    let s3 = 3f64.sqrt();
    let expect = [[(0.0, 0.0), (s3, 0.0)], [(s3, 0.0), (0.0, 0.0)]];
    for i in 0..2 {
        for j in 0..2 {
            let (re, im) = c(&h[i][j]);
            assert!((re - expect[i][j].0).abs() < 1e-10 && (im - expect[i][j].1).abs() < 1e-10);
        }
    }
    assert!(r.get("wall_time_s").is_none());
    assert!(r["config"].get("schedule").is_none_or(Value::is_null));
}

#[test]
fn analyze_verdicts_and_exit_codes() {
    let out = hermitana(&["analyze", "--model", "example3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdicts"]["obstruction"], "topological");
    let out = hermitana(&["analyze", "--model", "example2", "--grid", "6", "--steps", "128"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdicts"]["obstruction"], "geometric");
}

#[test]
fn wilson_example3_is_minus_identity() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("w.csv");
    let out = hermitana(&[
        "wilson", "--model", "example3", "--loop", "circle_phi", "--R", "1.5", "--steps", "2048",
        "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["verdicts"]["nontrivial"], true);
    let w = &r["results"]["w"];
    let mut dev = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let (re, im) = c(&w[i][j]);
            let target = if i == j { -1.0 } else { 0.0 };
            dev = dev.max((re - target).abs()).max(im.abs());
        }
    }
    assert!(dev < 1e-6, "W deviates from -I by {dev}");
    assert!(r["residuals"]["unitarity"]["value"].as_f64().unwrap() <= 1e-10);

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,t,R,φ,distance_to_identity"));
    assert_eq!(lines.count(), 2049);
}

#[test]
fn berry_hermitian_frame_gives_pi() {
    let out = hermitana(&["berry", "--model", "example3", "--loop", "circle_phi", "--frame", "hermitian", "--band", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let phase = r["results"]["phase"].as_f64().unwrap();
    let d = (phase + PI).rem_euclid(2.0 * PI);
    assert!(d.min(2.0 * PI - d) < 1e-4, "phase {phase}");
    assert_eq!(r["results"]["frame"], "hermitian");

    let out = hermitana(&["berry", "--model", "example3", "--band", "1"]);
    let phase = report(&out)["results"]["phase"].as_f64().unwrap();
    assert!(phase.abs() < 1e-4);
}

#[test]
fn frame_periodicity_defect_depends_on_radius() {
    let r0 = (2.0 * 2f64.sqrt() / 3.0).to_string();
    let out = hermitana(&["frame", "--model", "example2", "--r", &r0, "--steps", "2048"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdicts"]["single_valued"], true);
    let out = hermitana(&["frame", "--model", "example2", "--r", "0.6", "--steps", "512"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert!(r["results"]["periodicity_defect"].as_f64().unwrap() > 0.1);
    assert!(r["residuals"]["monodromy_residual"]["value"].as_f64().unwrap() < 1e-6);
}

#[test]
fn curvature_and_identities_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let out = hermitana(&["curvature", "--model", "example3", "--grid", "5", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdicts"]["flat"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("index,R,φ,g_norm,fg_norm,fk_norm,delta\n"));
    assert_eq!(text.lines().count(), 26);

    let out = hermitana(&["identities", "--model", "random", "--seed", "3", "--points", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdicts"]["identities_hold"], true);
    assert_eq!(r["results"]["points"], 10);
}

#[test]
fn evolve_conserves_eta_norm_and_naive_drifts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    let out = hermitana(&["evolve", "--model", "example3", "--T", "2", "--dt", "0.002", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["residuals"]["eta_norm_drift"]["value"].as_f64().unwrap() < 1e-8);
    assert!(r["residuals"]["frame_equivalence"]["value"].as_f64().unwrap() < 1e-6);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("step,t,eta_norm,psi0_re,psi0_im,psi1_re,psi1_im\n"));
    assert_eq!(text.lines().count(), 1002);

    let out = hermitana(&["evolve", "--model", "example3", "--T", "2", "--dt", "0.01", "--naive"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["residuals"]["eta_norm_drift"]["value"].as_f64().unwrap() > 1e-3);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"model": "example3"}, "path": {"generator": "circle_phi", "fixed": {"R": 1.2}, "steps": 256}, "tol": 1e-4}"#,
    )
    .unwrap();
    let out_path = dir.path().join("report.json");
    let out = hermitana(&[
        "wilson", "--model", "example1", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let r = read_json(&out_path);
    assert_eq!(r["config"]["model"]["model"], "example3");
    assert_eq!(r["config"]["tol"], 1e-4);
    assert_eq!(r["config"]["path"]["steps"], 256);
}

#[test]
fn errors_exit_with_one() {
    let out = hermitana(&["wilson", "--model", "example2", "--r", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("1.5"), "error names the point: {msg}");

    assert_eq!(hermitana(&["wilson", "--model", "nope"]).status.code(), Some(1));
    assert_eq!(hermitana(&["wilson", "--steps", "4"]).status.code(), Some(1));
    assert_eq!(hermitana(&["wilson", "--tol=-1"]).status.code(), Some(1));
    assert_eq!(hermitana(&["wilson", "--no-such-flag"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"tolerance": 1e-3}"#).unwrap();
    assert_eq!(hermitana(&["wilson", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn reports_are_deterministic() {
    let args = ["identities", "--model", "example2", "--points", "8", "--seed", "11"];
    let a = hermitana(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_hermitana"))
        .args(args)
        .env("HERMITANA_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let out = hermitana(&["wilson", "--model", "example3", "--steps", "64", "--timing"]);
    assert!(report(&out)["wall_time_s"].as_f64().is_some());
}

#[test]
fn reproduce_paper_passes() {
    let out = hermitana(&["reproduce-paper", "--seed", "20240611"]);
    let table = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert!(table.contains("10/10 checks passed"));
    let r = report(&out);
    assert_eq!(r["verdicts"]["all_passed"], true);
    assert_eq!(r["results"]["checks"].as_array().unwrap().len(), 10);
}
