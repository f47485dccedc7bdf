use std::path::Path;
use std::process::{Command, Output};

fn heatlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn empty_suite_list_exits_zero_with_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"group": "su2", "suites": []}"#);
    let report = dir.path().join("r.json");
    let out = heatlab(&[
        "run",
        "--config",
        &cfg,
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["tests"].as_array().unwrap().len(), 0);
    assert_eq!(v["all_pass"], true);
}

#[test]
fn perturbed_structure_constants_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"group": "su2", "suites": ["euclid"], "perturb_structure_constants": 0.001}"#,
    );
    let out = heatlab(&["run", "--config", &cfg]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"group": "torus:1", "suites": ["transform-unitarity", "stochastic", "bounds"], "t_ladder": [0.5],
            "mc": {"samples": 2000, "mesh": 1000}, "bound_samples": 500, "cases": 2}"#,
    );
    let mut bytes = Vec::new();
    for (i, jobs) in ["1", "2"].iter().enumerate() {
        let report = dir.path().join(format!("r{i}.json"));
        let out = heatlab(&[
            "--jobs",
            jobs,
            "run",
            "--config",
            &cfg,
            "--report",
            report.to_str().unwrap(),
            "--seed",
            "9",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stdout)
        );
        bytes.push(std::fs::read(report).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn schema_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"group": "su2", "unknown_key": 3}"#,
    );
    assert_eq!(heatlab(&["run", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "d.json", r#"{"group": "su2", "N": 500}"#);
    assert_eq!(heatlab(&["run", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(
        heatlab(&["run", "--config", "/nonexistent/config.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn transform_prints_json() {
    let out = heatlab(&[
        "transform",
        "--group",
        "su2",
        "--t",
        "0.5",
        "--irrep",
        "1",
        "--at",
        "0:0,0:0,0:0.5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"][0].as_f64().unwrap() - 1.461_388_362_463_635).abs() < 1e-12);
}

#[test]
fn kernel_writes_csv() {
    let out = heatlab(&[
        "kernel", "--group", "torus:2", "--t", "0.3", "--points", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn sample_reports_means() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("s.json");
    let out = heatlab(&[
        "sample",
        "--group",
        "su2",
        "--t",
        "0.5",
        "--samples",
        "4000",
        "--mesh",
        "20",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["tests"].as_array().unwrap().len(), 2);
}
