//! End-to-end runs of the `confdiam` binary on generated fixtures.

use confdiam_core::io::read_mesh;
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn confdiam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confdiam")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(dir: &TempDir, rel: &str) -> String {
    dir.path().join(rel).display().to_string()
}

fn generate(dir: &TempDir, sub: &str, args: &[&str]) {
    let out = p(dir, sub);
    let mut all = vec!["generate"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", &out]);
    let res = confdiam(&all);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn check_flat_disk_passes_with_positive_margin() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "g", &["disk", "--radius", "1", "--rings", "6"]);
    let mesh = read_mesh(&dir.path().join("g/disk.off")).unwrap();
    assert_eq!(mesh.boundary_loops().len(), 1);
    let res = confdiam(&["check", "--mesh", &p(&dir, "g/disk.off"), "--ambient", "e3", "--out", &p(&dir, "c")]);
    assert_eq!(code(&res), 0);
    let report = json(&dir.path().join("c/report.json"));
    assert_eq!(report["report"]["verdict"], "holds");
    assert!(report["report"]["margin"].as_f64().unwrap() > 0.0);
    let manifest = json(&dir.path().join("c/manifest.json"));
    assert_eq!(manifest["command"], "check");
    assert_eq!(manifest["outputs"][0]["path"], "report.json");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn huge_disk_in_sphere_is_not_applicable() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "g", &["disk", "--radius", "3", "--rings", "6"]);
    let res = confdiam(&["check", "--mesh", &p(&dir, "g/disk.off"), "--ambient", "s3", "--out", &p(&dir, "c")]);
    assert_eq!(code(&res), 0);
    let report = json(&dir.path().join("c/report.json"));
    assert_eq!(report["report"]["verdict"], "not_applicable");
    assert!(report["report"]["margin"].is_null());
}

#[test]
fn corrupt_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.off");
    std::fs::write(&bad, "OFF\n3 1 0\n0 0 0\n1 0\n").unwrap();
    let res = confdiam(&["check", "--mesh", bad.to_str().unwrap(), "--out", &p(&dir, "c")]);
    assert_eq!(code(&res), 1);
    assert!(String::from_utf8_lossy(&res.stderr).contains("error"));
    assert_eq!(code(&confdiam(&["check", "--out", &p(&dir, "c")])), 1);
    assert_eq!(code(&confdiam(&["frobnicate"])), 1);
    assert_eq!(code(&confdiam(&["--help"])), 0);
}

#[test]
fn double_writes_table_and_meshes() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "g", &["disk", "--rings", "4"]);
    let res = confdiam(&[
        "double",
        "--mesh",
        &p(&dir, "g/disk.off"),
        "--eps",
        "0.08,0.04,0.02",
        "--eta",
        "0.05",
        "--s-res",
        "32",
        "--steiner",
        "0",
        "--out",
        &p(&dir, "d"),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let table = std::fs::read_to_string(dir.path().join("d/convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.starts_with("eps,tube_integral"));
    for i in 0..3 {
        let m = read_mesh(&dir.path().join(format!("d/double_{i}.off"))).unwrap();
        assert!(m.is_closed());
        assert_eq!(m.euler_characteristic(), 2);
    }
    let study = json(&dir.path().join("d/convergence.json"));
    assert!(study["rows"].as_array().unwrap().iter().all(|r| r["monotone"] == true));
}

#[test]
fn sobolev_prints_both_sides() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "g", &["disk", "--radius", "0.5", "--rings", "6"]);
    let res = confdiam(&[
        "sobolev",
        "--mesh",
        &p(&dir, "g/disk.off"),
        "--ambient",
        "h3-ball",
        "--f",
        "hat:center",
        "--out",
        &p(&dir, "s"),
    ]);
    assert_eq!(code(&res), 0);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("lhs") && stdout.contains("rhs"));
    let check = json(&dir.path().join("s/sobolev.json"));
    assert!(check["lhs"].as_f64().unwrap() <= check["rhs"].as_f64().unwrap());
}

#[test]
fn screen_circle_pair_in_ball() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "g", &["circle-pair", "--radius", "0.1", "--sep", "0.6", "--points", "32"]);
    let curves = json(&dir.path().join("g/curves.json"));
    assert_eq!(curves["components"].as_array().unwrap().len(), 2);
    let res =
        confdiam(&["screen", "--boundary", &p(&dir, "g/curves.json"), "--ambient", "h3-ball", "--out", &p(&dir, "s")]);
    assert_eq!(code(&res), 0);
    let v = json(&dir.path().join("s/verdict.json"));
    assert_eq!(v["verdict"], "inconclusive");
    assert_eq!(v["names"], serde_json::json!(["a", "b"]));
    assert!(v["separation"].as_f64().unwrap() > 0.0);
    let s3 = confdiam(&["screen", "--boundary", &p(&dir, "g/curves.json"), "--ambient", "s3", "--out", &p(&dir, "t")]);
    assert_eq!(code(&s3), 1);
}

#[test]
fn solve_catenoid_and_collapse() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "near", &["catenoid-boundary", "--height", "1.0", "--points", "48"]);
    let res = confdiam(&["solve", "--boundary", &p(&dir, "near/curves.json"), "--out", &p(&dir, "s")]);
    assert_eq!(code(&res), 0);
    let summary = json(&dir.path().join("s/solve.json"));
    assert_eq!(summary["status"], "converged");
    assert!(read_mesh(&dir.path().join("s/solution.off")).is_ok());
    let history = std::fs::read_to_string(dir.path().join("s/history.csv")).unwrap();
    assert!(history.lines().count() >= 2);

    generate(&dir, "far", &["catenoid-boundary", "--height", "1.45", "--points", "48"]);
    let res = confdiam(&["solve", "--boundary", &p(&dir, "far/curves.json"), "--out", &p(&dir, "t")]);
    assert_eq!(code(&res), 0);
    assert_eq!(json(&dir.path().join("t/solve.json"))["status"], "neck-collapse");
}

#[test]
fn generated_icosphere_is_closed_sphere() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "g", &["icosphere", "--subdiv", "4"]);
    let m = read_mesh(&dir.path().join("g/icosphere.off")).unwrap();
    assert!(m.is_closed());
    assert_eq!(m.euler_characteristic(), 2);
    generate(&dir, "a", &["annulus", "--inner", "0.4", "--radius", "1", "--rings", "4"]);
    let ann = read_mesh(&dir.path().join("a/annulus.off")).unwrap();
    assert_eq!(ann.boundary_loops().len(), 2);
    generate(&dir, "c", &["spherical-cap", "--angle", "0.8", "--rings", "5", "--jitter", "0.1", "--seed", "7"]);
    assert!(read_mesh(&dir.path().join("c/spherical-cap.off")).is_ok());
    let bad = confdiam(&["generate", "annulus", "--inner", "2", "--out", &p(&dir, "x")]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "g", &["disk", "--rings", "5", "--jitter", "0.2", "--seed", "3"]);
    let mesh = p(&dir, "g/disk.off");
    let out = p(&dir, "c");
    let mut snapshots = Vec::new();
    for threads in ["1", "2"] {
        let res = confdiam(&["check", "--mesh", &mesh, "--ambient", "h3-ball", "--threads", threads, "--out", &out]);
        assert_eq!(code(&res), 1, "disk of radius 1 touches the ball boundary");
        let res = confdiam(&["check", "--mesh", &mesh, "--threads", threads, "--out", &out]);
        assert_eq!(code(&res), 0);
        snapshots.push((
            std::fs::read(dir.path().join("c/report.json")).unwrap(),
            std::fs::read(dir.path().join("c/manifest.json")).unwrap(),
        ));
    }
    assert_eq!(snapshots[0], snapshots[1]);
    let again = TempDir::new().unwrap();
    generate(&again, "g", &["disk", "--rings", "5", "--jitter", "0.2", "--seed", "3"]);
    assert_eq!(std::fs::read(again.path().join("g/disk.off")).unwrap(), std::fs::read(&mesh).unwrap());
}

#[test]
fn config_file_supplies_options_and_rejects_unknown_keys() {
    let dir = TempDir::new().unwrap();
    generate(&dir, "g", &["disk", "--radius", "0.5", "--rings", "4"]);
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("ambient = \"h3-ball\"\nmesh = \"{}\"\nsteiner = 0\n", p(&dir, "g/disk.off")))
        .unwrap();
    let res = confdiam(&["check", "--config", cfg.to_str().unwrap(), "--json", "--out", &p(&dir, "c")]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let printed: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(printed["ambient"], "h3-ball");
    let manifest = json(&dir.path().join("c/manifest.json"));
    assert_eq!(manifest["config"]["steiner"], 0);

    std::fs::write(&cfg, "ambient = \"e3\"\nwobble = true\n").unwrap();
    let res = confdiam(&["check", "--config", cfg.to_str().unwrap(), "--out", &p(&dir, "d")]);
    assert_eq!(code(&res), 1);
    assert!(String::from_utf8_lossy(&res.stderr).contains("wobble"));
}
