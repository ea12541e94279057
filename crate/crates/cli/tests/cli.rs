//! End-to-end runs of the `kplate` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kplate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kplate"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("case.cfg");
    fs::write(&path, body).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn centre_load_scenario_writes_displacement_and_shear() {
    let out = tempfile::tempdir().unwrap();
    let o = kplate(&["solve", scenario("paper_fig1.cfg").to_str().unwrap(), "--out", out.path().to_str().unwrap(), "--set", "domain.nx=8", "--set", "domain.ny=8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["nodal.csv", "shear.csv", "grid.vtk", "report.json", "report.txt"] {
        assert!(out.path().join(f).is_file(), "missing {f}");
    }
    let nodal = fs::read_to_string(out.path().join("nodal.csv")).unwrap();
    assert_eq!(nodal.lines().next(), Some("x,y,u,u_x,u_y,u_xy"));
    assert_eq!(nodal.lines().count(), 1 + 81);
    let shear = fs::read_to_string(out.path().join("shear.csv")).unwrap();
    assert_eq!(shear.lines().next(), Some("s,x,y,T,lambda,active"));
    assert_eq!(shear.lines().count(), 1 + 32);
    let report = json(&out.path().join("report.json"));
    assert_eq!(report["problem"], "plate_signorini");
    assert_eq!(report["solver"]["terminated_by"], "active_set_fixed_and_residual_tol");
    assert!(report["max_lambda"].as_f64().unwrap() <= 0.0);
    assert!(report["min_u"].as_f64().unwrap() < 0.0);
}

#[test]
fn off_centre_scenario_runs() {
    let out = tempfile::tempdir().unwrap();
    let o = kplate(&["solve", scenario("paper_fig3.cfg").to_str().unwrap(), "--out", out.path().to_str().unwrap(), "--set", "domain.nx=8", "--set", "domain.ny=8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&out.path().join("report.json"));
    let u = report["min_u"].as_f64().unwrap();
    assert!(u < 0.0);
    let nodal = fs::read_to_string(out.path().join("nodal.csv")).unwrap();
    // the deepest node lies on the loaded diagonal, in the loaded quadrant
    let deepest = nodal
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .min_by(|a, b| a[2].total_cmp(&b[2]))
        .unwrap();
    assert_eq!(deepest[0], deepest[1]);
    assert!(deepest[0] > 0.5, "deepest node at ({}, {})", deepest[0], deepest[1]);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = kplate(&["solve", scenario("paper_fig3.cfg").to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--set", "domain.nx=8", "--set", "domain.ny=8"]);
        assert!(o.status.success());
    }
    for f in ["nodal.csv", "shear.csv", "grid.vtk", "report.json", "report.txt"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn sweep_writes_a_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "problem = \"plate_bilateral\"\n[domain]\nnx = 4\nny = 4\n[loads]\nmanufactured = \"sine\"\n",
    );
    let out = dir.path().join("out");
    let o = kplate(&["solve", cfg.to_str().unwrap(), "--sweep", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = json(&out.join("convergence.json"));
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(table["reference"], "manufactured exact solution");
    for row in &rows[1..] {
        let rate = row["rate_energy"].as_f64().unwrap();
        assert!((1.8..=2.2).contains(&rate), "energy rate {rate}");
    }
    assert!(fs::read_to_string(out.join("convergence.txt")).unwrap().contains("error_energy"));
}

#[test]
fn poisson_problem_runs_through_the_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "problem = \"poisson_signorini\"\n[domain]\nnx = 8\nny = 8\n[loads]\nuniform = 1.0\n",
    );
    let out = dir.path().join("out");
    let o = kplate(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let nodal = fs::read_to_string(out.join("nodal.csv")).unwrap();
    assert_eq!(nodal.lines().next(), Some("x,y,u"));
    assert!(!out.join("shear.csv").exists());
}

#[test]
fn unknown_key_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[material]\nyoungs = 3.0\n");
    let o = kplate(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("youngs"), "{}", stderr(&o));
}

#[test]
fn invalid_value_exits_2_naming_the_key() {
    let o = kplate(&["solve", scenario("paper_fig1.cfg").to_str().unwrap(), "--set", "material.poisson=1.0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("material.poisson"), "{}", stderr(&o));

    let o = kplate(&["solve", scenario("paper_fig1.cfg").to_str().unwrap(), "--set", "domain.nx=-3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("domain.nx"), "{}", stderr(&o));

    let o = kplate(&["solve", scenario("paper_fig1.cfg").to_str().unwrap(), "--sweep", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("output.sweep"), "{}", stderr(&o));
}

#[test]
fn malformed_or_missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[domain\nnx = 4\n");
    assert_eq!(kplate(&["solve", cfg.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("nope.cfg");
    assert_eq!(kplate(&["solve", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn lifting_load_exits_3_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    // a lifting load on a plate resting on its boundary has no equilibrium
    let cfg = write_config(dir.path(), "[domain]\nnx = 4\nny = 4\n[[loads.point]]\nx = 0.5\ny = 0.5\np = 1.0\n");
    let out = dir.path().join("out");
    let o = kplate(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("terminated by"));
    let report = json(&out.join("failure_report.json"));
    assert_eq!(report["terminated_by"], "singular_system");
}

#[test]
fn max_iters_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[domain]\nnx = 8\nny = 8\n[boundary]\nleft = \"clamped\"\n[loads]\nuniform = -1.0\n[[loads.point]]\nx = 0.8\ny = 0.5\np = 1.0\n[solver]\nmax_iters = 2\ninitial_guess = \"zero\"\n",
    );
    let out = dir.path().join("out");
    let o = kplate(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(json(&out.join("failure_report.json"))["terminated_by"], "max_iters");
}

#[test]
fn check_prints_the_resolved_config() {
    let o = kplate(&["check", scenario("paper_fig1.cfg").to_str().unwrap(), "--set", "domain.nx=16"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("nx = 16"));
    assert!(text.contains("tol_r"));
}
