//! Drives the `rmhd` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rmhd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmhd"))
        .args(args)
        .current_dir(dir)
        .env("RMHD_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_rp1_writes_snapshots_and_log() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"preset":"rp1","scheme":"muscl2-pcp","n_cells":1000,"output_dir":"out"}"#,
    );
    let out = rmhd(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("out");
    let last = fs::read_to_string(dir.join("snapshot_0001.csv")).unwrap();
    assert!(last.starts_with("x,rho,v1,v2,v3,B1,B2,B3,p,D,m1,m2,m3,E\n"));
    assert_eq!(last.lines().count(), 1001);
    let log = fs::read_to_string(dir.join("steps.csv")).unwrap();
    assert!(log.starts_with("step,t,dt,min_rho,min_p,max_v,limiter_activations\n"));
    let index = fs::read_to_string(dir.join("snapshots.csv")).unwrap();
    assert!(index.lines().nth(2).unwrap().starts_with("1,4.0000000000000002e-1,"));
}

#[test]
fn unlimited_rp3_fails_admissibility() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"preset":"rp3","scheme":"muscl2-pcp","eps":"off","n_cells":400}"#);
    let out = rmhd(&["run", &cfg, "--output-dir", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("step") && err.contains("cell"), "{err}");
}

#[test]
fn malformed_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"preset":"rp1","#);
    assert_eq!(rmhd(&["run", &cfg], tmp.path()).status.code(), Some(1));
    let missing = tmp.path().join("nope.json");
    assert_eq!(rmhd(&["run", missing.to_str().unwrap()], tmp.path()).status.code(), Some(1));
}

#[test]
fn two_dimensional_run_writes_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"preset":"rotor","scheme":"lxf2d","nx":16,"ny":16,"max_steps":5,"output_dir":"rot"}"#,
    );
    let out = rmhd(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let diag = fs::read_to_string(tmp.path().join("rot/diagnostics.csv")).unwrap();
    assert!(diag.starts_with("step,t,dt,E_inf,min_rho,min_p,max_lorentz\n"));
    assert_eq!(diag.lines().count(), 6);
    let snap = fs::read_to_string(tmp.path().join("rot/snapshot_0001.csv")).unwrap();
    assert!(snap.starts_with("i,j,x,y,rho,"));
    assert_eq!(snap.lines().count(), 257);
}

#[test]
fn convergence_single_mesh_has_no_order_column() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"preset":"alfven1d","scheme":"lxf1","cells_list":[32],"t_final":0.1,"output_dir":"c"}"#,
    );
    let out = rmhd(&["convergence", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(tmp.path().join("c/convergence.csv")).unwrap();
    assert!(table.starts_with("n,l1,l2,steps,limiter_activations\n"));
    assert_eq!(String::from_utf8_lossy(&out.stdout), table);
}

#[test]
fn convergence_lxf_is_first_order() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"preset":"alfven1d","scheme":"lxf1","output_dir":"c"}"#);
    let out = rmhd(&["convergence", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(tmp.path().join("c/convergence.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows[1..] {
        let order: f64 = r[3].parse().unwrap();
        assert!((0.6..=1.1).contains(&order), "{order}");
    }
}

#[test]
fn convergence_rejects_presets_without_exact_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"preset":"rp1","scheme":"lxf1"}"#);
    assert_eq!(rmhd(&["convergence", &cfg], tmp.path()).status.code(), Some(1));
}

#[test]
fn verify_passes_and_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rmhd(&["verify", "--seed", "7", "--trials", "500", "--report", "r/report.json"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("counterexample_divergence_stencil"));
    assert!(stdout.contains("EXPECTED-FAIL-OF-ADMISSIBILITY"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("r/report.json")).unwrap()).unwrap();
    let arr = json.as_array().unwrap();
    assert!(arr.iter().all(|r| r["seed"] == 7));
}

#[test]
fn verify_with_zero_trials_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(rmhd(&["verify", "--trials", "0"], tmp.path()).status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rmhd"))
        .args(["verify", "--trials", "10"])
        .current_dir(tmp.path())
        .env("RMHD_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
