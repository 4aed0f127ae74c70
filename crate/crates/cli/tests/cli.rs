use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn areabound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_areabound")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect()
}

#[test]
fn eval_origin_field() {
    let out = areabound(&["field", "eval", "--k", "2", "--y", "0,0,0", "--x", "0.5,0,0"]);
    assert_eq!(code(&out), 0);
    let w = floats(&json(&out)["W"]);
    assert!((w[0] + 0.75).abs() < 1e-15 && w[1] == 0.0 && w[2] == 0.0);
}

#[test]
fn eval_vanishes_on_sphere() {
    let out = areabound(&["field", "eval", "--k", "3", "--y", "0.3,0,0", "--x", "1,0,0"]);
    assert_eq!(code(&out), 0);
    assert!(floats(&json(&out)["W"]).iter().all(|c| c.abs() <= 1e-12));
}

#[test]
fn eval_with_frame_reports_deficit() {
    let out = areabound(&["field", "eval", "--k", "2", "--y", "-0.2,0.1,0", "--x", "0.3,0,0.4", "--frame", "1,0,0;0,1,0"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let (div, deficit) = (v["div"].as_f64().unwrap(), v["deficit"].as_f64().unwrap());
    assert!((div + deficit - 1.0).abs() < 1e-15 && deficit >= 0.0);
    // Q = 1 - 2<x,y> + |y|^2
    assert!((v["Q"].as_f64().unwrap() - (1.0 + 0.12 + 0.05)).abs() < 1e-15);
}

#[test]
fn eval_usage_errors() {
    assert_eq!(code(&areabound(&["field", "eval", "--y", "0,0,0", "--x", "0.5,0,0"])), 2);
    assert_eq!(code(&areabound(&["field", "eval", "--k", "2", "--y", "0.1,0,0", "--x", "0.1,0,0"])), 2);
    assert_eq!(code(&areabound(&["field", "eval", "--k", "2", "--y", "0,0", "--x", "0.1,0,0"])), 2);
    assert_eq!(code(&areabound(&["field", "eval", "--k", "2", "--n", "4", "--y", "0,0,0", "--x", "0.1,0,0"])), 2);
    assert_eq!(code(&areabound(&["field", "eval", "--k", "2", "--y", "0,0,0", "--x", "0.1,0,0", "--frame", "1,0,0"])), 2);
}

#[test]
fn fuzz_passes_and_repeats_bytewise() {
    let args = ["field", "fuzz", "--samples", "3000", "--seed", "17"];
    let a = areabound(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let v = json(&a);
    assert!(v["min_deficit"].as_f64().unwrap() >= 0.0);
    assert!(v["fd_max_rel_err"].as_f64().unwrap() <= 1e-6);
    assert_eq!(a.stdout, areabound(&args).stdout);
    let single = Command::new(env!("CARGO_BIN_EXE_areabound")).args(args).env("AREABOUND_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn fuzz_flags() {
    let out = areabound(&["field", "fuzz", "--samples", "200", "--seed", "3", "--ymax", "0.999"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["conditioning_warning"], Value::Bool(true));
    assert_eq!(code(&areabound(&["field", "fuzz", "--samples", "0", "--seed", "1"])), 2);
    assert_eq!(code(&areabound(&["field", "fuzz", "--samples", "10"])), 2);
    assert_eq!(code(&areabound(&["field", "fuzz", "--seed", "1", "--k-set", "6", "--n-set", "3"])), 2);
}

#[test]
fn surface_area_oracles() {
    let disk = json(&areabound(&["surface", "--family", "flatdisk", "--d", "0.6", "--k", "2"]));
    assert!((disk["area"].as_f64().unwrap() - 2.0106193).abs() < 1e-7);
    let cone = json(&areabound(&["surface", "--family", "cone"]));
    assert!((cone["area"].as_f64().unwrap() - 6.5797363).abs() < 1e-7);
    let cat = json(&areabound(&["surface", "--family", "catenoid", "--c", "0.5"]));
    let (a, q) = (cat["area"].as_f64().unwrap(), cat["quadrature_area"].as_f64().unwrap());
    assert!((a - q).abs() <= 1e-12 * a);
}

#[test]
fn surface_parameter_errors() {
    let bad = areabound(&["surface", "--family", "catenoid", "--c", "1.5"]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("c = 1.5"));
    // c = 0.9 still has a boundary height
    assert_eq!(code(&areabound(&["surface", "--family", "catenoid", "--c", "0.9"])), 0);
    assert_eq!(code(&areabound(&["surface", "--family", "flatdisk", "--d", "0.2", "--c", "0.5"])), 2);
    assert_eq!(code(&areabound(&["surface", "--family", "flatdisk"])), 2);
    assert_eq!(code(&areabound(&["surface", "--family", "flatdisk", "--d", "1.2"])), 2);
    assert_eq!(code(&areabound(&["surface", "--family", "cone", "--k", "2"])), 2);
    assert_eq!(code(&areabound(&["surface", "--family", "flatdisk", "--orthogonal-to-y"])), 2);
}

#[test]
fn surface_axes_and_center() {
    let out = areabound(&["surface", "--family", "flatdisk", "--center", "0,0,0.6", "--axes", "1,1,0;0,0.5,0", "--y", "0,0,0.6"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["margin"].as_f64().unwrap().abs() < 1e-12);
}

/// Exports the flat disk through (0, 0, 0.6) and moves interior vertices off
/// the plane by a deterministic pattern.
fn perturbed_disk(dir: &Path, rings: usize) -> std::path::PathBuf {
    let path = dir.join("disk.obj");
    let res = rings.to_string();
    let out = areabound(&[
        "surface", "--family", "flatdisk", "--orthogonal-to-y", "--y", "0,0,0.6", "--resolution", &res,
        "--export", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(dir.join("disk.obj.json")).unwrap()).unwrap();
    let fixed: Vec<usize> = sidecar["boundary"]
        .as_array()
        .unwrap()
        .iter()
        .chain([&sidecar["pinned"]["index"]])
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    let mut index = 0;
    let text: Vec<String> = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(|line| {
            if !line.starts_with("v ") {
                return line.to_string();
            }
            index += 1;
            let mut c: Vec<f64> = line[2..].split_whitespace().map(|t| t.parse().unwrap()).collect();
            if !fixed.contains(&index) {
                c[2] += 0.05 * (index as f64 * 1.7).sin();
            }
            format!("v {:.17e} {:.17e} {:.17e}", c[0], c[1], c[2])
        })
        .collect();
    fs::write(&path, text.join("\n") + "\n").unwrap();
    path
}

#[test]
fn solve_flattens_perturbed_disk() {
    let dir = tempfile::tempdir().unwrap();
    let input = perturbed_disk(dir.path(), 16);
    let out_mesh = dir.path().join("min.obj");
    let report_path = dir.path().join("report.json");
    let out = areabound(&[
        "solve", "--input", input.to_str().unwrap(), "--y", "0,0,0.6", "--out", out_mesh.to_str().unwrap(),
        "--report", report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report, serde_json::from_str::<Value>(&fs::read_to_string(&report_path).unwrap()).unwrap());
    let area = report["final_area"].as_f64().unwrap();
    assert!((area - 0.64 * PI).abs() < 5e-3 * 0.64 * PI);
    let history = floats(&report["area_history"]);
    assert!(history.windows(2).all(|w| w[1] <= w[0]));
    assert!(dir.path().join("min.obj.json").exists());

    let verify = areabound(&["verify", "--input", out_mesh.to_str().unwrap()]);
    assert_eq!(code(&verify), 0, "{}", String::from_utf8_lossy(&verify.stdout));
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = perturbed_disk(dir.path(), 8);
    let out_mesh = dir.path().join("min.obj");
    let short = areabound(&["solve", "--input", input.to_str().unwrap(), "--iters", "1", "--out", out_mesh.to_str().unwrap()]);
    assert_eq!(code(&short), 1);
    assert_eq!(json(&short)["converged"], Value::Bool(false));

    let bad = dir.path().join("bad.obj");
    fs::write(&bad, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n").unwrap();
    let out = areabound(&["solve", "--input", bad.to_str().unwrap(), "--out", out_mesh.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let wrong_pin = areabound(&["solve", "--input", input.to_str().unwrap(), "--y", "0,0,0.5", "--out", out_mesh.to_str().unwrap()]);
    assert_eq!(code(&wrong_pin), 2);
}

#[test]
fn verify_equality_case() {
    let out = areabound(&["verify", "--family", "flatdisk", "--orthogonal-to-y", "--y", "0.3,0,0.4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["margin"].as_f64().unwrap().abs() <= 1e-10);
    assert!(v["equality_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["schema_version"].as_u64(), Some(1));
}

#[test]
fn verify_catenoid_strict() {
    let out = areabound(&["verify", "--family", "catenoid", "--c", "0.5", "--density", "16"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_instance_and_usage_errors() {
    let miss = areabound(&["verify", "--family", "flatdisk", "--d", "0.1", "--y", "0,0,0.6"]);
    assert_eq!(code(&miss), 2);
    assert!(String::from_utf8_lossy(&miss.stderr).contains("does not pass through y"));
    assert_eq!(code(&areabound(&["verify", "--family", "catenoid", "--format", "csv"])), 2);
    assert_eq!(code(&areabound(&["verify", "--family", "catenoid", "--r-ladder", "0.01"])), 2);
    assert_eq!(code(&areabound(&["verify", "--family", "catenoid", "--y", "0.5,0"])), 2);
    assert_eq!(code(&areabound(&["verify"])), 2);
}

#[test]
fn verify_failed_check_exits_one() {
    // a deliberately impossible flux tolerance
    let out = areabound(&["verify", "--family", "catenoid", "--density", "8", "--tol-limit", "0"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["verdicts"]["flux_limit"], Value::Bool(false));
}

#[test]
fn verify_csv_writes_both() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("v.json");
    let out = areabound(&["verify", "--family", "flatdisk", "--d", "0", "--format", "csv", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("r,flux\n"));
    assert_eq!(csv.lines().count(), 4);
    let v: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["flux_values"].as_array().unwrap().len(), 3);
}
