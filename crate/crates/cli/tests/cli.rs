use std::path::Path;
use std::process::{Command, Output};

use opval_core::dyadic::{DyadicInterval, Grid, StepFunction};
use opval_core::json::step_function_to_json;
use opval_core::matrix::MatrixValue;
use opval_core::wavelet::{wavelet_eval, WaveletBasis};
use serde_json::Value;

fn opval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opval")).args(args).output().expect("opval runs")
}

fn write_fn(dir: &Path, name: &str, f: &StepFunction) -> String {
    let path = dir.join(name);
    std::fs::write(&path, step_function_to_json(f)).unwrap();
    path.display().to_string()
}

fn haar_h() -> StepFunction {
    let i = DyadicInterval::new(0, 0);
    StepFunction::from_fn(Grid::new(1, 3, 0, 1).unwrap(), |x| MatrixValue::identity(1).scale(wavelet_eval(&WaveletBasis::haar(), &i, x))).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn gen_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = opval(&["gen", "--seed", "3", "--dim", "2", "--depth", "3", "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 16);
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap());
    }
}

#[test]
fn norms_of_haar_h_and_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let h = write_fn(tmp.path(), "h.json", &haar_h());
    let v = stdout_json(&opval(&["norms", &h]));
    assert!((v["H_c_1"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["BMO_c"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["LpMO_c_4"]["upper"].is_number());

    let z = write_fn(tmp.path(), "z.json", &StepFunction::zeros(Grid::new(2, 2, 0, 1).unwrap()));
    let v = stdout_json(&opval(&["norms", &z, "--p", "1,2"]));
    for key in ["L_1", "H_c_1", "H_r_2", "BMO"] {
        assert_eq!(v[key].as_f64(), Some(0.0), "{key}");
    }
    assert_eq!(v["H_1"]["upper"].as_f64(), Some(0.0));
}

#[test]
fn pair_reports_every_inequality() {
    let tmp = tempfile::tempdir().unwrap();
    let h = write_fn(tmp.path(), "h.json", &haar_h());
    let o = opval(&["pair", &h, &h]);
    assert!(o.status.success());
    let names: Vec<String> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(names[0], "pairing");
    assert!(names.iter().any(|n| n == "fefferman"));
    assert!(names.iter().any(|n| n.starts_with("hp_lpmo")));
}

#[test]
fn malformed_input_exits_2_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, r#"{"dim": 1, "depth": 1, "support": {"lo": 0, "hi": 1}, "cells": [[[[1, 0]]], [[["x", 0]]]]}"#).unwrap();
    let o = opval(&["norms", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cells[1]"), "{}", String::from_utf8_lossy(&o.stderr));

    let o = opval(&["norms", path.to_str().unwrap(), "--basis", "daubechies"]);
    assert_eq!(o.status.code(), Some(2));
    let o = opval(&["verify", "--depth", "40"]);
    assert_eq!(o.status.code(), Some(2));
}

const SMALL: &str = "sweep.pairs = 6\nsweep.instances = 6\nsweep.lemma = 6\nsweep.max_depth = 4\n";

#[test]
fn injected_fault_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, format!("{SMALL}inject_fault = calderon\n")).unwrap();
    let o = opval(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("calderon"));
}

#[test]
fn extra_exponents_add_reported_suites() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = tmp.path().join("report.jsonl");
    let o = opval(&["verify", "--config", cfg.to_str().unwrap(), "--p", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<Value> = std::fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let bg3 = lines.iter().find(|v| v["name"] == "bg_p3").expect("bg_p3 present");
    assert_eq!(bg3["asserted"], false);
    assert!(lines.iter().any(|v| v["name"] == "doob_p3"));
    assert!(lines.iter().any(|v| v["name"] == "calderon" && v["pass"] == true));
}
