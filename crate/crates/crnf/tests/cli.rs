use std::path::Path;
use std::process::Command;

use crnf::cli::{EXIT_BASIS_MISMATCH, EXIT_FAILURE, EXIT_NEIGHBOURHOOD, EXIT_NOT_CONVERGED, EXIT_OK};
use serde_json::Value;

fn crnf(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_crnf")).current_dir(dir).args(args).output().expect("spawn crnf");
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn coeffs(v: &Value) -> Vec<[f64; 2]> {
    serde_json::from_value(v.clone()).unwrap()
}

fn max_diff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x[0] - y[0]).hypot(x[1] - y[1])).fold(0.0, f64::max)
}

fn max_abs(a: &[[f64; 2]]) -> f64 {
    a.iter().map(|x| x[0].hypot(x[1])).fold(0.0, f64::max)
}

#[test]
fn prefab_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(crnf(d, &["gen", "--degree", "6", "--kind", "prefab-normal-form", "--seed", "3", "--out", "pf.json"]), EXIT_OK);
    let input = json(&d.join("pf.json"));
    assert_eq!(input["kind"], "prefab-normal-form");
    assert!(input["y0"].is_object() && input["psi0"].is_object());
    assert_eq!(crnf(d, &["normal-form", "--degree", "6", "--in", "pf.json", "--out", "res.json"]), EXIT_OK);
    let res = json(&d.join("res.json"));
    assert_eq!(res["converged"], true);
    let y = coeffs(&res["y"]["coefficients"]);
    let y0 = coeffs(&input["y0"]["coefficients"]);
    assert!(max_diff(&y, &y0) <= 1e-6 * max_abs(&y0));
    let psi = coeffs(&res["psi"]["coeffs"]);
    let psi0 = coeffs(&input["psi0"]["coeffs"]);
    assert!(max_diff(&psi, &psi0) <= 1e-6 * max_abs(&psi0));

    let csv = std::fs::read_to_string(d.join("res.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config: {\"degree\":6"));
    assert!(lines.next().unwrap().starts_with("# input_sha256: "));
    assert_eq!(lines.next().unwrap(), "iter,chi_norm,xi_norm,trunc_mass");
}

#[test]
fn pullback_of_zero_has_vanishing_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(crnf(d, &["gen", "--degree", "6", "--kind", "pullback-of-zero", "--seed", "1", "--out", "p.json"]), EXIT_OK);
    assert!(json(&d.join("p.json"))["x0"].is_object());
    assert_eq!(crnf(d, &["normal-form", "--degree", "6", "--in", "p.json", "--out", "r.json"]), EXIT_OK);
    let res = json(&d.join("r.json"));
    let top = res["norms"].as_array().unwrap().last().unwrap().clone();
    assert!(top["y"].as_f64().unwrap() + top["psi"].as_f64().unwrap() < 1e-6, "{top}");
}

#[test]
fn zero_input_gives_zero_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(crnf(d, &["gen", "--degree", "6", "--out", "r.json"]), EXIT_OK);
    let mut v = json(&d.join("r.json"));
    for c in v["phi"]["coeffs"].as_array_mut().unwrap() {
        *c = serde_json::json!([0.0, 0.0]);
    }
    std::fs::write(d.join("z.json"), serde_json::to_vec(&v).unwrap()).unwrap();
    assert_eq!(crnf(d, &["normal-form", "--degree", "6", "--in", "z.json", "--out", "o.json"]), EXIT_OK);
    let res = json(&d.join("o.json"));
    for key in [&res["x"]["coefficients"], &res["y"]["coefficients"], &res["psi"]["coeffs"]] {
        assert_eq!(max_abs(&coeffs(key)), 0.0);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(crnf(d, &["gen", "--degree", "6", "--eps", "1.0", "--seed", "2", "--out", "big.json"]), EXIT_OK);
    assert_eq!(crnf(d, &["normal-form", "--degree", "6", "--in", "big.json", "--out", "o.json"]), EXIT_NEIGHBOURHOOD);
    assert!(!d.join("o.json").exists());

    assert_eq!(crnf(d, &["gen", "--degree", "6", "--seed", "2", "--out", "r.json"]), EXIT_OK);
    assert_eq!(
        crnf(d, &["normal-form", "--degree", "6", "--max-iter", "1", "--in", "r.json", "--out", "o.json"]),
        EXIT_NOT_CONVERGED
    );
    assert_eq!(json(&d.join("o.json"))["converged"], false);
    assert_eq!(crnf(d, &["normal-form", "--degree", "8", "--in", "r.json", "--out", "o.json"]), EXIT_BASIS_MISMATCH);
    assert_eq!(crnf(d, &["verify", "--degree", "3", "--out", "v.csv"]), EXIT_FAILURE);
    assert_eq!(crnf(d, &["normal-form", "--degree", "6", "--in", "missing.json", "--out", "o.json"]), EXIT_FAILURE);
    assert_eq!(crnf(d, &["gen", "--degree", "6", "--kind", "bogus", "--out", "b.json"]), EXIT_FAILURE);
}

#[test]
fn verify_passes_every_identity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(crnf(d, &["verify", "--degree", "6", "--out", "v.csv"]), EXIT_OK);
    let text = std::fs::read_to_string(d.join("v.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{text}");
}

#[test]
fn slice_with_identity_generator() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(crnf(d, &["gen", "--degree", "6", "--kind", "prefab-normal-form", "--out", "pf.json"]), EXIT_OK);
    assert_eq!(crnf(d, &["slice", "--degree", "6", "--in", "pf.json", "--out", "s.csv"]), EXIT_OK);
    let text = std::fs::read_to_string(d.join("s.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[1], "0.0");
        assert_eq!(&rec[2], "0.0");
    }
}

#[test]
fn slice_with_contact_generator() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(crnf(d, &["gen", "--degree", "6", "--kind", "prefab-normal-form", "--out", "pf.json"]), EXIT_OK);
    assert_eq!(crnf(d, &["gen", "--degree", "6", "--kind", "contact-generator", "--seed", "9", "--out", "g.json"]), EXIT_OK);
    let args = ["slice", "--degree", "6", "--eps", "2e-2", "--in", "pf.json", "--generator", "g.json", "--out", "s.csv"];
    assert_eq!(crnf(d, &args), EXIT_OK);
}

#[test]
fn scan_rows_are_finite() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(crnf(d, &["scan", "--degree", "6", "--s", "2", "--kind", "composition", "--out", "s.csv"]), EXIT_OK);
    let text = std::fs::read_to_string(d.join("s.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["family", "seed", "N", "s", "ratio"]);
    let mut count = 0;
    for rec in rdr.records() {
        let r: f64 = rec.unwrap()[4].parse().unwrap();
        assert!(r.is_finite());
        count += 1;
    }
    assert_eq!(count, 8 * 2);
}

#[test]
fn rerun_is_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["gen", "--degree", "6", "--kind", "random", "--seed", "42", "--out", "a.json"];
    assert_eq!(crnf(d, &args), EXIT_OK);
    let first = std::fs::read(d.join("a.json")).unwrap();
    assert_eq!(crnf(d, &args), EXIT_OK);
    assert_eq!(first, std::fs::read(d.join("a.json")).unwrap());
}
