use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn bethelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bethelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn with_config(command: &str, name: &str, extra: &[&str]) -> Output {
    let cfg = fixture(name);
    let mut args = vec![command, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    bethelab(&args)
}

#[test]
fn equations_latex_for_fundamental_chain() {
    let o = with_config("equations", "xxx3.json", &["--magnons", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\\left[e_{1}\\left(\\lambda^{(1)}_n\\right)\\right]^{3}"), "{text}");
    assert!(text.contains("m\\neq n"), "{text}");
}

#[test]
fn equations_json_lists_impurity_factor() {
    let o = with_config("equations", "impurity.json", &["--format", "json", "--magnons", "1=2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let factors = v["levels"][0]["rhs"]["factors"].as_array().unwrap();
    assert_eq!(factors.len(), 2);
    let shifts: Vec<f64> = factors.iter().map(|f| f["operand"]["shift"][0].as_f64().unwrap()).collect();
    assert!(shifts.iter().any(|s| (s - 0.4).abs() < 1e-12), "{shifts:?}");
}

#[test]
fn gl3_equations_have_two_levels() {
    let o = with_config("equations", "gl3.json", &["--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["levels"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_closed_and_open() {
    for name in ["xxx3.json", "impurity.json", "open.json"] {
        let o = with_config("verify", name, &[]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        let v = json(&o);
        assert_eq!(v["pass"], Value::Bool(true));
        assert_eq!(v["open"], Value::Bool(name == "open.json"));
    }
}

#[test]
fn spectrum_is_covered() {
    let o = with_config("spectrum", "xxx3.json", &["--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(v["dimension"], 8);
    assert!(v["coverage"].as_f64().unwrap() > 0.999);
}

#[test]
fn open_spectrum_single_sector() {
    let o = with_config("spectrum", "open.json", &["--magnons", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(json(&o)["unmatched_solutions"], 0);
}

#[test]
fn xxx_hamiltonian_and_matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("h.json");
    let o = with_config("hamiltonian", "xxx3.json", &["--matrix", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(v["which"], "xxx");
    assert_eq!(v["spectrum"].as_array().unwrap().len(), 8);
    let dump: Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(dump["rows"], 8);
    assert_eq!(dump["entries"].as_array().unwrap().len(), 64);
}

#[test]
fn impurity_reference_fits_are_reported() {
    let o = with_config("hamiltonian", "impurity.json", &[]);
    let v = json(&o);
    assert_eq!(v["which"], "impurity");
    let refs = v["references"].as_array().unwrap();
    let corrected = refs.iter().find(|r| r["against"] == "corrected_expansion").unwrap();
    assert!(corrected["fit"]["residual"].as_f64().unwrap() >= 0.0);
}

#[test]
fn zarembo_commutes_with_fused_transfer() {
    let o = with_config("hamiltonian", "zarembo.json", &["--which", "zarembo"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v = json(&o);
    let fused = v["commutation"].as_array().unwrap().iter().find(|c| c["family"] == "fused_transfer").unwrap();
    assert!(fused["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eq.tex");
    let o = with_config("equations", "xxx3.json", &["--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().contains("e_{2}"));
}

#[test]
fn bad_weight_exits_with_usage_code() {
    let o = with_config("verify", "bad_weight.json", &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sites[1].weight"), "{err}");
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{\"rank\": 2,\n\"hbar\": [1, 0],\n\"sites\": [}\n").unwrap();
    let o = bethelab(&["verify", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn usage_errors() {
    assert_eq!(with_config("hamiltonian", "xxx3.json", &["--which", "nope"]).status.code(), Some(2));
    assert_eq!(with_config("equations", "xxx3.json", &["--magnons", "1,1"]).status.code(), Some(2));
    assert_eq!(with_config("hamiltonian", "open.json", &["--which", "spin_s"]).status.code(), Some(2));
    assert_eq!(bethelab(&["frobnicate", "--config", "x.json"]).status.code(), Some(2));
}
