use std::fs;
use std::path::Path;

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = csys::cli::run(std::iter::once("csys").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn context_instance(dir: &TempDir) -> String {
    write(dir, "inst.json", r#"{"kind":"context","base_sizes":[2]}"#)
}

#[test]
fn check_passes_on_a_context_instance() {
    let dir = TempDir::new().unwrap();
    let inst = context_instance(&dir);
    let (code, out, _) = run(&["check", "--instance", &inst, "--max-len", "2", "--format", "json"]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let suites: Vec<&str> =
        v["suites"].as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(suites, ["c0_c", "prop_pullback"]);
}

#[test]
fn text_output_names_the_instance() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "unit.json", r#"{"kind":"unit"}"#);
    let (code, out, _) = run(&["check", "--instance", &inst, "--max-len", "3", "--sequential"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("instance "), "{out}");
}

#[test]
fn empty_seed_closes_to_the_point() {
    let dir = TempDir::new().unwrap();
    let inst = context_instance(&dir);
    let seed = write(&dir, "seed.json", r#"{"objects":[],"sections":[]}"#);
    let (code, out, _) = run(&["close", "--instance", &inst, "--seed", &seed, "--format", "json"]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["window"]["B"].as_array().unwrap().len(), 1);
    assert!(v["window"]["B_tilde"].as_array().unwrap().is_empty());
    assert!(v["window"]["frontier"].as_array().unwrap().is_empty());
}

#[test]
fn object_seed_reaches_the_bound() {
    let dir = TempDir::new().unwrap();
    let inst = context_instance(&dir);
    let seed = write(&dir, "seed.json", r#"{"objects":[[0]]}"#);
    let (code, out, _) =
        run(&["close", "--instance", &inst, "--seed", &seed, "--max-len", "3", "--format", "json"]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    // The δ chain from (t0): (), (t0), (t0,t0), (t0,t0,t0).
    assert_eq!(v["window"]["B"].as_array().unwrap().len(), 4);
    assert!(!v["window"]["frontier"].as_array().unwrap().is_empty());
}

#[test]
fn length_mismatch_fails_the_quotient() {
    let dir = TempDir::new().unwrap();
    let inst = context_instance(&dir);
    let rel = write(&dir, "rel.json", r#"{"ob_pairs":[[[0],[0,0]]]}"#);
    let (code, out, _) =
        run(&["quotient", "--instance", &inst, "--relation", &rel, "--max-len", "2", "--format", "json"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["quotient"].is_null());
    let checks = v["suites"][0]["checks"].as_array().unwrap();
    assert_eq!(checks[0]["status"], "fail");
}

#[test]
fn discrete_quotient_keeps_every_object() {
    let dir = TempDir::new().unwrap();
    let inst = context_instance(&dir);
    let rel = write(&dir, "rel.json", "{}");
    let out_path = dir.path().join("report.json");
    let out_arg = out_path.to_str().unwrap();
    let (code, stdout, _) = run(&[
        "quotient",
        "--instance",
        &inst,
        "--relation",
        &rel,
        "--max-len",
        "2",
        "--format",
        "json",
        "--out",
        out_arg,
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    // pt, (t0), (t0,t0).
    assert_eq!(v["quotient"]["objects"].as_array().unwrap().len(), 3);
}

#[test]
fn malformed_seed_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let inst = context_instance(&dir);
    let seed = write(&dir, "seed.json", "{not json");
    let (code, _, err) = run(&["close", "--instance", &inst, "--seed", &seed]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn ill_typed_seed_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let inst = context_instance(&dir);
    let seed = write(&dir, "seed.json", r#"{"objects":[[7]]}"#);
    let (code, _, _) = run(&["close", "--instance", &inst, "--seed", &seed]);
    assert_eq!(code, 2);
}

#[test]
fn missing_files_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let missing = missing.to_str().unwrap();
    assert_eq!(run(&["check", "--instance", missing]).0, 2);
    let inst = context_instance(&dir);
    assert_eq!(run(&["quotient", "--instance", &inst, "--relation", missing]).0, 2);
    assert!(!Path::new(missing).exists());
}

#[test]
fn bad_instance_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "inst.json", r#"{"kind":"context","base_sizes":[0]}"#);
    assert_eq!(run(&["check", "--instance", &inst]).0, 2);
}

#[test]
fn suite_all_fails_on_a_mutated_instance() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "inst.json", r#"{"kind":"context","base_sizes":[2],"mutation":"permute_q"}"#);
    let (code, out, _) = run(&["suite-all", "--instance", &inst, "--max-len", "2"]);
    assert_eq!(code, 1);
    assert!(out.contains("8/8 mutations caught"), "{out}");
}
