use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qapoly")).args(args).output().expect("binary runs")
}

/// Runs a command expected to exit 0 and returns its report.
fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON report")
}

#[test]
fn report_envelope() {
    let r = report(&["affine-dim", "--n", "4"]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "affine-dim");
    assert_eq!(r["seed"], 42);
    assert_eq!(r["mode"], "exact");
    assert_eq!(r["verified"], true);
    assert!(r["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(r["results"]["affine_dimension"], 22);
    assert_eq!(r["results"]["formula"], 22);
}

#[test]
fn affine_dim_modp_at_five() {
    let r = report(&["affine-dim", "--n", "5", "--mode", "modp"]);
    assert_eq!(r["mode"], "modp");
    assert_eq!(r["results"]["affine_dimension"], 77);
}

#[test]
fn vertices_are_listed_one_based() {
    let r = report(&["vertices", "--n", "3"]);
    assert_eq!(r["results"]["count"], 6);
    let first = &r["results"]["vertices"][0]["sigma"];
    assert_eq!(first, &serde_json::json!([1, 2, 3]));
    let r = report(&["vertices", "--n", "8", "--count-only"]);
    assert_eq!(r["results"]["count"], 40320);
    assert!(r["results"].get("vertices").is_none());
}

#[test]
fn equations_hold_and_decode() {
    let r = report(&["check-equations", "--n", "4"]);
    assert_eq!(r["results"]["all_vertices_satisfy"], true);
    assert_eq!(r["results"]["decode_round_trip"], true);
    assert_eq!(r["results"]["solution_space_dimension"], 22);
}

#[test]
fn family_counts() {
    let r = report(&["gen-family", "--family", "nonneg", "--n", "6", "--count-only"]);
    assert_eq!(r["results"]["count"], 450);
    let r = report(&["gen-family", "--family", "mterm", "--m", "3", "--n", "6", "--count-only"]);
    assert_eq!(r["results"]["count"], 21600);
    assert_eq!(r["results"]["matches_formula"], true);
    let r = report(&["gen-family", "--family", "nonneg", "--n", "2"]);
    assert_eq!(r["results"]["members"].as_array().unwrap().len(), r["results"]["count"].as_u64().unwrap() as usize);
}

#[test]
fn certify_triple_member_is_a_facet() {
    let r = report(&["certify", "--n", "6", "--family", "triple", "--index", "0", "--mode", "modp"]);
    assert_eq!(r["results"]["verdict"], "facet");
    assert_eq!(r["results"]["tight_affine_dim"], 205);
}

#[test]
fn certify_from_file() {
    let r = report(&["certify", "--n", "6", "--ineq", &data("triple6.json")]);
    assert_eq!(r["results"]["valid"], true);
    assert_eq!(r["results"]["verdict"], "face");
}

#[test]
fn lemma_zero_holds_and_is_reproducible() {
    let args = ["lemma-zero", "--n", "6", "--trials", "100", "--seed", "42"];
    let a = report(&args);
    assert_eq!(a["results"]["held"], 100);
    assert_eq!(a["results"], report(&args)["results"]);
}

#[test]
fn connectivity_of_specs() {
    let r = report(&["connectivity", "--spec", &data("lemma2.json")]);
    assert_eq!(r["results"]["connected"], true);
    let r = report(&["connectivity", "--spec", &data("derangements3.json")]);
    assert_eq!(r["results"]["connected"], false);
    assert_eq!(r["results"]["components"], 2);
}

#[test]
fn insufficiency_at_five() {
    let r = report(&["insufficiency", "--n", "5", "--points", "50"]);
    assert_eq!(r["results"]["points_checked"], 50);
    assert_eq!(r["results"]["mixed_signs"], true);
    assert!(r["results"]["moment_rank"].as_u64().unwrap() < 120);
}

#[test]
fn bound_meets_enumerated_optimum() {
    let exact = report(&["solve-exact", "--instance", &data("small4.dat")]);
    assert_eq!(exact["results"]["optimum"], "78/1");
    assert_eq!(exact["results"]["permutation"], serde_json::json!([2, 1, 4, 3]));
    let r = report(&["bound", "--instance", &data("small4.dat"), "--brute-force"]);
    let bound = r["results"]["final_bound"].as_f64().unwrap();
    assert!((bound - 78.0).abs() < 1e-6);
    let r = report(&["bound", "--instance", &data("small4.dat"), "--exact", "--cuts", "triple"]);
    assert_eq!(r["results"]["rounds"][0]["exact_bound"], "78/1");
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("qapoly-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let r = report(&["affine-dim", "--n", "4", "--out", path.to_str().unwrap()]);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written, r);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn invalid_inequality_exits_one_with_a_report() {
    let out = run(&["certify", "--n", "4", "--ineq", &data("invalid4.json")]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verified"], false);
    assert_eq!(r["results"]["verdict"], "invalid");
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["affine-dim"]).status.code(), Some(2));
    assert_eq!(run(&["gen-family", "--family", "triple", "--n", "4"]).status.code(), Some(2));
    let out = run(&["solve-exact", "--instance", &data("bad.dat")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3, token 3"));
    assert_eq!(run(&["connectivity", "--spec", &data("missing.json")]).status.code(), Some(2));
}
