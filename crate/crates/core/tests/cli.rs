use std::path::{Path, PathBuf};

use hyperpolygon::cli::run_with;
use hyperpolygon::io::{load_solution, to_json_string, SolutionDoc};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hyperpolygon").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn json(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn d4(dir: &TempDir) -> PathBuf {
    write(dir, "d4.json", r#"{"arms": [[1,2],[1,2],[1,2],[1,2]], "loops": 0}"#)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn solve_d4(dir: &TempDir) -> PathBuf {
    let q = d4(dir);
    let out = dir.path().join("sol.json");
    let r = run(&["solve", s(&q), "--alpha", "1,1.1,1.2,1.3", "--seed", "3", "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    out
}

#[test]
fn dims_of_d4() {
    let dir = TempDir::new().unwrap();
    let r = run(&["dims", s(&d4(&dir))]);
    assert_eq!(r.code, 0);
    let v = json(&r);
    assert_eq!(v["dim_P"], 1);
    assert_eq!(v["dim_X"], 2);
    assert_eq!(v["gt_count"], 1);
    assert_eq!(v["empty_likely"], false);
    assert_eq!(v["stamp"]["quiver_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn dims_of_loops_only_quiver() {
    let dir = TempDir::new().unwrap();
    let q = write(&dir, "q.json", r#"{"arms": [], "loops": 2, "rank": 2}"#);
    let v = json(&run(&["dims", s(&q)]));
    assert_eq!(v["dim_X"], 6);
}

#[test]
fn solve_then_verify() {
    let dir = TempDir::new().unwrap();
    let sol = solve_d4(&dir);
    let doc = load_solution(&sol).unwrap();
    assert!(doc.residual.aggregate < 1e-10);
    let dim = doc.dimension.as_ref().unwrap();
    assert_eq!(dim.quotient_complex, Some(2));
    assert!(!dim.singular);
    let r = run(&["verify", s(&sol)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r)["passed"], true);
}

#[test]
fn solve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let q = d4(&dir);
    let a = run(&["solve", s(&q), "--alpha", "1,1.1,1.2,1.3", "--seed", "5"]);
    let b = run(&["solve", s(&q), "--alpha", "1,1.1,1.2,1.3", "--seed", "5"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn corrupted_solution_fails_verification() {
    let dir = TempDir::new().unwrap();
    let sol = solve_d4(&dir);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    v["representation"]["arms"][0][0]["x"][0][0][0][0] = Value::from(5.0);
    std::fs::write(&sol, v.to_string()).unwrap();
    let r = run(&["verify", s(&sol)]);
    assert_eq!(r.code, 3);
    assert_eq!(json(&r)["passed"], false);
    assert!(r.stderr.contains("verification failed"));
}

#[test]
fn solution_json_round_trip_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    let sol = solve_d4(&dir);
    let doc: SolutionDoc = load_solution(&sol).unwrap();
    let again: SolutionDoc = serde_json::from_str(&to_json_string(&doc, false).unwrap()).unwrap();
    let (q1, r1) = doc.parts().unwrap();
    let (q2, r2) = again.parts().unwrap();
    assert_eq!(q1, q2);
    assert_eq!(r1, r2);
    assert_eq!(doc.alpha, again.alpha);
}

#[test]
fn polygon_has_expected_sides() {
    let dir = TempDir::new().unwrap();
    let r = run(&["polygon", s(&d4(&dir)), "--alpha", "1,1.1,1.2,1.3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    let p = &v["polygon"];
    assert!(p["closure_defect"].as_f64().unwrap() < 1e-10);
    for (l, e) in p["arm_lengths"].as_array().unwrap().iter().zip(p["expected_arm_lengths"].as_array().unwrap()) {
        assert!((l.as_f64().unwrap() - e.as_f64().unwrap()).abs() < 1e-8);
    }
    assert_eq!(v["solver"]["mode"], "polygon");
}

#[test]
fn higgs_on_solution() {
    let dir = TempDir::new().unwrap();
    let sol = solve_d4(&dir);
    let r = run(&["higgs", s(&sol), "--punctures", "0,1,-1+2i,3i", "--samples", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert!(v["residue_sum_defect"].as_f64().unwrap() < 1e-10);
    for d in v["nilpotency_defects"].as_array().unwrap() {
        assert!(d.as_f64().unwrap() < 1e-8);
    }
    let samples = v["char_samples"].as_array().unwrap();
    assert_eq!(samples.len(), 3);
    // trace-free residues: the linear coefficient vanishes
    for c in samples {
        let c1 = &c["coefficients"][0];
        assert!(c1[0].as_f64().unwrap().abs() < 1e-10 && c1[1].as_f64().unwrap().abs() < 1e-10);
    }
    let dup = run(&["higgs", s(&sol), "--punctures", "0,0,1,2"]);
    assert_eq!(dup.code, 2);
}

#[test]
fn gt_on_solution() {
    let dir = TempDir::new().unwrap();
    let sol = solve_d4(&dir);
    for policy in ["corollary", "tally-greedy"] {
        let r = run(&["gt", s(&sol), "--policy", policy]);
        assert_eq!(r.code, 0, "{policy}: {}", r.stderr);
        let v = json(&r);
        assert_eq!(v["independence"]["rank"], 1);
        assert_eq!(v["tally"], 1);
        assert!(v["commutation"]["max_normalized"].as_f64().unwrap() < 1e-6);
    }
}

#[test]
fn brane_report() {
    let dir = TempDir::new().unwrap();
    let r = run(&["brane", s(&d4(&dir)), "--samples", "10", "--seed", "2"]);
    assert_eq!(r.code, 0);
    let v = json(&r);
    let kinds: Vec<&str> =
        v["structures"].as_array().unwrap().iter().map(|s| s["classification"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["B", "A", "A"]);
    assert_eq!(v["samples"], 10);
}

#[test]
fn wildify_with_solution() {
    let dir = TempDir::new().unwrap();
    let sol = solve_d4(&dir);
    let r = run(&["wildify", s(&d4(&dir)), "--solution", s(&sol)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["wild"]["arms"], serde_json::json!([[1, 2]]));
    assert_eq!(v["wild"]["multiplicities"], serde_json::json!([[4]]));
    assert!(v["wild_residual"]["aggregate"].as_f64().unwrap() < 1e-10);
    assert!((v["merged_level"].as_f64().unwrap() - 4.6).abs() < 1e-12);
}

#[test]
fn validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"arms": [[1,2],[1,3]], "loops": 0}"#);
    let r = run(&["dims", s(&bad)]);
    assert_eq!(r.code, 2);
    assert!(!r.stderr.is_empty());
    let unknown = write(&dir, "u.json", r#"{"arms": [[1,2]], "loops": 1, "colour": 3}"#);
    assert_eq!(run(&["dims", s(&unknown)]).code, 2);
    assert_eq!(run(&["solve", s(&d4(&dir)), "--alpha", "1,1"]).code, 2);
    assert_eq!(run(&["solve", s(&d4(&dir)), "--alpha", "1,-1,1,1"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["dims", "/nonexistent/q.json"]).code, 2);
}

#[test]
fn unsolvable_exits_3() {
    let dir = TempDir::new().unwrap();
    let q = write(&dir, "one.json", r#"{"arms": [[1,2]], "loops": 0}"#);
    let r = run(&["solve", s(&q), "--alpha", "1", "--starts", "2", "--max-iter", "50"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("not converged"));
    assert_eq!(json(&r)["solver"]["converged"], false);
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("dims.json");
    let r = run(&["dims", s(&d4(&dir)), "--out", s(&out)]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["dim_X"], 2);
}
