use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use hyperpolygon_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hp_last_error()) }.to_str().unwrap().to_string()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { hp_string_free(p) };
    s
}

fn quiver(json: &str) -> (HpStatus, *mut HpQuiver) {
    let c = CString::new(json).unwrap();
    let mut q = ptr::null_mut();
    let status = unsafe { hp_quiver_from_json(c.as_ptr(), &mut q) };
    (status, q)
}

const D4: &str = r#"{"arms": [[1,2],[1,2],[1,2],[1,2]], "loops": 0}"#;
const D4_ALPHA: [f64; 4] = [1.0, 1.1, 1.2, 1.3];

#[test]
fn quiver_queries() {
    let (status, q) = quiver(D4);
    assert_eq!(status, HpStatus::Ok);
    let (mut dp, mut dx, mut gt, mut n) = (0i64, 0i64, 0i64, 0usize);
    unsafe {
        assert_eq!(hp_quiver_dims(q, &mut dp, &mut dx), HpStatus::Ok);
        assert_eq!(hp_quiver_count_gt(q, &mut gt), HpStatus::Ok);
        assert_eq!(hp_quiver_n_arms(q, &mut n), HpStatus::Ok);
        hp_quiver_free(q);
    }
    assert_eq!((dp, dx, gt, n), (1, 2, 1, 4));
}

#[test]
fn comet_constructor_and_unsupported_flags() {
    let mut q = ptr::null_mut();
    let mut dx = 0i64;
    let mut dp = 0i64;
    unsafe {
        assert_eq!(hp_quiver_comet(3, 4, 0, true, &mut q), HpStatus::Ok);
        assert_eq!(hp_quiver_dims(q, &mut dp, &mut dx), HpStatus::Ok);
        hp_quiver_free(q);
    }
    assert_eq!(dx, 8);
    let (status, q) = quiver(r#"{"arms": [[1,2,4]], "loops": 1}"#);
    assert_eq!(status, HpStatus::Ok);
    let mut gt = 0i64;
    assert_eq!(unsafe { hp_quiver_count_gt(q, &mut gt) }, HpStatus::InvalidInput);
    assert!(last_error().contains("neither complete nor minimal"));
    unsafe { hp_quiver_free(q) };
}

#[test]
fn invalid_inputs() {
    let (status, q) = quiver(r#"{"arms": [[1,2],[1,3]], "loops": 0}"#);
    assert_eq!(status, HpStatus::InvalidInput);
    assert!(q.is_null());
    assert!(last_error().contains("central ranks"));
    assert_eq!(quiver("not json").0, HpStatus::InvalidInput);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hp_quiver_from_json(ptr::null(), &mut out) }, HpStatus::NullPointer);
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { hp_quiver_from_json(bad.as_ptr().cast(), &mut out) }, HpStatus::InvalidUtf8);
    let mut x = 0.0;
    assert_eq!(unsafe { hp_solution_residual(ptr::null(), &mut x) }, HpStatus::NullPointer);
    unsafe {
        hp_quiver_free(ptr::null_mut());
        hp_solution_free(ptr::null_mut());
        hp_string_free(ptr::null_mut());
    }
}

#[test]
fn solve_round_trip() {
    let (_, q) = quiver(D4);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hp_solve(q, D4_ALPHA.as_ptr(), 4, 1, 0, &mut s) }, HpStatus::Ok);
    let (mut res, mut dim, mut gap) = (1.0, 0i64, 0.0);
    unsafe {
        assert_eq!(hp_solution_residual(s, &mut res), HpStatus::Ok);
        assert_eq!(hp_solution_dimension(s, &mut dim, &mut gap), HpStatus::Ok);
    }
    assert!(res < 1e-10);
    assert_eq!(dim, 2);
    assert!(gap > 1e3);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hp_solution_to_json(s, &mut json) }, HpStatus::Ok);
    let text = take_string(json);
    let c = CString::new(text.clone()).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { hp_solution_from_json(c.as_ptr(), &mut t) }, HpStatus::Ok);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { hp_solution_to_json(t, &mut again) }, HpStatus::Ok);
    assert_eq!(take_string(again), text);
    unsafe {
        hp_solution_free(t);
        hp_solution_free(s);
        hp_quiver_free(q);
    }
}

#[test]
fn polygon_and_bad_levels() {
    let (_, q) = quiver(D4);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hp_solve_polygon(q, D4_ALPHA.as_ptr(), 4, 0, 0, &mut s) }, HpStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hp_solution_to_json(s, &mut json) }, HpStatus::Ok);
    assert!(take_string(json).contains("\"polygon\""));
    unsafe { hp_solution_free(s) };

    let short = [1.0, 1.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hp_solve(q, short.as_ptr(), 2, 0, 0, &mut s) }, HpStatus::InvalidInput);
    assert!(s.is_null());
    assert_eq!(unsafe { hp_solve(q, ptr::null(), 4, 0, 0, &mut s) }, HpStatus::NullPointer);
    unsafe { hp_quiver_free(q) };
}

#[test]
fn not_converged_still_returns_best() {
    let (_, q) = quiver(r#"{"arms": [[1,2]], "loops": 0}"#);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hp_solve(q, [1.0].as_ptr(), 1, 0, 2, &mut s) }, HpStatus::NotConverged);
    assert!(!s.is_null());
    assert!(last_error().contains("not converged"));
    let mut res = 0.0;
    assert_eq!(unsafe { hp_solution_residual(s, &mut res) }, HpStatus::Ok);
    assert!(res > 1e-3);
    unsafe {
        hp_solution_free(s);
        hp_quiver_free(q);
    }
}

#[test]
fn brane_report() {
    let (_, q) = quiver(D4);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { hp_brane_report_json(q, 5, 3, &mut out) }, HpStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    let kinds: Vec<&str> =
        v["structures"].as_array().unwrap().iter().map(|s| s["classification"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["B", "A", "A"]);
    assert_eq!(unsafe { hp_brane_report_json(q, 0, 3, &mut out) }, HpStatus::InvalidInput);
    unsafe { hp_quiver_free(q) };
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/hyperpolygon.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    [deps.join("libhyperpolygon_ffi.a"), deps.parent()?.join("libhyperpolygon_ffi.a")].into_iter().find(|p| p.exists())
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().map(|o| o.status.success()).unwrap_or(false)
}

#[test]
fn c_program_links_and_runs() {
    let (Some(lib), true) = (static_lib(), have_cc()) else {
        eprintln!("skipping: no C compiler or static library");
        return;
    };
    let dir = tempfile::TempDir::new().unwrap();
    let exe = dir.path().join("smoke");
    let src = crate_dir().join("tests/c/smoke.c");
    let include = crate_dir().join("include");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "compiling {}", Path::new(&src).display());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
