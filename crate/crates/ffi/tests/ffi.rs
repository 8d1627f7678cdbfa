use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tds_spectrum_ffi::*;

fn c(re: f64, im: f64) -> TdsComplex {
    TdsComplex { re, im }
}

fn last_error() -> String {
    let p = tds_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn example() -> *mut TdsSystem {
    let a = [0.0, 1.0, -5.0, 10.0];
    let b = [0.0, 0.0, -3.0, -3.0];
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { tds_system_new(2, a.as_ptr(), b.as_ptr(), 1.0, &mut sys) }, TdsStatus::Ok);
    sys
}

#[test]
fn roots_and_counts() {
    let sys = example();
    unsafe {
        assert_eq!(tds_system_order(sys), 2);
        let mut report = ptr::null_mut();
        assert_eq!(tds_find_roots(sys, -4.0, 2.0, -1.0, 8.0, 0.05, 1e-10, &mut report), TdsStatus::Ok);
        assert_eq!(tds_report_len(report), 3);
        let (mut root, mut res) = (c(0.0, 0.0), 0.0);
        assert_eq!(tds_report_root(report, 0, &mut root, &mut res), TdsStatus::Ok);
        assert!((root.re - 0.8070).abs() < 5e-4 && root.im == 0.0 && res <= 1e-10);
        assert_eq!(tds_report_root(report, 3, &mut root, &mut res), TdsStatus::OutOfRange);
        assert!(last_error().contains("out of range"));
        tds_report_free(report);

        let mut n = 0;
        assert_eq!(tds_count_roots(sys, -4.0, 2.0, -1.0, 8.0, 400, &mut n), TdsStatus::Ok);
        assert_eq!(n, 3);

        let mut h = c(1.0, 1.0);
        assert_eq!(tds_char_fn(sys, c(0.0, 0.0), &mut h), TdsStatus::Ok);
        assert_eq!((h.re, h.im), (8.0, 0.0));
        tds_system_free(sys);
    }
}

#[test]
fn lambert_and_branches() {
    unsafe {
        let mut w = c(0.0, 0.0);
        assert_eq!(tds_lambert_w(0, c(std::f64::consts::E, 0.0), &mut w), TdsStatus::Ok);
        assert!((w.re - 1.0).abs() < 1e-15);
        assert_eq!(tds_lambert_w(-1, c(0.0, 0.0), &mut w), TdsStatus::Domain);
        let (mut k, mut edge) = (0, true);
        assert_eq!(tds_branch_of(c(-11.3784, 0.0), &mut k, &mut edge), TdsStatus::Ok);
        assert_eq!(k, -1);
        assert_eq!(tds_branch_of(c(f64::NAN, 0.0), &mut k, &mut edge), TdsStatus::InvalidInput);
    }
}

#[test]
fn solve_branch_from_reference_seed() {
    let sys = example();
    let ks = [0i64, -1];
    let q0 = [c(2.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0), c(-1.0, 0.0)];
    unsafe {
        let mut sol = ptr::null_mut();
        assert_eq!(tds_solve_branch(sys, ks.as_ptr(), q0.as_ptr(), 1e-9, 200, &mut sol), TdsStatus::Ok);
        assert_eq!(tds_solution_dim(sol), 2);
        assert!(tds_solution_residual(sol) <= 1e-9);
        let mut e = c(0.0, 0.0);
        assert_eq!(tds_solution_eigenvalue(sol, 0, &mut e), TdsStatus::Ok);
        assert!((e.re - 0.8070).abs() < 1e-3);
        let mut s = [c(0.0, 0.0); 4];
        assert_eq!(tds_solution_s(sol, s.as_mut_ptr()), TdsStatus::Ok);
        assert!((s[0].re).abs() < 1e-8 && (s[1].re - 1.0).abs() < 1e-8);
        tds_solution_free(sol);

        let mut sol = ptr::null_mut();
        assert_eq!(tds_solve_branch(sys, ks.as_ptr(), q0.as_ptr(), 1e-9, 1, &mut sol), TdsStatus::Solver);
        assert!(sol.is_null());
        tds_system_free(sys);
    }
}

#[test]
fn json_and_error_paths() {
    unsafe {
        let mut sys = ptr::null_mut();
        let bad = CString::new(r#"{"A": [[1]], "B": [[1]]}"#).unwrap();
        assert_eq!(tds_system_from_json(bad.as_ptr(), &mut sys), TdsStatus::Parse);
        assert!(last_error().contains("tau"));
        let good = CString::new(r#"{"A": [[0]], "B": [[-1]], "tau": 1}"#).unwrap();
        assert_eq!(tds_system_from_json(good.as_ptr(), &mut sys), TdsStatus::Ok);
        let mut out = c(0.0, 0.0);
        assert_eq!(tds_char_fn(ptr::null(), c(0.0, 0.0), &mut out), TdsStatus::NullPointer);
        assert_eq!(tds_system_new(1, ptr::null(), ptr::null(), 1.0, &mut sys), TdsStatus::NullPointer);
        let a = [0.0];
        assert_eq!(tds_system_new(1, a.as_ptr(), a.as_ptr(), -1.0, &mut sys), TdsStatus::InvalidInput);
        tds_system_free(sys);
        tds_system_free(ptr::null_mut());
        assert_eq!(tds_report_len(ptr::null()), 0);
        assert!(tds_solution_residual(ptr::null()).is_nan());
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/tds_spectrum.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "tds_last_error_message",
        "tds_system_new",
        "tds_system_from_json",
        "tds_system_free",
        "tds_char_fn",
        "tds_find_roots",
        "tds_report_root",
        "tds_count_roots",
        "tds_lambert_w",
        "tds_branch_of",
        "tds_solve_branch",
        "tds_solution_free",
        "TDS_STATUS_SOLVER",
        "typedef struct TdsSystem TdsSystem",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(status) =
        Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"]).arg(header()).status()
    else {
        eprintln!("no C compiler on PATH; header syntax not checked");
        return;
    };
    assert!(status.success());
}

/// Directory holding the library artifacts of the current profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_static_library() {
    let lib = artifact_dir().join("libtds_spectrum_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("no C compiler or static library; link test skipped");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/smoke.c"))
        .arg("-I")
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.8070");
}
