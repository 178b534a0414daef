use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use h2xh2_ffi::*;

fn last_error() -> String {
    let p = h2xh2_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(kind: H2ModelKind, param: f64) -> *mut H2Model {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { h2xh2_model_new(kind, param, &mut m) }, H2Status::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(h2xh2_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn tube_point_geometry() {
    let m = model(H2ModelKind::Tau, -2.0);
    let (mut lo, mut hi) = ([0.0; 3], [0.0; 3]);
    assert_eq!(unsafe { h2xh2_model_domain(m, lo.as_mut_ptr(), hi.as_mut_ptr()) }, H2Status::Ok);
    let u = [0.5 * (lo[0] + hi[0]), 0.1, -0.2];
    let mut pg = H2PointGeometry::default();
    assert_eq!(unsafe { h2xh2_point_geometry(m, u.as_ptr(), &mut pg) }, H2Status::Ok);
    let want = [0.0, (1.0f64 / 6.0).sqrt(), 1.5f64.sqrt()];
    for k in 0..3 {
        assert!((pg.lambdas[k] - want[k]).abs() < 1e-7, "{:?}", pg.lambdas);
    }
    assert!(pg.c.abs() < 1e-9);

    let mut d = [0.0; 5];
    assert_eq!(unsafe { h2xh2_detq_derivatives(m, u.as_ptr(), d.as_mut_ptr()) }, H2Status::Ok);
    assert!((d[1] - (pg.rho + 3.0)).abs() < 1e-12);
    assert!((d[0] + pg.h).abs() < 1e-12);
    unsafe { h2xh2_model_free(m) };
}

#[test]
fn focal_point_reports_status() {
    let m = model(H2ModelKind::Tau, -2.0);
    let u = [0.9, 0.0, 0.0];
    let l = (2.0f64).acosh() / 2f64.sqrt();
    let mut h = 0.0;
    let s = unsafe { h2xh2_parallel_mean_curvature(m, u.as_ptr(), l, &mut h) };
    assert_eq!(s, H2Status::FocalPoint, "{}", last_error());
    assert!(last_error().contains("focal"));
    assert_eq!(unsafe { h2xh2_parallel_mean_curvature(m, u.as_ptr(), 0.3, &mut h) }, H2Status::Ok);
    assert!(h.is_finite());
    unsafe { h2xh2_model_free(m) };
}

#[test]
fn parallel_mean_curvature_is_constant_on_m1m1() {
    let m = model(H2ModelKind::OneMinusOne, 0.3);
    let mut hs = Vec::new();
    for u in [[0.0, 0.0, 0.0], [0.3, -0.4, 0.7], [-0.5, 0.2, -0.1]] {
        let mut h = 0.0;
        assert_eq!(unsafe { h2xh2_parallel_mean_curvature(m, u.as_ptr(), 0.4, &mut h) }, H2Status::Ok);
        hs.push(h);
    }
    assert!(hs.iter().all(|h| (h - hs[0]).abs() < 1e-8), "{hs:?}");
    unsafe { h2xh2_model_free(m) };
}

#[test]
fn invalid_parameters_and_nulls() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { h2xh2_model_new(H2ModelKind::OneOne, 1.5, &mut m) }, H2Status::InvalidArgument);
    assert!(m.is_null());
    assert!(last_error().contains("out of range (0,1)"));

    assert_eq!(unsafe { h2xh2_model_new(H2ModelKind::OneOne, 0.5, ptr::null_mut()) }, H2Status::NullPointer);
    let mut pg = H2PointGeometry::default();
    let u = [0.0; 3];
    assert_eq!(unsafe { h2xh2_point_geometry(ptr::null(), u.as_ptr(), &mut pg) }, H2Status::NullPointer);
    unsafe { h2xh2_model_free(ptr::null_mut()) };
    unsafe { h2xh2_string_free(ptr::null_mut()) };
}

#[test]
fn model_from_json_and_kk() {
    let json = CString::new(r#"{"kind":"M_11","c":0.5}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { h2xh2_model_from_json(json.as_ptr(), &mut m) }, H2Status::Ok);
    let mut pg = H2PointGeometry::default();
    let u = [0.1, 0.2, 0.3];
    assert_eq!(unsafe { h2xh2_point_geometry(m, u.as_ptr(), &mut pg) }, H2Status::Ok);
    assert!(pg.h.abs() < 1e-9);
    unsafe { h2xh2_model_free(m) };

    let bad = CString::new(r#"{"kind":"M_12"}"#).unwrap();
    assert_eq!(unsafe { h2xh2_model_from_json(bad.as_ptr(), &mut m) }, H2Status::InvalidArgument);

    assert_eq!(unsafe { h2xh2_model_new_kk(0.3, 0.5, -0.3, &mut m) }, H2Status::Ok);
    assert_eq!(unsafe { h2xh2_point_geometry(m, u.as_ptr(), &mut pg) }, H2Status::Ok);
    assert!((pg.c - 0.4).abs() < 1e-9);
    unsafe { h2xh2_model_free(m) };
}

#[test]
fn verify_returns_a_report() {
    let cfg = CString::new(r#"{"model":{"kind":"M_1m1","c":0.5},"samples":8}"#).unwrap();
    let mut report = ptr::null_mut();
    let mut ok = false;
    assert_eq!(unsafe { h2xh2_verify(cfg.as_ptr(), &mut report, &mut ok) }, H2Status::Ok);
    assert!(ok);
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    unsafe { h2xh2_string_free(report) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["summary"]["failed"], 0);

    let bad = CString::new(r#"{"model":{"kind":"M_1m1","c":0.5},"samples":0}"#).unwrap();
    assert_eq!(unsafe { h2xh2_verify(bad.as_ptr(), &mut report, &mut ok) }, H2Status::InvalidArgument);
    assert!(last_error().contains("samples"));
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/h2xh2.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "h2xh2_version",
        "h2xh2_last_error",
        "h2xh2_model_new",
        "h2xh2_model_new_kk",
        "h2xh2_model_from_json",
        "h2xh2_model_free",
        "h2xh2_model_domain",
        "h2xh2_point_geometry",
        "h2xh2_parallel_mean_curvature",
        "h2xh2_detq_derivatives",
        "h2xh2_verify",
        "h2xh2_string_free",
        "H2_STATUS_FOCAL_POINT",
        "H2PointGeometry",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    if Command::new("cc").arg("--version").output().is_ok() {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-x", "c", "-Wall", "-Werror"])
            .arg(&header)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

/// Compiles and runs a C program against the static library when a C
/// compiler is available.
#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libh2xh2_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let out = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")), "{stdout}");
}
