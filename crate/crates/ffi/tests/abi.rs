use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use driftfill_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { df_last_error(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(n, s.len());
    s
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(df_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn curve_round_trip() {
    unsafe {
        let mut c: *mut DfCurve = ptr::null_mut();
        assert_eq!(df_curve_new(DfFamily::Generalized, 2, 0.9, 0.2, &mut c), DfStatus::Ok);
        assert_eq!(df_curve_dim(c), 2);
        let mut p = [0.0; 2];
        let mut err = 0.0;
        assert_eq!(df_curve_eval(c, 0.0, 20, p.as_mut_ptr(), 2, &mut err), DfStatus::Ok);
        assert!(err > 0.0 && err < 1.0);
        assert_eq!(df_curve_eval(c, 0.5, 20, p.as_mut_ptr(), 1, ptr::null_mut()), DfStatus::BufferTooSmall);
        assert!(last_error().contains("need 2"));
        assert_eq!(df_curve_eval(c, 1.5, 20, p.as_mut_ptr(), 2, ptr::null_mut()), DfStatus::InvalidArgument);
        df_curve_free(c);
    }
}

#[test]
fn invalid_parameters_are_reported() {
    unsafe {
        let mut c: *mut DfCurve = ptr::null_mut();
        assert_eq!(df_curve_new(DfFamily::Generalized, 2, 0.9, 0.3, &mut c), DfStatus::InvalidArgument);
        assert!(c.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(df_curve_new(DfFamily::Alternate, 3, 0.9, 0.0, &mut c), DfStatus::InvalidArgument);
        assert_eq!(df_curve_new(DfFamily::Standard, 2, 0.0, 0.0, ptr::null_mut()), DfStatus::NullPointer);
        // a success clears the message
        assert_eq!(df_curve_new(DfFamily::Standard, 2, 0.0, 0.0, &mut c), DfStatus::Ok);
        assert_eq!(df_last_error(ptr::null_mut(), 0), 0);
        df_curve_free(c);
        df_curve_free(ptr::null_mut());
        assert_eq!(df_curve_dim(ptr::null()), 0);
    }
}

#[test]
fn naive_gap_is_positive() {
    let mut g = 0.0;
    assert_eq!(unsafe { df_naive_gap(0.9, 30, &mut g) }, DfStatus::Ok);
    assert!(g > 0.0);
    assert_eq!(unsafe { df_naive_gap(0.5, 30, &mut g) }, DfStatus::Ok);
    assert_eq!(g, 0.0);
}

#[test]
fn zero_path_coverage_is_complete() {
    unsafe {
        let mut c: *mut DfCurve = ptr::null_mut();
        let mut p: *mut DfPath = ptr::null_mut();
        assert_eq!(df_curve_new(DfFamily::Generalized, 2, 0.9, 0.2, &mut c), DfStatus::Ok);
        assert_eq!(df_path_new(2, 8, 1, 0.0, &mut p), DfStatus::Ok);
        let mut b = [1.0; 2];
        assert_eq!(df_path_eval(p, 0.3, b.as_mut_ptr(), 2), DfStatus::Ok);
        assert_eq!(b, [0.0, 0.0]);
        let base = [1u8, 2];
        let mut r = DfCoverage::default();
        assert_eq!(df_coverage(c, p, base.as_ptr(), 2, 8, 8, &mut r), DfStatus::Ok);
        assert_eq!(r.cells_total, 64);
        assert_eq!(r.cells_hit, 64);
        assert_eq!(r.witnesses, 4usize.pow(6));
        assert_eq!(df_coverage(c, p, ptr::null(), 2, 8, 8, &mut r), DfStatus::NullPointer);
        df_path_free(p);
        df_curve_free(c);
    }
}

#[test]
fn path_handles_are_deterministic() {
    unsafe {
        let (mut a, mut b): (*mut DfPath, *mut DfPath) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(df_path_new(3, 10, 42, 1.0, &mut a), DfStatus::Ok);
        assert_eq!(df_path_new(3, 10, 42, 1.0, &mut b), DfStatus::Ok);
        let (mut x, mut y) = ([0.0; 3], [0.0; 3]);
        assert_eq!(df_path_eval(a, 0.123456, x.as_mut_ptr(), 3), DfStatus::Ok);
        assert_eq!(df_path_eval(b, 0.123456, y.as_mut_ptr(), 3), DfStatus::Ok);
        assert_eq!(x, y);
        let mut m = 0.0;
        assert_eq!(df_path_modulus(a, 1.0 / 64.0, &mut m), DfStatus::Ok);
        assert!(m > 0.0 && m.is_finite());
        assert_eq!(df_path_modulus(a, 0.9, &mut m), DfStatus::InvalidArgument);
        df_path_free(a);
        df_path_free(b);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/driftfill.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["df_curve_new", "df_path_new", "df_coverage", "df_last_error", "DF_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from the header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&header).output()
    else {
        eprintln!("no C compiler found; skipping the compile check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
