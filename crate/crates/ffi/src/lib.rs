//! C ABI for driftfill.
//!
//! Curves and paths are opaque handles created by `df_*_new` and released by
//! the matching `df_*_free`. Every fallible call returns a [`DfStatus`]; on
//! failure the message is kept per thread and can be read with
//! [`df_last_error`]. Results are written through out-pointers, and nothing
//! is written on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use driftfill::analysis::{coverage_check, shifted_cell, SignConvention};
use driftfill::brownian::{modulus_constant, sample_path_scaled, PathSample};
use driftfill::curves::{curve_eval, naive_gap, CurveSpec, Family};
use driftfill::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Precondition = 3,
    ResourceLimit = 4,
    BufferTooSmall = 5,
    Internal = 6,
    Panic = 7,
}

/// Curve family selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DfFamily {
    Standard = 0,
    Generalized = 1,
    Alternate = 2,
    Naive = 3,
}

/// Opaque curve handle.
pub struct DfCurve(CurveSpec);

/// Opaque Brownian path handle.
pub struct DfPath(PathSample);

/// Outcome of a single-path coverage check.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DfCoverage {
    pub cells_total: usize,
    pub cells_hit: usize,
    pub witnesses: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DfStatus {
    match e {
        Error::InvalidDigit { .. } | Error::InvalidParameter(_) => DfStatus::InvalidArgument,
        Error::Precondition(_) | Error::Degenerate(_) => DfStatus::Precondition,
        Error::Resource(_) => DfStatus::ResourceLimit,
        _ => DfStatus::Internal,
    }
}

fn fail(status: DfStatus, msg: impl Into<String>) -> DfStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), DfStatus>) -> DfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(DfStatus::Panic, "panic inside driftfill"),
    }
}

fn lift<T>(r: driftfill::Result<T>) -> Result<T, DfStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), DfStatus> {
    if p.is_null() {
        Err(fail(DfStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn df_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Copies the last error message of this thread into `buf` (truncated and
/// always NUL-terminated when `len > 0`). Returns the full message length
/// without the NUL, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn df_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Creates a curve. `alpha` and `rho` are ignored where the family fixes them
/// (`rho` for the alternate and naive families, both for the standard one).
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn df_curve_new(
    family: DfFamily,
    d: usize,
    alpha: f64,
    rho: f64,
    out: *mut *mut DfCurve,
) -> DfStatus {
    guard(|| {
        nonnull(out, "out")?;
        let family = match family {
            DfFamily::Standard => Family::Standard,
            DfFamily::Generalized => Family::Generalized,
            DfFamily::Alternate => Family::Alternate,
            DfFamily::Naive => Family::Naive,
        };
        let spec = lift(CurveSpec::from_parts(family, d, alpha, rho))?;
        *out = Box::into_raw(Box::new(DfCurve(spec)));
        Ok(())
    })
}

/// Releases a curve. Null is ignored.
///
/// # Safety
/// `curve` must come from [`df_curve_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn df_curve_free(curve: *mut DfCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Dimension of the curve, 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn df_curve_dim(curve: *const DfCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.d())
}

/// Evaluates the curve at `t` with `depth` digits. Writes `d` coordinates to
/// `point` (capacity `len`) and the truncation error bound to `err_bound`
/// when it is not null.
///
/// # Safety
/// `curve` must be a live handle, `point` must hold `len` doubles, and
/// `err_bound` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn df_curve_eval(
    curve: *const DfCurve,
    t: f64,
    depth: usize,
    point: *mut f64,
    len: usize,
    err_bound: *mut f64,
) -> DfStatus {
    guard(|| {
        nonnull(curve, "curve")?;
        nonnull(point, "point")?;
        let spec = &(*curve).0;
        if len < spec.d() {
            return Err(fail(DfStatus::BufferTooSmall, format!("need {} coordinates, got {len}", spec.d())));
        }
        let v = lift(curve_eval(t, spec, depth))?;
        slice::from_raw_parts_mut(point, spec.d()).copy_from_slice(v.point.as_slice());
        if !err_bound.is_null() {
            *err_bound = v.err_bound;
        }
        Ok(())
    })
}

/// Jump of the naive curve at `t = 1/2`, summed to `depth` digits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_naive_gap(alpha: f64, depth: usize, out: *mut f64) -> DfStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = lift(naive_gap(alpha, depth))?;
        Ok(())
    })
}

/// Samples a Brownian path on the grid `k 2^-level`. `noise_scale` multiplies
/// the increments; 0 gives the zero path.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn df_path_new(
    d: usize,
    level: usize,
    seed: u64,
    noise_scale: f64,
    out: *mut *mut DfPath,
) -> DfStatus {
    guard(|| {
        nonnull(out, "out")?;
        let p = lift(sample_path_scaled(d, level, seed, noise_scale))?;
        *out = Box::into_raw(Box::new(DfPath(p)));
        Ok(())
    })
}

/// Releases a path. Null is ignored.
///
/// # Safety
/// `path` must come from [`df_path_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn df_path_free(path: *mut DfPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// `B_t`, refined below the grid when `t` is not a grid time.
///
/// # Safety
/// `path` must be a live handle and `point` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn df_path_eval(path: *const DfPath, t: f64, point: *mut f64, len: usize) -> DfStatus {
    guard(|| {
        nonnull(path, "path")?;
        nonnull(point, "point")?;
        let p = &(*path).0;
        if len < p.d() {
            return Err(fail(DfStatus::BufferTooSmall, format!("need {} coordinates, got {len}", p.d())));
        }
        let v = lift(p.evaluate_at(t))?;
        slice::from_raw_parts_mut(point, p.d()).copy_from_slice(v.as_slice());
        Ok(())
    })
}

/// Smallest `C` with `|B_t - B_s| <= C sqrt(u log(1/u))` for grid lags
/// `u <= s_max`.
///
/// # Safety
/// `path` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn df_path_modulus(path: *const DfPath, s_max: f64, out: *mut f64) -> DfStatus {
    guard(|| {
        nonnull(path, "path")?;
        nonnull(out, "out")?;
        *out = lift(modulus_constant(&(*path).0, s_max))?;
        Ok(())
    })
}

/// Checks whether the shifted witness cubes of depth `depth` below the cell
/// `base` (digits, `base_len` of them) cover the shifted cell itself, split
/// into `cells_per_axis` cells per axis. Uses the `B - G` convention.
///
/// # Safety
/// Handles must be live, `base` must hold `base_len` bytes (or be null when
/// `base_len` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn df_coverage(
    curve: *const DfCurve,
    path: *const DfPath,
    base: *const u8,
    base_len: usize,
    depth: usize,
    cells_per_axis: usize,
    out: *mut DfCoverage,
) -> DfStatus {
    guard(|| {
        nonnull(curve, "curve")?;
        nonnull(path, "path")?;
        nonnull(out, "out")?;
        let base: &[u8] = if base_len == 0 {
            &[]
        } else {
            nonnull(base, "base")?;
            slice::from_raw_parts(base, base_len)
        };
        if cells_per_axis == 0 {
            return Err(fail(DfStatus::InvalidArgument, "cells_per_axis must be positive"));
        }
        let (spec, p) = (&(*curve).0, &(*path).0);
        let conv = SignConvention::PathMinusCurve;
        let target = lift(shifted_cell(spec, p, base, conv))?;
        let delta = target.side / cells_per_axis as f64;
        let r = lift(coverage_check(spec, p, &target, base, depth, delta, conv))?;
        *out = DfCoverage { cells_total: r.cells_total, cells_hit: r.cells_hit, witnesses: r.witnesses };
        Ok(())
    })
}
