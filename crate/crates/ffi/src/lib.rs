//! C interface to the rectification library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` / `sr_solve`
//! and released by the matching `*_free`. Every fallible call returns an
//! [`SrStatus`]; on failure a description is available from
//! [`sr_last_error_message`] on the same thread. Matrices are nine doubles in
//! row-major order. Panics never unwind into C: they are reported as
//! [`SrStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stereorect::matching::ransac_filter;
use stereorect::metrics::sampson_error;
use stereorect::{CorrespondenceSet, Error, Mat3, Mode, RansacConfig, RigDims, Solution, SolverConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InsufficientInliers = 3,
    Degenerate = 4,
    SolverFailure = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrMode {
    Usr = 0,
    UsrCgd = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrRansacOptions {
    pub max_iterations: u32,
    /// Sampson distance in pixels.
    pub inlier_threshold: f64,
    pub confidence: f64,
    pub seed: u64,
}

/// Averaged distortion measures of a solution; angles in degrees.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SrReport {
    pub e_s: f64,
    pub e_v: f64,
    pub e_o: f64,
    pub e_a: f64,
    pub e_ar: f64,
    pub e_sk: f64,
    pub e_r: f64,
    pub e_sr: f64,
}

/// Opaque set of point matches.
pub struct SrCorrespondences(CorrespondenceSet);

/// Opaque solver result.
pub struct SrSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).expect("interior nul bytes were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> SrStatus {
    match e {
        Error::InvalidInput(_) | Error::Io(_) => SrStatus::InvalidInput,
        Error::InsufficientInliers { .. } | Error::TooFewVisiblePoints(_) => SrStatus::InsufficientInliers,
        Error::DegenerateConfiguration(_) | Error::ZeroDenominator(_) => SrStatus::Degenerate,
        _ => SrStatus::SolverFailure,
    }
}

/// Runs `f`, recording any error or panic for [`sr_last_error_message`].
fn guarded(f: impl FnOnce() -> Result<(), (SrStatus, String)>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SrStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SrStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(what: &str) -> (SrStatus, String) {
    (SrStatus::NullPointer, format!("{what} is null"))
}

fn read_matrix(m: *const f64) -> Result<Mat3, (SrStatus, String)> {
    if m.is_null() {
        return Err(null_err("matrix"));
    }
    // SAFETY: the caller provides nine readable doubles.
    let v = unsafe { std::slice::from_raw_parts(m, 9) };
    Ok(Mat3::from_row_slice(v))
}

fn write_matrix(m: &Mat3, out: *mut f64) {
    // SAFETY: checked non-null by the caller; nine writable doubles per the API contract.
    let dst = unsafe { std::slice::from_raw_parts_mut(out, 9) };
    for r in 0..3 {
        for c in 0..3 {
            dst[3 * r + c] = m[(r, c)];
        }
    }
}

/// Creates a correspondence set from `n_pairs` rows of `(ul, vl, ur, vr)`.
///
/// # Safety
/// `pairs` must point to `4 * n_pairs` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_correspondences_new(
    width: u32,
    height: u32,
    pairs: *const f64,
    n_pairs: usize,
    out: *mut *mut SrCorrespondences,
) -> SrStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        if pairs.is_null() && n_pairs > 0 {
            return Err(null_err("pairs"));
        }
        let flat: &[f64] = if n_pairs == 0 { &[] } else { std::slice::from_raw_parts(pairs, 4 * n_pairs) };
        let rows = flat.chunks_exact(4).map(|p| [p[0], p[1], p[2], p[3]]).collect();
        let dims = RigDims::new(width as f64, height as f64).map_err(lib_err)?;
        let set = CorrespondenceSet::new(dims, rows).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SrCorrespondences(set)));
        Ok(())
    })
}

/// # Safety
/// `c` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sr_correspondences_free(c: *mut SrCorrespondences) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of pairs, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_correspondences_len(c: *const SrCorrespondences) -> usize {
    c.as_ref().map_or(0, |c| c.0.len())
}

/// Copies pair `index` into `out[4]`.
///
/// # Safety
/// `c` must be a live handle and `out` must hold four doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_correspondences_get(c: *const SrCorrespondences, index: usize, out: *mut f64) -> SrStatus {
    guarded(|| {
        let c = c.as_ref().ok_or_else(|| null_err("correspondences"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let pair = c.0.pairs.get(index).ok_or((SrStatus::InvalidInput, format!("index {index} out of range")))?;
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(pair);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn sr_ransac_default_options() -> SrRansacOptions {
    let d = RansacConfig::default();
    SrRansacOptions {
        max_iterations: d.max_iterations as u32,
        inlier_threshold: d.inlier_threshold,
        confidence: d.confidence,
        seed: d.seed,
    }
}

/// RANSAC outlier rejection. Writes a new handle with the inliers to
/// `inliers_out` and, if `f_out` is not null, the refit fundamental matrix.
///
/// # Safety
/// Pointers must be valid; `f_out` may be null or hold nine doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_ransac_filter(
    c: *const SrCorrespondences,
    options: *const SrRansacOptions,
    inliers_out: *mut *mut SrCorrespondences,
    f_out: *mut f64,
) -> SrStatus {
    guarded(|| {
        let c = c.as_ref().ok_or_else(|| null_err("correspondences"))?;
        let o = options.as_ref().ok_or_else(|| null_err("options"))?;
        if inliers_out.is_null() {
            return Err(null_err("inliers_out"));
        }
        let cfg = RansacConfig {
            max_iterations: o.max_iterations as usize,
            inlier_threshold: o.inlier_threshold,
            confidence: o.confidence,
            seed: o.seed,
        };
        let (inliers, f) = ransac_filter(&c.0, &cfg).map_err(lib_err)?;
        if !f_out.is_null() {
            write_matrix(&f, f_out);
        }
        *inliers_out = Box::into_raw(Box::new(SrCorrespondences(inliers)));
        Ok(())
    })
}

/// Estimates rectifying homographies from (already filtered) matches.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_solve(c: *const SrCorrespondences, mode: SrMode, out: *mut *mut SrSolution) -> SrStatus {
    guarded(|| {
        let c = c.as_ref().ok_or_else(|| null_err("correspondences"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let mode = match mode {
            SrMode::Usr => Mode::Usr,
            SrMode::UsrCgd => Mode::UsrCgd,
        };
        let sol = stereorect::solve(&c.0, &SolverConfig::with_mode(mode)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SrSolution(sol)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`sr_solve`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sr_solution_free(s: *mut SrSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Writes `H_l` and `H_r`, each nine doubles row-major.
///
/// # Safety
/// `s` must be a live handle; both outputs must hold nine doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_solution_homographies(s: *const SrSolution, h_left: *mut f64, h_right: *mut f64) -> SrStatus {
    guarded(|| {
        let s = s.as_ref().ok_or_else(|| null_err("solution"))?;
        if h_left.is_null() || h_right.is_null() {
            return Err(null_err("output matrix"));
        }
        write_matrix(&s.0.homographies.left, h_left);
        write_matrix(&s.0.homographies.right, h_right);
        Ok(())
    })
}

/// Writes the nine parameters in the order θ_yl, θ_zl, θ_xr, θ_yr, θ_zr, t_yl, t_yr, δ_fl, δ_fr.
///
/// # Safety
/// `s` must be a live handle; `out` must hold nine doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_solution_params(s: *const SrSolution, out: *mut f64) -> SrStatus {
    guarded(|| {
        let s = s.as_ref().ok_or_else(|| null_err("solution"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        std::slice::from_raw_parts_mut(out, 9).copy_from_slice(&s.0.params.to_array());
        Ok(())
    })
}

/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_solution_report(s: *const SrSolution, out: *mut SrReport) -> SrStatus {
    guarded(|| {
        let s = s.as_ref().ok_or_else(|| null_err("solution"))?;
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        let r = &s.0.report;
        *out = SrReport { e_s: r.e_s, e_v: r.e_v, e_o: r.e_o, e_a: r.e_a, e_ar: r.e_ar, e_sk: r.e_sk, e_r: r.e_r, e_sr: r.e_sr };
        Ok(())
    })
}

/// Number of accepted outer rounds, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_solution_rounds(s: *const SrSolution) -> usize {
    s.as_ref().map_or(0, |s| s.0.trace.rounds.len())
}

/// Sampson error of `f` (nine doubles, row-major) over `c`.
///
/// # Safety
/// `f` must hold nine doubles, `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_sampson_error(f: *const f64, c: *const SrCorrespondences, out: *mut f64) -> SrStatus {
    guarded(|| {
        let f = read_matrix(f)?;
        let c = c.as_ref().ok_or_else(|| null_err("correspondences"))?;
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        *out = sampson_error(&f, &c.0).map_err(lib_err)?;
        Ok(())
    })
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
