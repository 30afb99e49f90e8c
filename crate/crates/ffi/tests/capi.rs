use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use stereorect::synth::{make_suite_with, SuiteOptions};
use stereorect::RigDims;
use stereorect_ffi::*;

fn case(index: usize, outliers: f64) -> (u32, u32, Vec<f64>) {
    let dims = RigDims::new(1280.0, 720.0).unwrap();
    let opts = SuiteOptions { n_points: 150, noise_sigma: 0.3, outlier_fraction: outliers };
    let case = make_suite_with(dims, 11, &opts).unwrap().swap_remove(index);
    let flat = case.correspondences.pairs.iter().flatten().copied().collect();
    (1280, 720, flat)
}

unsafe fn new_set(w: u32, h: u32, flat: &[f64]) -> *mut SrCorrespondences {
    let mut out = ptr::null_mut();
    assert_eq!(sr_correspondences_new(w, h, flat.as_ptr(), flat.len() / 4, &mut out), SrStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = sr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn filter_and_solve_round_trip() {
    let (w, h, flat) = case(4, 0.1);
    unsafe {
        let all = new_set(w, h, &flat);
        assert_eq!(sr_correspondences_len(all), flat.len() / 4);

        let opts = sr_ransac_default_options();
        let mut inliers = ptr::null_mut();
        let mut f = [0.0; 9];
        assert_eq!(sr_ransac_filter(all, &opts, &mut inliers, f.as_mut_ptr()), SrStatus::Ok);
        let n_in = sr_correspondences_len(inliers);
        assert!(n_in > 100 && n_in < flat.len() / 4);

        let mut es = 0.0;
        assert_eq!(sr_sampson_error(f.as_ptr(), inliers, &mut es), SrStatus::Ok);
        assert!(es < 0.1, "E_s = {es}");

        let mut sol = ptr::null_mut();
        assert_eq!(sr_solve(inliers, SrMode::UsrCgd, &mut sol), SrStatus::Ok);
        assert!(sr_solution_rounds(sol) >= 1);

        let (mut hl, mut hr, mut params) = ([0.0; 9], [0.0; 9], [0.0; 9]);
        assert_eq!(sr_solution_homographies(sol, hl.as_mut_ptr(), hr.as_mut_ptr()), SrStatus::Ok);
        assert_eq!(sr_solution_params(sol, params.as_mut_ptr()), SrStatus::Ok);
        assert!(hl.iter().chain(&hr).all(|v| v.is_finite()));

        let mut report = SrReport::default();
        assert_eq!(sr_solution_report(sol, &mut report), SrStatus::Ok);
        assert!(report.e_v < 1.0, "E_v = {}", report.e_v);

        // The report's vertical error agrees with the returned homographies.
        let mut sum = 0.0;
        for i in 0..n_in {
            let mut p = [0.0; 4];
            assert_eq!(sr_correspondences_get(inliers, i, p.as_mut_ptr()), SrStatus::Ok);
            let vy = |m: &[f64; 9], u: f64, v: f64| {
                (m[3] * u + m[4] * v + m[5]) / (m[6] * u + m[7] * v + m[8])
            };
            sum += (vy(&hl, p[0], p[1]) - vy(&hr, p[2], p[3])).abs();
        }
        assert!((sum / n_in as f64 - report.e_v).abs() < 1e-9);

        sr_solution_free(sol);
        sr_correspondences_free(inliers);
        sr_correspondences_free(all);
    }
}

#[test]
fn usr_mode_runs_a_single_round() {
    let (w, h, flat) = case(0, 0.0);
    unsafe {
        let set = new_set(w, h, &flat);
        let mut sol = ptr::null_mut();
        assert_eq!(sr_solve(set, SrMode::Usr, &mut sol), SrStatus::Ok);
        assert_eq!(sr_solution_rounds(sol), 1);
        sr_solution_free(sol);
        sr_correspondences_free(set);
    }
}

#[test]
fn null_arguments_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(sr_correspondences_new(640, 480, ptr::null(), 3, &mut out), SrStatus::NullPointer);
        assert!(out.is_null());
        assert!(last_error().contains("pairs"));
        assert_eq!(sr_solve(ptr::null(), SrMode::Usr, &mut ptr::null_mut()), SrStatus::NullPointer);
        assert_eq!(sr_solution_report(ptr::null(), &mut SrReport::default()), SrStatus::NullPointer);
        assert_eq!(sr_correspondences_len(ptr::null()), 0);
        assert_eq!(sr_solution_rounds(ptr::null()), 0);
        sr_correspondences_free(ptr::null_mut());
        sr_solution_free(ptr::null_mut());
    }
}

#[test]
fn invalid_input_maps_to_status_codes() {
    unsafe {
        let mut out = ptr::null_mut();
        let bad = [f64::NAN, 0.0, 1.0, 1.0];
        assert_eq!(sr_correspondences_new(640, 480, bad.as_ptr(), 1, &mut out), SrStatus::InvalidInput);
        assert_eq!(sr_correspondences_new(0, 480, ptr::null(), 0, &mut out), SrStatus::InvalidInput);

        let few: Vec<f64> = (0..5).flat_map(|i| [i as f64 * 10.0, 5.0, i as f64 * 10.0 + 3.0, 5.0]).collect();
        let set = new_set(640, 480, &few);
        let mut inliers = ptr::null_mut();
        let status = sr_ransac_filter(set, &sr_ransac_default_options(), &mut inliers, ptr::null_mut());
        assert_eq!(status, SrStatus::InsufficientInliers);
        assert!(inliers.is_null());
        assert!(!last_error().is_empty());

        let mut p = [0.0; 4];
        assert_eq!(sr_correspondences_get(set, 99, p.as_mut_ptr()), SrStatus::InvalidInput);
        sr_correspondences_free(set);
    }
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(sr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/stereorect.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["sr_correspondences_new", "sr_ransac_filter", "sr_solve", "sr_solution_report", "sr_last_error_message", "SR_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99", "-Wall", "-Werror", header]).status() else {
        eprintln!("no C compiler available; skipping syntax check");
        return;
    };
    assert!(status.success());
}
