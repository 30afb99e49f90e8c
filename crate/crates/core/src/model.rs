//! Nine-parameter rectifying-homography model.
//!
//! Each side is rectified by `H = K_n · T(t_y) · R · K_o⁻¹` where `K_o` is the
//! side's (unknown) intrinsic matrix, `R` a rotation about the optical center,
//! `T` a vertical shift in normalized coordinates and `K_n` the shared new
//! intrinsics, equal to the current left intrinsics on both sides. The x-axis
//! rotation of the left camera is fixed at zero: a common rotation about the
//! baseline leaves the pair rectified, so that degree of freedom is a gauge.
//!
//! Focal lengths are parameterized as `α = (w + h) · 3^δ`, which keeps them
//! positive and makes the all-zero vector a plausible starting point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fundamental_from_homographies, CameraIntrinsics, Mat3, Side};

/// Bound applied to focal deviations before exponentiation.
pub const DELTA_F_LIMIT: f64 = 1.5;
pub const PARAM_COUNT: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigDims {
    pub w: f64,
    pub h: f64,
}

impl RigDims {
    pub fn new(w: f64, h: f64) -> Result<Self> {
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidInput(format!("image dimensions must be positive, got {w}x{h}")));
        }
        Ok(Self { w, h })
    }

    /// Default focal length used when the focal deviation is zero.
    pub fn base_focal(&self) -> f64 {
        self.w + self.h
    }
}

/// Optimization vector: five rotations (radians), two vertical shifts
/// (normalized units, pixel effect ≈ `α · t_y`) and two log₃ focal deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RectParams {
    pub theta_yl: f64,
    pub theta_zl: f64,
    pub theta_xr: f64,
    pub theta_yr: f64,
    pub theta_zr: f64,
    pub t_yl: f64,
    pub t_yr: f64,
    pub delta_fl: f64,
    pub delta_fr: f64,
}

impl RectParams {
    pub const NAMES: [&'static str; PARAM_COUNT] = [
        "theta_yl", "theta_zl", "theta_xr", "theta_yr", "theta_zr", "t_yl", "t_yr", "delta_fl", "delta_fr",
    ];

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_array(&self) -> [f64; PARAM_COUNT] {
        [
            self.theta_yl,
            self.theta_zl,
            self.theta_xr,
            self.theta_yr,
            self.theta_zr,
            self.t_yl,
            self.t_yr,
            self.delta_fl,
            self.delta_fr,
        ]
    }

    pub fn from_array(a: [f64; PARAM_COUNT]) -> Self {
        Self {
            theta_yl: a[0],
            theta_zl: a[1],
            theta_xr: a[2],
            theta_yr: a[3],
            theta_zr: a[4],
            t_yl: a[5],
            t_yr: a[6],
            delta_fl: a[7],
            delta_fr: a[8],
        }
    }

    pub fn from_slice(s: &[f64]) -> Result<Self> {
        let a: [f64; PARAM_COUNT] = s
            .try_into()
            .map_err(|_| Error::InvalidInput(format!("expected {PARAM_COUNT} parameters, got {}", s.len())))?;
        Ok(Self::from_array(a))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    fn rotation_angles(&self, side: Side) -> (f64, f64, f64) {
        match side {
            Side::Left => (0.0, self.theta_yl, self.theta_zl),
            Side::Right => (self.theta_xr, self.theta_yr, self.theta_zr),
        }
    }

    fn t_y(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.t_yl,
            Side::Right => self.t_yr,
        }
    }

    fn delta_f(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.delta_fl,
            Side::Right => self.delta_fr,
        }
    }
}

/// Rectifying transforms for both images plus the fundamental matrix they induce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomographyPair {
    pub left: Mat3,
    pub right: Mat3,
    pub fundamental: Mat3,
}

impl HomographyPair {
    pub fn new(left: Mat3, right: Mat3) -> Result<Self> {
        let fundamental = fundamental_from_homographies(&left, &right)?;
        Ok(Self { left, right, fundamental })
    }

    pub fn identity() -> Self {
        Self::new(Mat3::identity(), Mat3::identity()).expect("identity is invertible")
    }

    pub fn get(&self, side: Side) -> &Mat3 {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

/// Intrinsics for a focal deviation; `δ` outside `±1.5` is clamped with a warning.
pub fn old_intrinsics(dims: RigDims, delta_f: f64) -> CameraIntrinsics {
    let clamped = delta_f.clamp(-DELTA_F_LIMIT, DELTA_F_LIMIT);
    if clamped != delta_f {
        log::warn!("focal deviation {delta_f} clamped to {clamped}");
    }
    CameraIntrinsics::new(dims.base_focal() * 3f64.powf(clamped), dims.w, dims.h)
}

/// `R = R_x(θx) · R_y(θy) · R_z(θz)`.
pub fn rotation(theta_x: f64, theta_y: f64, theta_z: f64) -> Mat3 {
    let (sx, cx) = theta_x.sin_cos();
    let (sy, cy) = theta_y.sin_cos();
    let (sz, cz) = theta_z.sin_cos();
    let rx = Mat3::new(1.0, 0.0, 0.0, 0.0, cx, -sx, 0.0, sx, cx);
    let ry = Mat3::new(cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy);
    let rz = Mat3::new(cz, -sz, 0.0, sz, cz, 0.0, 0.0, 0.0, 1.0);
    rx * ry * rz
}

fn vertical_translation(t_y: f64) -> Mat3 {
    Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, t_y, 0.0, 0.0, 1.0)
}

pub fn homography(side: Side, params: &RectParams, dims: RigDims) -> Result<Mat3> {
    if !params.is_finite() {
        return Err(Error::InvalidInput("non-finite rectification parameters".into()));
    }
    let k_new = old_intrinsics(dims, params.delta_fl);
    let k_old = old_intrinsics(dims, params.delta_f(side));
    let (tx, ty, tz) = params.rotation_angles(side);
    let h = k_new.as_matrix() * vertical_translation(params.t_y(side)) * rotation(tx, ty, tz) * k_old.inverse_matrix();
    let det = h.determinant();
    if !(det.abs() >= 1e-12) {
        return Err(Error::SingularHomography(det));
    }
    Ok(h)
}

pub fn homography_pair(params: &RectParams, dims: RigDims) -> Result<HomographyPair> {
    HomographyPair::new(homography(Side::Left, params, dims)?, homography(Side::Right, params, dims)?)
}

pub fn induced_fundamental(params: &RectParams, dims: RigDims) -> Result<Mat3> {
    Ok(homography_pair(params, dims)?.fundamental)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{f_infinity, transform_point, Point2};
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use std::f64::consts::FRAC_PI_2;

    fn axis(i: usize) -> Vector3<f64> {
        let mut v = Vector3::zeros();
        v[i] = 1.0;
        v
    }

    fn hd() -> RigDims {
        RigDims::new(1920.0, 1080.0).unwrap()
    }

    #[test]
    fn focal_law() {
        assert_abs_diff_eq!(old_intrinsics(hd(), 0.0).alpha, 3000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(old_intrinsics(hd(), 1.0).alpha, 9000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(old_intrinsics(hd(), -0.5).alpha, 3000.0 / 3f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(old_intrinsics(hd(), -0.5).alpha, 1732.0508, epsilon = 1e-4);
        // clamped
        assert_eq!(old_intrinsics(hd(), 5.0).alpha, old_intrinsics(hd(), 1.5).alpha);
    }

    #[test]
    fn focal_is_monotone() {
        let mut prev = 0.0;
        for i in -150..=150 {
            let a = old_intrinsics(hd(), i as f64 / 100.0).alpha;
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn rotation_cases() {
        assert_eq!(rotation(0.0, 0.0, 0.0), Mat3::identity());
        let rz = rotation(0.0, 0.0, FRAC_PI_2);
        let expected = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!((rz - expected).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_matches_matrix_exponential() {
        // Independent route: exp of skew-symmetric generators, composed in the same order.
        fn expm(axis: Vector3<f64>, angle: f64) -> Mat3 {
            let k = axis.cross_matrix() * angle;
            let mut term = Mat3::identity();
            let mut sum = Mat3::identity();
            for n in 1..30 {
                term = term * k / n as f64;
                sum += term;
            }
            sum
        }
        let r = rotation(0.1, 0.2, 0.3);
        let oracle = expm(axis(0), 0.1) * expm(axis(1), 0.2) * expm(axis(2), 0.3);
        assert_abs_diff_eq!((r - oracle).amax(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((r * r.transpose() - Mat3::identity()).amax(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_params_give_identity_exactly() {
        let p = RectParams::zero();
        assert_eq!(homography(Side::Left, &p, hd()).unwrap(), Mat3::identity());
        assert_eq!(homography(Side::Right, &p, hd()).unwrap(), Mat3::identity());
        assert_eq!(induced_fundamental(&p, hd()).unwrap(), f_infinity());
    }

    #[test]
    fn vertical_shift_is_alpha_times_ty() {
        let p = RectParams { t_yl: 0.01, ..Default::default() };
        let h = homography(Side::Left, &p, hd()).unwrap();
        for (u, v) in [(0.0, 0.0), (1919.0, 1079.0), (512.5, 33.25)] {
            let q = transform_point(&h, &Point2::new(u, v)).unwrap();
            assert_abs_diff_eq!(q.x, u, epsilon = 1e-9);
            assert_abs_diff_eq!(q.y, v + 30.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn right_focal_deviation_scales_about_center() {
        let p = RectParams { delta_fr: 2f64.ln() / 3f64.ln(), ..Default::default() };
        let h = homography(Side::Right, &p, hd()).unwrap();
        let (cx, cy) = (960.0, 540.0);
        for (u, v) in [(0.0, 0.0), (1920.0, 1080.0), (100.0, 900.0)] {
            let q = transform_point(&h, &Point2::new(u, v)).unwrap();
            assert_abs_diff_eq!(q.x, cx + (u - cx) / 2.0, epsilon = 1e-9);
            assert_abs_diff_eq!(q.y, cy + (v - cy) / 2.0, epsilon = 1e-9);
        }
        // The left side is untouched.
        assert_abs_diff_eq!((homography(Side::Left, &p, hd()).unwrap() - Mat3::identity()).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn induced_f_composes_through_f_infinity() {
        let p = RectParams::from_array([0.02, -0.01, 0.03, 0.015, -0.02, 0.004, -0.003, 0.1, -0.05]);
        let pair = homography_pair(&p, hd()).unwrap();
        let ml = Vector3::new(300.0, 700.0, 1.0);
        // Any right point on the epipolar line of ml satisfies the rectified constraint too.
        let line = pair.fundamental.transpose() * ml;
        let mr = Vector3::new(900.0, -(line.x * 900.0 + line.z) / line.y, 1.0);
        let lhs = (ml.transpose() * pair.fundamental * mr)[0];
        let rect = ((pair.left * ml).transpose() * f_infinity() * (pair.right * mr))[0];
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-9 * pair.fundamental.norm() * ml.norm() * mr.norm());
        assert_abs_diff_eq!(rect, 0.0, epsilon = 1e-9 * (pair.left * ml).norm() * (pair.right * mr).norm());
    }

    #[test]
    fn param_array_round_trip() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        assert_eq!(RectParams::from_array(a).to_array(), a);
        assert!(RectParams::from_slice(&a[..8]).is_err());
    }
}
