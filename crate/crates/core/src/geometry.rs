//! Pinhole camera and two-view epipolar primitives.
//!
//! Conventions used throughout the crate:
//! - image points are homogeneous `(u, v, 1)` in 0-based pixel coordinates;
//! - a fundamental matrix `F` satisfies `m_lᵀ F m_r = 0` for a left/right match;
//! - homogeneous quantities are only defined up to scale, so comparisons
//!   normalize the scale (and sign) away first.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;
/// Homogeneous image coordinates `(x, y, w)`.
pub type Vec3H = Vector3<f64>;
pub type Point2 = Vector2<f64>;

/// Points with `|w|` below this are treated as lying at infinity.
pub const DEHOMOGENIZE_EPS: f64 = 1e-12;

/// Fundamental matrix of a rectified pair: corresponding points share a row.
pub fn f_infinity() -> Mat3 {
    Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0)
}

pub fn dehomogenize(v: &Vec3H) -> Result<Point2> {
    if v.z.abs() < DEHOMOGENIZE_EPS || !v.iter().all(|x| x.is_finite()) {
        return Err(Error::PointAtInfinity);
    }
    Ok(Point2::new(v.x / v.z, v.y / v.z))
}

/// Applies a homography to a pixel and dehomogenizes the result.
pub fn transform_point(h: &Mat3, p: &Point2) -> Result<Point2> {
    dehomogenize(&(h * Vec3H::new(p.x, p.y, 1.0)))
}

/// Largest entrywise difference between two matrices scaled to unit Frobenius
/// norm, minimized over the sign ambiguity.
pub fn projective_distance(a: &Mat3, b: &Mat3) -> f64 {
    let (na, nb) = (a / a.norm(), b / b.norm());
    (na - nb).amax().min((na + nb).amax())
}

/// Intrinsic matrix with a single focal length and the principal point at the image center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub alpha: f64,
    pub width: f64,
    pub height: f64,
}

impl CameraIntrinsics {
    pub fn new(alpha: f64, width: f64, height: f64) -> Self {
        Self { alpha, width, height }
    }

    pub fn as_matrix(&self) -> Mat3 {
        Mat3::new(
            self.alpha,
            0.0,
            self.width / 2.0,
            0.0,
            self.alpha,
            self.height / 2.0,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Closed-form inverse of [`as_matrix`](Self::as_matrix).
    pub fn inverse_matrix(&self) -> Mat3 {
        let inv = 1.0 / self.alpha;
        Mat3::new(
            inv,
            0.0,
            -self.width / 2.0 * inv,
            0.0,
            inv,
            -self.height / 2.0 * inv,
            0.0,
            0.0,
            1.0,
        )
    }
}

/// World-to-camera rigid transform: `x_cam = R x_world + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub rotation: Mat3,
    pub translation: Vector3<f64>,
}

impl CameraPose {
    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vector3::zeros() }
    }

    /// Pose of a camera with orientation `cam_to_world` placed at `center`.
    pub fn from_center(cam_to_world: Mat3, center: Vector3<f64>) -> Self {
        let rotation = cam_to_world.transpose();
        Self { rotation, translation: -(rotation * center) }
    }

    pub fn optical_center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }
}

/// Projects a world point through `K [R | t]`.
pub fn project(k: &CameraIntrinsics, pose: &CameraPose, point_w: &Vector3<f64>) -> Result<Vec3H> {
    let cam = pose.rotation * point_w + pose.translation;
    let m = k.as_matrix() * cam;
    if m.z.abs() < DEHOMOGENIZE_EPS {
        return Err(Error::DegenerateProjection);
    }
    Ok(m)
}

/// `F = H_lᵀ F∞ H_r` for a pair of rectifying homographies.
pub fn fundamental_from_homographies(hl: &Mat3, hr: &Mat3) -> Result<Mat3> {
    for h in [hl, hr] {
        let det = h.determinant();
        if !(det.abs() >= 1e-12) {
            return Err(Error::SingularHomography(det));
        }
    }
    Ok(hl.transpose() * f_infinity() * hr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Unit null vector of `F` (`Side::Left`, `F e = 0`) or of `Fᵀ` (`Side::Right`).
///
/// With `m_lᵀ F m_r = 0` the null vector of `F` is a point of the right image
/// and the null vector of `Fᵀ` a point of the left image; the side names the
/// factor of the constraint, not the image the point lies in.
pub fn epipole(f: &Mat3, side: Side) -> Result<Vec3H> {
    let m = match side {
        Side::Left => *f,
        Side::Right => f.transpose(),
    };
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::RankDeficient)?;
    let mut sv: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
    sv.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (largest, second, (smallest_idx, _)) = (sv[0].1, sv[1].1, sv[2]);
    if largest == 0.0 || second < 1e-10 * largest {
        return Err(Error::RankDeficient);
    }
    let e = v_t.row(smallest_idx).transpose();
    Ok(e / e.norm())
}

/// Ratio of the smallest to the largest singular value.
pub fn rank2_ratio(f: &Mat3) -> f64 {
    let s = f.singular_values();
    let max = s.max();
    if max == 0.0 {
        return 0.0;
    }
    s.min() / max
}

/// Normalized algebraic epipolar residual `|m_lᵀ F m_r| / (‖F‖ ‖m_l‖ ‖m_r‖)`.
pub fn normalized_epipolar_residual(f: &Mat3, ml: &Point2, mr: &Point2) -> f64 {
    let l = Vec3H::new(ml.x, ml.y, 1.0);
    let r = Vec3H::new(mr.x, mr.y, 1.0);
    (l.transpose() * f * r)[0].abs() / (f.norm() * l.norm() * r.norm())
}
