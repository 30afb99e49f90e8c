//! Synthetic stereo rigs with exact ground truth.
//!
//! Two pinhole cameras look at points sampled in a box. The left camera sits
//! at the origin looking down +Z; the right camera is offset along +X by the
//! baseline. A distortion perturbs the right camera (or both, for the compound
//! cases) by a translation or a rotation about one of its own axes, emulating
//! vertical misalignment, converging cameras and zoom differences.
//!
//! Ground truth comes from the poses directly: the fundamental matrix from the
//! relative pose, and the rectifying homographies from rotating both cameras
//! into a common frame whose x-axis is the baseline.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dehomogenize, project, CameraIntrinsics, CameraPose, Mat3};
use crate::metrics::{sampson_residual, CorrespondenceSet};
use crate::model::{rotation, HomographyPair, RigDims};

/// Labeled outliers are at least this far (Sampson distance, pixels) from the true epipolar geometry.
pub const OUTLIER_MIN_DISTANCE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distortion {
    None,
    XTrans,
    YTrans,
    ZTrans,
    XRot,
    YRot,
    ZRot,
    Compound1,
    Compound2,
}

impl Distortion {
    pub const SUITE: [Distortion; 8] = [
        Distortion::XTrans,
        Distortion::YTrans,
        Distortion::ZTrans,
        Distortion::XRot,
        Distortion::YRot,
        Distortion::ZRot,
        Distortion::Compound1,
        Distortion::Compound2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distortion::None => "none",
            Distortion::XTrans => "x_trans",
            Distortion::YTrans => "y_trans",
            Distortion::ZTrans => "z_trans",
            Distortion::XRot => "x_rot",
            Distortion::YRot => "y_rot",
            Distortion::ZRot => "z_rot",
            Distortion::Compound1 => "compound1",
            Distortion::Compound2 => "compound2",
        }
    }

    /// Magnitude used by the benchmark suite. Translations are in world units
    /// (relative to `baseline`), rotations in degrees, compounds a scale on the preset.
    pub fn suite_magnitude(self, baseline: f64) -> f64 {
        match self {
            Distortion::None => 0.0,
            Distortion::XTrans => baseline,
            Distortion::YTrans => baseline / 6.0,
            Distortion::ZTrans => 0.3 * baseline,
            Distortion::XRot | Distortion::YRot | Distortion::ZRot => 10.0,
            Distortion::Compound1 | Distortion::Compound2 => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigConfig {
    pub dims: RigDims,
    /// True focal length of the left camera, pixels.
    pub focal: f64,
    /// Right focal length over left focal length.
    pub zoom: f64,
    pub baseline: f64,
    pub n_points: usize,
    pub box_min: [f64; 3],
    pub box_max: [f64; 3],
    pub distortion: Distortion,
    pub magnitude: f64,
    pub noise_sigma: f64,
    pub outlier_fraction: f64,
    pub seed: u64,
}

impl RigConfig {
    /// Undistorted rig for the given image size: focal `0.8 (w + h)`, 300 points at depths 8–16.
    pub fn new(dims: RigDims) -> Self {
        Self {
            dims,
            focal: 0.8 * (dims.w + dims.h),
            zoom: 1.0,
            baseline: 0.6,
            n_points: 300,
            box_min: [-8.0, -5.0, 8.0],
            box_max: [8.0, 5.0, 16.0],
            distortion: Distortion::None,
            magnitude: 0.0,
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            seed: 0,
        }
    }

    pub fn with_distortion(mut self, distortion: Distortion, magnitude: f64) -> Self {
        self.distortion = distortion;
        self.magnitude = magnitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.focal, self.zoom, self.baseline, self.magnitude, self.noise_sigma, self.outlier_fraction]
            .iter()
            .chain(self.box_min.iter())
            .chain(self.box_max.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("rig configuration has non-finite values".into()));
        }
        if self.focal <= 0.0 || self.zoom <= 0.0 || self.baseline <= 0.0 {
            return Err(Error::InvalidInput("focal, zoom and baseline must be positive".into()));
        }
        if self.n_points < 8 {
            return Err(Error::InvalidInput("at least 8 points are required".into()));
        }
        if (0..3).any(|i| self.box_min[i] >= self.box_max[i]) || self.box_min[2] <= 0.0 {
            return Err(Error::InvalidInput("point box must be non-empty and in front of the cameras".into()));
        }
        if self.noise_sigma < 0.0 || !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(Error::InvalidInput("noise must be >= 0 and outlier fraction in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub intrinsics: CameraIntrinsics,
    pub pose: CameraPose,
}

impl Camera {
    fn project_pixel(&self, p: &Vector3<f64>) -> Option<[f64; 2]> {
        let cam_z = (self.pose.rotation * p + self.pose.translation).z;
        if cam_z <= 1e-6 {
            return None;
        }
        let m = dehomogenize(&project(&self.intrinsics, &self.pose, p).ok()?).ok()?;
        let (w, h) = (self.intrinsics.width, self.intrinsics.height);
        (m.x >= 0.0 && m.x < w && m.y >= 0.0 && m.y < h).then_some([m.x, m.y])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Unit-norm fundamental matrix, `m_lᵀ F m_r = 0`.
    pub fundamental: Mat3,
    pub homographies: HomographyPair,
    /// `true` for inliers, aligned with the correspondence order.
    pub inlier_mask: Vec<bool>,
    pub left: Camera,
    pub right: Camera,
}

/// Camera placements (orientation camera→world, center) for both views.
fn rig_poses(cfg: &RigConfig) -> ((Mat3, Vector3<f64>), (Mat3, Vector3<f64>)) {
    let b = cfg.baseline;
    let m = cfg.magnitude;
    let deg = |x: f64| (x * m).to_radians();
    let mut left = (Mat3::identity(), Vector3::zeros());
    let mut right = (Mat3::identity(), Vector3::new(b, 0.0, 0.0));
    match cfg.distortion {
        Distortion::None => {}
        Distortion::XTrans => right.1.x += m,
        Distortion::YTrans => right.1.y += m,
        Distortion::ZTrans => right.1.z += m,
        Distortion::XRot => right.0 = rotation(m.to_radians(), 0.0, 0.0),
        Distortion::YRot => right.0 = rotation(0.0, m.to_radians(), 0.0),
        Distortion::ZRot => right.0 = rotation(0.0, 0.0, m.to_radians()),
        Distortion::Compound1 => {
            left.0 = rotation(deg(-5.0), deg(5.0), deg(5.0));
            right.0 = rotation(deg(5.0), deg(-5.0), deg(-5.0));
            right.1 += Vector3::new(0.5 * b, 0.15 * b, 0.1 * b) * m;
        }
        Distortion::Compound2 => {
            left.0 = rotation(deg(3.0), deg(4.0), deg(-6.0));
            left.1 += Vector3::new(-0.3 * b, 0.1 * b, 0.0) * m;
            right.0 = rotation(deg(-7.0), deg(-6.0), deg(4.0));
            right.1 += Vector3::new(0.3 * b, -0.12 * b, -0.15 * b) * m;
        }
    }
    (left, right)
}

/// `F = K_l⁻ᵀ [t]ₓ R K_r⁻¹` from the relative pose `x_l = R x_r + t`.
fn fundamental_from_cameras(l: &Camera, r: &Camera) -> Mat3 {
    let rel_r = l.pose.rotation * r.pose.rotation.transpose();
    let rel_t = l.pose.translation - rel_r * r.pose.translation;
    let f = l.intrinsics.inverse_matrix().transpose() * rel_t.cross_matrix() * rel_r * r.intrinsics.inverse_matrix();
    f / f.norm()
}

/// Calibrated rectification: both cameras rotated so the new x-axis is the baseline.
fn rectifying_homographies(l: &Camera, r: &Camera) -> Result<HomographyPair> {
    let cl = l.pose.optical_center();
    let cr = r.pose.optical_center();
    let x = (cr - cl).normalize();
    let left_axis = l.pose.rotation.transpose() * Vector3::z();
    let y = left_axis.cross(&x).normalize();
    let z = x.cross(&y);
    let new_rot = Mat3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    let k_new = l.intrinsics.as_matrix();
    let h = |c: &Camera| k_new * new_rot * c.pose.rotation.transpose() * c.intrinsics.inverse_matrix();
    HomographyPair::new(h(l), h(r))
}

pub fn generate(cfg: &RigConfig) -> Result<(CorrespondenceSet, GroundTruth)> {
    cfg.validate()?;
    let (w, h) = (cfg.dims.w, cfg.dims.h);
    let ((lrot, lc), (rrot, rc)) = rig_poses(cfg);
    let left = Camera { intrinsics: CameraIntrinsics::new(cfg.focal, w, h), pose: CameraPose::from_center(lrot, lc) };
    let right = Camera {
        intrinsics: CameraIntrinsics::new(cfg.focal * cfg.zoom, w, h),
        pose: CameraPose::from_center(rrot, rc),
    };
    let fundamental = fundamental_from_cameras(&left, &right);
    let homographies = rectifying_homographies(&left, &right)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_outliers = (cfg.n_points as f64 * cfg.outlier_fraction).round() as usize;
    let n_inliers = cfg.n_points - n_outliers;

    let mut inliers = Vec::with_capacity(n_inliers);
    let max_attempts = 1000 * cfg.n_points;
    let mut attempts = 0;
    while inliers.len() < n_inliers && attempts < max_attempts {
        attempts += 1;
        let p = Vector3::new(
            rng.random_range(cfg.box_min[0]..cfg.box_max[0]),
            rng.random_range(cfg.box_min[1]..cfg.box_max[1]),
            rng.random_range(cfg.box_min[2]..cfg.box_max[2]),
        );
        if let (Some(a), Some(b)) = (left.project_pixel(&p), right.project_pixel(&p)) {
            inliers.push([a[0], a[1], b[0], b[1]]);
        }
    }
    if inliers.len() < 8 {
        return Err(Error::TooFewVisiblePoints(inliers.len()));
    }
    if cfg.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
        for pair in &mut inliers {
            for v in pair.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }

    let min_distance = (10.0 * cfg.noise_sigma).max(OUTLIER_MIN_DISTANCE);
    let mut outliers = Vec::with_capacity(n_outliers);
    while outliers.len() < n_outliers {
        let pair = [rng.random_range(0.0..w), rng.random_range(0.0..h), rng.random_range(0.0..w), rng.random_range(0.0..h)];
        if sampson_residual(&fundamental, &pair).is_some_and(|r| r.abs() > min_distance) {
            outliers.push(pair);
        }
    }

    // Interleave the two groups in a seeded random order.
    let total = inliers.len() + outliers.len();
    let mut labels: Vec<bool> = std::iter::repeat_n(true, inliers.len()).chain(std::iter::repeat_n(false, outliers.len())).collect();
    for i in (1..total).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let (mut ins, mut outs) = (inliers.into_iter(), outliers.into_iter());
    let pairs: Vec<[f64; 4]> = labels
        .iter()
        .map(|&inlier| if inlier { ins.next() } else { outs.next() }.expect("label counts match"))
        .collect();

    let set = CorrespondenceSet::new(cfg.dims, pairs)?;
    Ok((set, GroundTruth { fundamental, homographies, inlier_mask: labels, left, right }))
}

/// Noise and sampling settings shared by every case of a suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub n_points: usize,
    pub noise_sigma: f64,
    pub outlier_fraction: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { n_points: 300, noise_sigma: 0.3, outlier_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCase {
    pub name: String,
    pub config: RigConfig,
    pub correspondences: CorrespondenceSet,
    pub truth: GroundTruth,
}

/// Rig configuration for one suite case.
pub fn suite_config(dims: RigDims, distortion: Distortion, seed: u64, opts: &SuiteOptions) -> RigConfig {
    let mut cfg = RigConfig::new(dims);
    cfg.distortion = distortion;
    cfg.magnitude = distortion.suite_magnitude(cfg.baseline);
    cfg.n_points = opts.n_points;
    cfg.noise_sigma = opts.noise_sigma;
    cfg.outlier_fraction = opts.outlier_fraction;
    let index = Distortion::SUITE.iter().position(|d| *d == distortion).unwrap_or(8) as u64;
    cfg.seed = seed.wrapping_mul(1_000_003).wrapping_add(index);
    cfg
}

/// Six single-distortion cases followed by the two compound cases.
pub fn make_suite_with(dims: RigDims, seed: u64, opts: &SuiteOptions) -> Result<Vec<SuiteCase>> {
    Distortion::SUITE
        .iter()
        .map(|&d| {
            let config = suite_config(dims, d, seed, opts);
            let (correspondences, truth) = generate(&config)?;
            Ok(SuiteCase { name: d.name().to_string(), config, correspondences, truth })
        })
        .collect()
}

pub fn make_suite(dims: RigDims, seed: u64) -> Result<Vec<SuiteCase>> {
    make_suite_with(dims, seed, &SuiteOptions::default())
}
