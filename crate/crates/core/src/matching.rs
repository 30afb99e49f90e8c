//! Outlier rejection for putative matches.
//!
//! A normalized eight-point solver provides fundamental-matrix hypotheses and
//! RANSAC keeps the matches whose Sampson distance stays under a pixel
//! threshold. The random stream is seeded so runs are reproducible.

use nalgebra::{DMatrix, Matrix3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Mat3;
use crate::metrics::{sampson_residual, CorrespondenceSet};

pub const MIN_PAIRS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    pub max_iterations: usize,
    /// Sampson distance in pixels.
    pub inlier_threshold: f64,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self { max_iterations: 2000, inlier_threshold: 1.5, confidence: 0.999, seed: 0 }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("ransac needs at least one iteration".into()));
        }
        if !(self.inlier_threshold > 0.0 && self.inlier_threshold.is_finite()) {
            return Err(Error::InvalidInput("ransac threshold must be positive".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidInput("ransac confidence must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Similarity that moves the centroid to the origin and the mean radius to √2.
fn hartley_normalization(points: impl Iterator<Item = (f64, f64)> + Clone) -> Result<Matrix3<f64>> {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + x, ay + y));
    let (cx, cy) = (sx / n, sy / n);
    let mean_dist = points.map(|(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt()).sum::<f64>() / n;
    if !(mean_dist > 1e-12) {
        return Err(Error::DegenerateConfiguration("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

/// Normalized eight-point estimate of `F` (with `m_lᵀ F m_r = 0`), rank forced to 2.
pub fn estimate_fundamental_8pt(c: &CorrespondenceSet) -> Result<Mat3> {
    let n = c.len();
    if n < MIN_PAIRS {
        return Err(Error::InsufficientInliers { needed: MIN_PAIRS, got: n });
    }
    let tl = hartley_normalization(c.pairs.iter().map(|p| (p[0], p[1])))?;
    let tr = hartley_normalization(c.pairs.iter().map(|p| (p[2], p[3])))?;

    // Pad to at least nine rows so the SVD exposes all nine singular values.
    let mut a = DMatrix::<f64>::zeros(n.max(9), 9);
    for (i, p) in c.pairs.iter().enumerate() {
        let l = tl * nalgebra::Vector3::new(p[0], p[1], 1.0);
        let r = tr * nalgebra::Vector3::new(p[2], p[3], 1.0);
        for row in 0..3 {
            for col in 0..3 {
                a[(i, 3 * row + col)] = l[row] * r[col];
            }
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::DegenerateConfiguration("svd failed".into()))?;
    let mut order: Vec<usize> = (0..9).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let largest = svd.singular_values[order[8]];
    let second_smallest = svd.singular_values[order[1]];
    if !(second_smallest > 1e-10 * largest) {
        return Err(Error::DegenerateConfiguration("design matrix has a multi-dimensional null space".into()));
    }
    let f = v_t.row(order[0]);
    let f_norm = Matrix3::new(f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8]);

    let svd_f = f_norm.svd(true, true);
    let (u, v_t) = match (svd_f.u, svd_f.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateConfiguration("svd failed".into())),
    };
    let mut s = svd_f.singular_values;
    let min_idx = s.imin();
    s[min_idx] = 0.0;
    let rank2 = u * Matrix3::from_diagonal(&s) * v_t;

    let f = tl.transpose() * rank2 * tr;
    Ok(f / f.norm())
}

/// Result of [`ransac_filter_indexed`].
#[derive(Debug, Clone, PartialEq)]
pub struct RansacOutcome {
    /// Indices of retained pairs into the input set, ascending.
    pub inliers: Vec<usize>,
    pub fundamental: Mat3,
    pub iterations: usize,
}

fn consensus(f: &Mat3, c: &CorrespondenceSet, threshold: f64) -> Vec<usize> {
    c.pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| sampson_residual(f, p).is_some_and(|r| r.abs() <= threshold))
        .map(|(i, _)| i)
        .collect()
}

fn required_iterations(inlier_ratio: f64, confidence: f64) -> f64 {
    let good_sample = inlier_ratio.powi(MIN_PAIRS as i32);
    if good_sample >= 1.0 {
        return 0.0;
    }
    if good_sample <= 0.0 {
        return f64::INFINITY;
    }
    // ln_1p keeps the denominator non-zero when good_sample is far below machine epsilon.
    (1.0 - confidence).ln() / (-good_sample).ln_1p()
}

pub fn ransac_filter_indexed(c: &CorrespondenceSet, cfg: &RansacConfig) -> Result<RansacOutcome> {
    cfg.validate()?;
    let n = c.len();
    if n < MIN_PAIRS {
        return Err(Error::InsufficientInliers { needed: MIN_PAIRS, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Vec<usize> = Vec::new();
    let mut budget = cfg.max_iterations as f64;
    let mut iterations = 0;
    while (iterations as f64) < budget.min(cfg.max_iterations as f64) {
        iterations += 1;
        let sample = rand::seq::index::sample(&mut rng, n, MIN_PAIRS).into_vec();
        let Ok(f) = estimate_fundamental_8pt(&c.select(&sample)) else {
            continue;
        };
        let inliers = consensus(&f, c, cfg.inlier_threshold);
        if inliers.len() > best.len() {
            best = inliers;
            budget = required_iterations(best.len() as f64 / n as f64, cfg.confidence).ceil();
        }
    }
    if best.len() < MIN_PAIRS {
        return Err(Error::InsufficientInliers { needed: MIN_PAIRS, got: best.len() });
    }

    // Refit on the consensus set until the selection stops changing.
    let mut f = estimate_fundamental_8pt(&c.select(&best))?;
    for _ in 0..10 {
        let next = consensus(&f, c, cfg.inlier_threshold);
        if next == best || next.len() < MIN_PAIRS {
            break;
        }
        best = next;
        f = estimate_fundamental_8pt(&c.select(&best))?;
    }
    let inliers = consensus(&f, c, cfg.inlier_threshold);
    if inliers.len() < MIN_PAIRS {
        return Err(Error::InsufficientInliers { needed: MIN_PAIRS, got: inliers.len() });
    }
    Ok(RansacOutcome { inliers, fundamental: f, iterations })
}

/// Inlier subset and the consensus `F` refit on it.
pub fn ransac_filter(c: &CorrespondenceSet, cfg: &RansacConfig) -> Result<(CorrespondenceSet, Mat3)> {
    let out = ransac_filter_indexed(c, cfg)?;
    Ok((c.select(&out.inliers), out.fundamental))
}
