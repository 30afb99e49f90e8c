//! Rectification quality measures.
//!
//! The rectification error is reported two ways: the Sampson error of the
//! induced fundamental matrix and the mean vertical disparity `E_v` of the
//! transformed correspondences. Geometric distortion is measured per image
//! from how the homography moves a handful of reference points:
//!
//! | measure | reference points | ideal |
//! |---------|------------------|-------|
//! | `E_O`   | edge midpoints, angle between the mapped mid-lines | 90° |
//! | `E_A`   | corners, ratio of the mapped diagonals | 1 |
//! | `E_AR`  | center to edge midpoints, top/bottom and right/left ratios | 1 |
//! | `E_Sk`  | corners, mean deviation of interior angles from 90° | 0° |
//! | `E_R`   | center to right-edge midpoint, rotation of that vector | 0° |
//! | `E_SR`  | corners, mapped area over original area | 1 |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dehomogenize, transform_point, Mat3, Point2, Side, Vec3H};
use crate::model::{HomographyPair, RigDims};

const MIN_SEGMENT: f64 = 1e-9;

/// Matched points `(u_l, v_l, u_r, v_r)` in 0-based pixels plus the shared image size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceSet {
    pub dims: RigDims,
    pub pairs: Vec<[f64; 4]>,
}

impl CorrespondenceSet {
    pub fn new(dims: RigDims, pairs: Vec<[f64; 4]>) -> Result<Self> {
        if let Some(i) = pairs.iter().position(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidInput(format!("pair {i} has non-finite coordinates")));
        }
        Ok(Self { dims, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn left(&self, j: usize) -> Point2 {
        Point2::new(self.pairs[j][0], self.pairs[j][1])
    }

    pub fn right(&self, j: usize) -> Point2 {
        Point2::new(self.pairs[j][2], self.pairs[j][3])
    }

    /// Subset selected by index, preserving order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self { dims: self.dims, pairs: indices.iter().map(|&i| self.pairs[i]).collect() }
    }
}

fn homog(p: &[f64]) -> Vec3H {
    Vec3H::new(p[0], p[1], 1.0)
}

/// Signed first-order geometric residual of one pair under `F`.
///
/// Its square is `(m_lᵀ F m_r)² / ((F m_r)₁² + (F m_r)₂² + (Fᵀ m_l)₁² + (Fᵀ m_l)₂²)`.
pub fn sampson_residual(f: &Mat3, pair: &[f64; 4]) -> Option<f64> {
    let ml = homog(&pair[0..2]);
    let mr = homog(&pair[2..4]);
    let f_mr = f * mr;
    let ft_ml = f.transpose() * ml;
    let num = ml.dot(&f_mr);
    let den = f_mr.x * f_mr.x + f_mr.y * f_mr.y + ft_ml.x * ft_ml.x + ft_ml.y * ft_ml.y;
    if !(den > 0.0) {
        return None;
    }
    Some(num / den.sqrt())
}

pub fn sampson_residuals(f: &Mat3, c: &CorrespondenceSet) -> Result<Vec<f64>> {
    c.pairs
        .iter()
        .enumerate()
        .map(|(j, p)| sampson_residual(f, p).ok_or(Error::ZeroDenominator(j)))
        .collect()
}

/// `E_s = (1/N) · sqrt(Σ_j r_j²)`, with the `1/N` outside the root.
pub fn sampson_error(f: &Mat3, c: &CorrespondenceSet) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::InvalidInput("sampson error needs at least one pair".into()));
    }
    let sum: f64 = sampson_residuals(f, c)?.iter().map(|r| r * r).sum();
    Ok(sum.sqrt() / c.len() as f64)
}

/// Mean absolute difference of the dehomogenized rows of `H_l m_l` and `H_r m_r`.
pub fn vertical_disparity(hl: &Mat3, hr: &Mat3, c: &CorrespondenceSet) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::InvalidInput("vertical disparity needs at least one pair".into()));
    }
    let mut sum = 0.0;
    for p in &c.pairs {
        let yl = dehomogenize(&(hl * homog(&p[0..2])))?.y;
        let yr = dehomogenize(&(hr * homog(&p[2..4])))?.y;
        sum += (yl - yr).abs();
    }
    Ok(sum / c.len() as f64)
}

/// Unsigned angle between two vectors in degrees, in `[0, 180]`.
fn angle_deg(a: &Point2, b: &Point2) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    cross.abs().atan2(a.dot(b)).to_degrees()
}

fn map(h: &Mat3, x: f64, y: f64) -> Result<Point2> {
    transform_point(h, &Point2::new(x, y))
}

struct Landmarks {
    /// Edge midpoints: top, right, bottom, left.
    mid: [Point2; 4],
    /// Corners: top-left, top-right, bottom-right, bottom-left.
    corner: [Point2; 4],
    center: Point2,
}

impl Landmarks {
    fn original(d: RigDims) -> Self {
        let (w, h) = (d.w, d.h);
        Self {
            mid: [
                Point2::new(w / 2.0, 0.0),
                Point2::new(w, h / 2.0),
                Point2::new(w / 2.0, h),
                Point2::new(0.0, h / 2.0),
            ],
            corner: [Point2::new(0.0, 0.0), Point2::new(w, 0.0), Point2::new(w, h), Point2::new(0.0, h)],
            center: Point2::new(w / 2.0, h / 2.0),
        }
    }

    fn mapped(h: &Mat3, d: RigDims) -> Result<Self> {
        let o = Self::original(d);
        let m = |p: &Point2| map(h, p.x, p.y);
        Ok(Self {
            mid: [m(&o.mid[0])?, m(&o.mid[1])?, m(&o.mid[2])?, m(&o.mid[3])?],
            corner: [m(&o.corner[0])?, m(&o.corner[1])?, m(&o.corner[2])?, m(&o.corner[3])?],
            center: m(&o.center)?,
        })
    }
}

fn shoelace(q: &[Point2; 4]) -> f64 {
    let mut twice = 0.0;
    for i in 0..4 {
        let (a, b) = (q[i], q[(i + 1) % 4]);
        twice += a.x * b.y - b.x * a.y;
    }
    twice / 2.0
}

fn check_quadrilateral(q: &[Point2; 4], dims: RigDims) -> Result<()> {
    let short_edge = (0..4).any(|i| (q[(i + 1) % 4] - q[i]).norm() < MIN_SEGMENT);
    if short_edge || shoelace(q).abs() < 1e-12 * dims.w * dims.h {
        return Err(Error::DegenerateQuadrilateral);
    }
    Ok(())
}

/// Angle between the mapped horizontal and vertical mid-lines, degrees.
pub fn orthogonality(h: &Mat3, dims: RigDims) -> Result<f64> {
    let l = Landmarks::mapped(h, dims)?;
    let x = l.mid[1] - l.mid[3];
    let y = l.mid[2] - l.mid[0];
    if x.norm() < MIN_SEGMENT || y.norm() < MIN_SEGMENT {
        return Err(Error::ZeroLength("orthogonality"));
    }
    Ok(angle_deg(&x, &y))
}

/// Ratio of the two mapped diagonals of the image rectangle.
pub fn aspect_ratio_legacy(h: &Mat3, dims: RigDims) -> Result<f64> {
    let l = Landmarks::mapped(h, dims)?;
    let x = l.corner[1] - l.corner[3];
    let y = l.corner[2] - l.corner[0];
    if y.norm() < MIN_SEGMENT {
        return Err(Error::ZeroLength("aspect ratio"));
    }
    Ok((x.norm_squared() / y.norm_squared()).sqrt())
}

/// Mean of the top/bottom and right/left center-to-midpoint length ratios after mapping.
pub fn aspect_ratio_modified(h: &Mat3, dims: RigDims) -> Result<f64> {
    let l = Landmarks::mapped(h, dims)?;
    let seg = |p: &Point2| (p - l.center).norm();
    let (top, right, bottom, left) = (seg(&l.mid[0]), seg(&l.mid[1]), seg(&l.mid[2]), seg(&l.mid[3]));
    if bottom < MIN_SEGMENT || left < MIN_SEGMENT {
        return Err(Error::ZeroLength("modified aspect ratio"));
    }
    Ok(0.5 * (top / bottom + right / left))
}

/// Mean absolute deviation of the mapped corner angles from 90°.
pub fn skewness(h: &Mat3, dims: RigDims) -> Result<f64> {
    let q = Landmarks::mapped(h, dims)?.corner;
    check_quadrilateral(&q, dims)?;
    let total: f64 = (0..4)
        .map(|i| {
            let prev = q[(i + 3) % 4] - q[i];
            let next = q[(i + 1) % 4] - q[i];
            (90.0 - angle_deg(&prev, &next)).abs()
        })
        .sum();
    Ok(total / 4.0)
}

/// Angle between center→right-midpoint before and after mapping, degrees.
pub fn rotation_measure(h: &Mat3, dims: RigDims) -> Result<f64> {
    let o = Landmarks::original(dims);
    let l = Landmarks::mapped(h, dims)?;
    let before = o.mid[1] - o.center;
    let after = l.mid[1] - l.center;
    if after.norm() < MIN_SEGMENT {
        return Err(Error::ZeroLength("rotation"));
    }
    Ok(angle_deg(&before, &after))
}

/// Area of the mapped image rectangle over the original area.
pub fn size_ratio(h: &Mat3, dims: RigDims) -> Result<f64> {
    let q = Landmarks::mapped(h, dims)?.corner;
    check_quadrilateral(&q, dims)?;
    Ok(shoelace(&q).abs() / (dims.w * dims.h))
}

/// All six geometric measures of one rectified image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideGeometry {
    pub e_o: f64,
    pub e_a: f64,
    pub e_ar: f64,
    pub e_sk: f64,
    pub e_r: f64,
    pub e_sr: f64,
}

impl SideGeometry {
    pub const IDEAL: SideGeometry = SideGeometry { e_o: 90.0, e_a: 1.0, e_ar: 1.0, e_sk: 0.0, e_r: 0.0, e_sr: 1.0 };

    pub fn measure(h: &Mat3, dims: RigDims) -> Result<Self> {
        Ok(Self {
            e_o: orthogonality(h, dims)?,
            e_a: aspect_ratio_legacy(h, dims)?,
            e_ar: aspect_ratio_modified(h, dims)?,
            e_sk: skewness(h, dims)?,
            e_r: rotation_measure(h, dims)?,
            e_sr: size_ratio(h, dims)?,
        })
    }

    pub fn mean(a: &Self, b: &Self) -> Self {
        Self {
            e_o: 0.5 * (a.e_o + b.e_o),
            e_a: 0.5 * (a.e_a + b.e_a),
            e_ar: 0.5 * (a.e_ar + b.e_ar),
            e_sk: 0.5 * (a.e_sk + b.e_sk),
            e_r: 0.5 * (a.e_r + b.e_r),
            e_sr: 0.5 * (a.e_sr + b.e_sr),
        }
    }
}

/// Rectification and distortion summary. Serializes flat, with `_left` /
/// `_right` suffixed per-image values next to their averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub e_s: f64,
    pub e_v: f64,
    pub e_o: f64,
    pub e_a: f64,
    pub e_ar: f64,
    pub e_sk: f64,
    pub e_r: f64,
    pub e_sr: f64,
    pub e_o_left: f64,
    pub e_a_left: f64,
    pub e_ar_left: f64,
    pub e_sk_left: f64,
    pub e_r_left: f64,
    pub e_sr_left: f64,
    pub e_o_right: f64,
    pub e_a_right: f64,
    pub e_ar_right: f64,
    pub e_sk_right: f64,
    pub e_r_right: f64,
    pub e_sr_right: f64,
}

impl DistortionReport {
    pub fn from_parts(e_s: f64, e_v: f64, left: SideGeometry, right: SideGeometry) -> Self {
        let avg = SideGeometry::mean(&left, &right);
        Self {
            e_s,
            e_v,
            e_o: avg.e_o,
            e_a: avg.e_a,
            e_ar: avg.e_ar,
            e_sk: avg.e_sk,
            e_r: avg.e_r,
            e_sr: avg.e_sr,
            e_o_left: left.e_o,
            e_a_left: left.e_a,
            e_ar_left: left.e_ar,
            e_sk_left: left.e_sk,
            e_r_left: left.e_r,
            e_sr_left: left.e_sr,
            e_o_right: right.e_o,
            e_a_right: right.e_a,
            e_ar_right: right.e_ar,
            e_sk_right: right.e_sk,
            e_r_right: right.e_r,
            e_sr_right: right.e_sr,
        }
    }

    pub fn side(&self, side: Side) -> SideGeometry {
        match side {
            Side::Left => SideGeometry {
                e_o: self.e_o_left,
                e_a: self.e_a_left,
                e_ar: self.e_ar_left,
                e_sk: self.e_sk_left,
                e_r: self.e_r_left,
                e_sr: self.e_sr_left,
            },
            Side::Right => SideGeometry {
                e_o: self.e_o_right,
                e_a: self.e_a_right,
                e_ar: self.e_ar_right,
                e_sk: self.e_sk_right,
                e_r: self.e_r_right,
                e_sr: self.e_sr_right,
            },
        }
    }

    pub fn averaged(&self) -> SideGeometry {
        SideGeometry { e_o: self.e_o, e_a: self.e_a, e_ar: self.e_ar, e_sk: self.e_sk, e_r: self.e_r, e_sr: self.e_sr }
    }
}

pub fn full_report(hl: &Mat3, hr: &Mat3, c: &CorrespondenceSet) -> Result<DistortionReport> {
    let pair = HomographyPair::new(*hl, *hr)?;
    let e_s = sampson_error(&pair.fundamental, c)?;
    let e_v = vertical_disparity(hl, hr, c)?;
    let left = SideGeometry::measure(hl, c.dims)?;
    let right = SideGeometry::measure(hr, c.dims)?;
    Ok(DistortionReport::from_parts(e_s, e_v, left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::f_infinity;
    use approx::assert_abs_diff_eq;

    fn square() -> RigDims {
        RigDims::new(100.0, 100.0).unwrap()
    }

    fn hd() -> RigDims {
        RigDims::new(1920.0, 1080.0).unwrap()
    }

    /// Rotation by `deg` about the image center.
    fn center_rotation(deg: f64, d: RigDims) -> Mat3 {
        let (s, c) = deg.to_radians().sin_cos();
        let (cx, cy) = (d.w / 2.0, d.h / 2.0);
        let t = Mat3::new(1.0, 0.0, cx, 0.0, 1.0, cy, 0.0, 0.0, 1.0);
        let r = Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        let ti = Mat3::new(1.0, 0.0, -cx, 0.0, 1.0, -cy, 0.0, 0.0, 1.0);
        t * r * ti
    }

    fn center_scale(s: f64, d: RigDims) -> Mat3 {
        let (cx, cy) = (d.w / 2.0, d.h / 2.0);
        Mat3::new(s, 0.0, cx * (1.0 - s), 0.0, s, cy * (1.0 - s), 0.0, 0.0, 1.0)
    }

    fn set(pairs: Vec<[f64; 4]>) -> CorrespondenceSet {
        CorrespondenceSet::new(hd(), pairs).unwrap()
    }

    #[test]
    fn sampson_zero_on_rectified_rows() {
        let c = set(vec![[1.0, 5.0, 30.0, 5.0], [100.0, 400.0, 20.0, 400.0], [7.0, 0.0, 3.0, 0.0]]);
        assert_eq!(sampson_error(&f_infinity(), &c).unwrap(), 0.0);
    }

    #[test]
    fn sampson_single_pair_hand_value() {
        let c = set(vec![[0.0, 0.0, 0.0, 1.0]]);
        assert_abs_diff_eq!(sampson_error(&f_infinity(), &c).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn sampson_divides_by_n_outside_root() {
        // Four identical pairs, each with residual² = 1/2: sqrt(4 · 1/2) / 4.
        let c = set(vec![[0.0, 0.0, 0.0, 1.0]; 4]);
        assert_abs_diff_eq!(sampson_error(&f_infinity(), &c).unwrap(), 2f64.sqrt() / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn sampson_scale_invariant() {
        let c = set(vec![[0.0, 0.0, 0.0, 1.0], [10.0, 3.0, 12.0, 9.0]]);
        let f = f_infinity() + Mat3::new(1e-4, 2e-4, 0.0, 0.0, 1e-3, 0.0, 0.0, 0.0, 0.0);
        let a = sampson_error(&f, &c).unwrap();
        let b = sampson_error(&(f * 10.0), &c).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn sampson_zero_denominator() {
        let c = set(vec![[0.0, 0.0, 0.0, 0.0]]);
        let mut f = Mat3::zeros();
        f[(2, 2)] = 1.0;
        assert_eq!(sampson_error(&f, &c).unwrap_err(), Error::ZeroDenominator(0));
    }

    #[test]
    fn vertical_disparity_cases() {
        let c = set(vec![[1.0, 10.0, 5.0, 8.0], [40.0, 50.0, 2.0, 48.0]]);
        assert_abs_diff_eq!(vertical_disparity(&Mat3::identity(), &Mat3::identity(), &c).unwrap(), 2.0);
        let shift = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 3.0, 0.0, 0.0, 1.0);
        let flat = set(vec![[1.0, 10.0, 5.0, 10.0], [40.0, 50.0, 2.0, 50.0]]);
        assert_abs_diff_eq!(vertical_disparity(&shift, &Mat3::identity(), &flat).unwrap(), 3.0);
        // A common shift leaves E_v unchanged.
        assert_abs_diff_eq!(vertical_disparity(&shift, &shift, &c).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn vertical_disparity_point_at_infinity() {
        let h = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
        let c = set(vec![[0.0, 3.0, 1.0, 3.0]]);
        assert_eq!(vertical_disparity(&h, &Mat3::identity(), &c).unwrap_err(), Error::PointAtInfinity);
    }

    #[test]
    fn identity_is_ideal() {
        for d in [square(), hd()] {
            let g = SideGeometry::measure(&Mat3::identity(), d).unwrap();
            assert_eq!(g, SideGeometry::IDEAL);
        }
    }

    #[test]
    fn rotation_about_center() {
        let d = hd();
        let h = center_rotation(10.0, d);
        let g = SideGeometry::measure(&h, d).unwrap();
        assert_abs_diff_eq!(g.e_o, 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.e_a, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.e_ar, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.e_sk, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.e_r, 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.e_sr, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn horizontal_shear_on_square() {
        let h = Mat3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let d = square();
        let atan_half = 0.5f64.atan().to_degrees();
        assert_abs_diff_eq!(orthogonality(&h, d).unwrap(), 90.0 - atan_half, epsilon = 1e-9);
        assert_abs_diff_eq!(orthogonality(&h, d).unwrap(), 63.434948822922, epsilon = 1e-9);
        assert_abs_diff_eq!(skewness(&h, d).unwrap(), atan_half, epsilon = 1e-9);
        assert_abs_diff_eq!(skewness(&h, d).unwrap(), 26.565051177078, epsilon = 1e-9);
        // Diagonals (0.5, -1)·100 and (1.5, 1)·100.
        assert_abs_diff_eq!(aspect_ratio_legacy(&h, d).unwrap(), (1.25f64 / 3.25).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(size_ratio(&h, d).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn vertical_shear_rotation_measure() {
        let h = Mat3::new(1.0, 0.0, 0.0, 0.2, 1.0, 0.0, 0.0, 0.0, 1.0);
        for d in [square(), hd()] {
            assert_abs_diff_eq!(rotation_measure(&h, d).unwrap(), 0.2f64.atan().to_degrees(), epsilon = 1e-9);
            assert_abs_diff_eq!(rotation_measure(&h, d).unwrap(), 11.309932474020, epsilon = 1e-9);
        }
    }

    #[test]
    fn axis_scalings_keep_diagonals_equal() {
        // Axis-aligned scalings map both diagonals to the same length.
        let h = Mat3::from_diagonal(&nalgebra::Vector3::new(2.0, 1.0, 1.0));
        assert_abs_diff_eq!(aspect_ratio_legacy(&h, square()).unwrap(), 1.0, epsilon = 1e-12);
        let v = Mat3::new(1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(aspect_ratio_modified(&v, square()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn modified_aspect_ratio_detects_perspective() {
        // Keystone: top edge shrinks relative to the bottom edge.
        let h = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2e-3, 1.0);
        let d = square();
        let ar = aspect_ratio_modified(&h, d).unwrap();
        // Hand evaluation: o' = (50/1.1, 50/1.1), a' = (50, 0), c' = (50/1.2, 100/1.2),
        // b' = (100/1.1, 50/1.1), d' = (0, 50/1.1).
        let o = Point2::new(50.0 / 1.1, 50.0 / 1.1);
        let top = (Point2::new(50.0, 0.0) - o).norm();
        let bottom = (Point2::new(50.0 / 1.2, 100.0 / 1.2) - o).norm();
        let expected = 0.5 * (top / bottom + 1.0);
        assert_abs_diff_eq!(ar, expected, epsilon = 1e-12);
        assert!(ar > 1.0);
    }

    #[test]
    fn translation_preserves_modified_aspect_ratio() {
        let h = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 25.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(aspect_ratio_modified(&h, hd()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn size_ratio_of_uniform_scale() {
        for s in [0.5, 1.3, 2.0] {
            assert_abs_diff_eq!(size_ratio(&center_scale(s, hd()), hd()).unwrap(), s * s, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(size_ratio(&center_rotation(37.0, hd()), hd()).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn collapsed_quadrilateral() {
        // Projects everything onto the line y = 0.
        let h = Mat3::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(skewness(&h, square()).unwrap_err(), Error::DegenerateQuadrilateral);
        assert_eq!(size_ratio(&h, square()).unwrap_err(), Error::DegenerateQuadrilateral);
    }

    #[test]
    fn full_report_matches_components() {
        let d = hd();
        let hl = Mat3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let hr = center_rotation(5.0, d);
        let c = CorrespondenceSet::new(d, vec![[100.0, 200.0, 80.0, 205.0], [900.0, 700.0, 870.0, 690.0]]).unwrap();
        let r = full_report(&hl, &hr, &c).unwrap();
        assert_eq!(r.e_o_left, orthogonality(&hl, d).unwrap());
        assert_eq!(r.e_sk_left, skewness(&hl, d).unwrap());
        assert_eq!(r.e_r_right, rotation_measure(&hr, d).unwrap());
        assert_abs_diff_eq!(r.e_sk, 0.5 * (r.e_sk_left + r.e_sk_right), epsilon = 1e-15);
        assert_abs_diff_eq!(r.e_sr, 0.5 * (r.e_sr_left + r.e_sr_right), epsilon = 1e-15);
        assert_eq!(r.e_v, vertical_disparity(&hl, &hr, &c).unwrap());
        let f = crate::geometry::fundamental_from_homographies(&hl, &hr).unwrap();
        assert_eq!(r.e_s, sampson_error(&f, &c).unwrap());
    }

    #[test]
    fn report_json_keys_are_flat() {
        let c = CorrespondenceSet::new(hd(), vec![[1.0, 2.0, 3.0, 2.0]]).unwrap();
        let r = full_report(&Mat3::identity(), &Mat3::identity(), &c).unwrap();
        let v = serde_json::to_value(r).unwrap();
        for key in ["e_s", "e_v", "e_o", "e_a", "e_ar", "e_sk", "e_r", "e_sr", "e_sk_left", "e_sr_right"] {
            assert!(v.get(key).is_some_and(|x| x.is_number()), "missing {key}");
        }
    }
}
