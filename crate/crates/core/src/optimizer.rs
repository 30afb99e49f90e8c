//! Rectification parameter estimation.
//!
//! The inner solver is a trust-region Levenberg–Marquardt method over the nine
//! [`RectParams`] with a forward-difference Jacobian. Its residual vector holds
//! one signed Sampson residual per correspondence and, for every active
//! geometric measure, one weighted deviation per image.
//!
//! [`solve`] wraps it in the adaptive-weight outer loop. The first round fits
//! the Sampson error alone. Each following round switches on the measures the
//! previous solution left outside their bands and solves again from there. A
//! round is kept while its normalized cost keeps strictly decreasing; on the
//! first round that fails to improve, the previous parameters are returned.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{full_report, sampson_error, sampson_residuals, CorrespondenceSet, DistortionReport, SideGeometry};
use crate::model::{homography_pair, HomographyPair, RectParams, DELTA_F_LIMIT, PARAM_COUNT};

/// Value of a switched-on weight before normalization.
pub const WEIGHT_ON: f64 = 0.25;
pub const N_AR: f64 = 1.5;
pub const N_SK: f64 = 6.5;
pub const N_R: f64 = 18.5;
pub const N_SR: f64 = 2.5;

type Vec9 = SVector<f64, PARAM_COUNT>;
type Mat9 = SMatrix<f64, PARAM_COUNT, PARAM_COUNT>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Sampson error only.
    Usr,
    /// Sampson error plus adaptively weighted geometric distortion terms.
    #[default]
    UsrCgd,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Usr => "usr",
            Mode::UsrCgd => "usr-cgd",
        })
    }
}

/// Switch values of the four geometric terms, each `0` or [`WEIGHT_ON`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Weights {
    pub rho_ar: f64,
    pub rho_sk: f64,
    pub rho_r: f64,
    pub rho_sr: f64,
}

impl Weights {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn all_on() -> Self {
        Self { rho_ar: WEIGHT_ON, rho_sk: WEIGHT_ON, rho_r: WEIGHT_ON, rho_sr: WEIGHT_ON }
    }

    pub fn sum(&self) -> f64 {
        self.rho_ar + self.rho_sk + self.rho_r + self.rho_sr
    }

    pub fn is_zero(&self) -> bool {
        self.sum() == 0.0
    }

    /// Effective multipliers `ρ_X / N_X` in the order AR, Sk, R, SR.
    fn effective(&self) -> [f64; 4] {
        [self.rho_ar / N_AR, self.rho_sk / N_SK, self.rho_r / N_R, self.rho_sr / N_SR]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub ar_band: [f64; 2],
    /// Degrees.
    pub sk_max: f64,
    #[serde(alias = "sv_band")]
    pub sr_band: [f64; 2],
    /// Degrees.
    pub r_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { ar_band: [0.8, 1.2], sk_max: 5.0, sr_band: [0.8, 1.2], r_max: 30.0 }
    }
}

impl Thresholds {
    /// Whether every averaged measure of `report` lies within its band.
    pub fn satisfied_by(&self, report: &DistortionReport) -> bool {
        update_weights(report, self).is_zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub mode: Mode,
    pub max_outer_iters: usize,
    pub initial_radius: f64,
    pub max_inner_iters: usize,
    pub gradient_tol: f64,
    pub step_tol: f64,
    /// Forward-difference step relative to `max(|x|, 1)`.
    pub fd_step: f64,
    pub thresholds: Thresholds,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: Mode::UsrCgd,
            max_outer_iters: 10,
            initial_radius: 0.1,
            max_inner_iters: 200,
            gradient_tol: 1e-8,
            step_tol: 1e-10,
            fd_step: 1e-6,
            thresholds: Thresholds::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: Mode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.initial_radius, self.gradient_tol, self.step_tol, self.fd_step];
        if !positive.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput("solver tolerances must be positive".into()));
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::InvalidInput("solver iteration limits must be at least 1".into()));
        }
        let t = &self.thresholds;
        if !(t.ar_band[0] <= t.ar_band[1] && t.sr_band[0] <= t.sr_band[1] && t.sk_max >= 0.0 && t.r_max >= 0.0) {
            return Err(Error::InvalidInput("threshold bands are inverted".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }
}

/// Signed deviations from the ideal values, order AR, Sk, R, SR.
fn deviations(g: &SideGeometry) -> [f64; 4] {
    [g.e_ar - 1.0, g.e_sk, g.e_r, g.e_sr - 1.0]
}

fn side_geometries(pair: &HomographyPair, c: &CorrespondenceSet) -> Result<[SideGeometry; 2]> {
    Ok([SideGeometry::measure(&pair.left, c.dims)?, SideGeometry::measure(&pair.right, c.dims)?])
}

/// `C = E_s + Σ_X (ρ_X / N_X) · dev_X`, with each deviation averaged over both images.
pub fn cost(params: &RectParams, c: &CorrespondenceSet, w: &Weights) -> Result<f64> {
    let pair = homography_pair(params, c.dims)?;
    let e_s = sampson_error(&pair.fundamental, c)?;
    if w.is_zero() {
        return Ok(e_s);
    }
    let [left, right] = side_geometries(&pair, c)?;
    let (dl, dr) = (deviations(&left), deviations(&right));
    let penalty: f64 = w
        .effective()
        .iter()
        .enumerate()
        .map(|(i, k)| if *k == 0.0 { 0.0 } else { k * 0.5 * (dl[i].abs() + dr[i].abs()) })
        .sum();
    Ok(e_s + penalty)
}

/// Forward-difference gradient of [`cost`] with step `step · max(|x|, 1)`.
pub fn cost_gradient(params: &RectParams, c: &CorrespondenceSet, w: &Weights, step: f64) -> Result<[f64; PARAM_COUNT]> {
    let x = params.to_array();
    let base = cost(params, c, w)?;
    let mut grad = [0.0; PARAM_COUNT];
    for i in 0..PARAM_COUNT {
        let h = step * x[i].abs().max(1.0);
        let mut xp = x;
        xp[i] += h;
        grad[i] = (cost(&RectParams::from_array(xp), c, w)? - base) / h;
    }
    Ok(grad)
}

/// Divides by `1 + Σ ρ_X` using the switch values.
pub fn normalized_cost(cost: f64, w: &Weights) -> f64 {
    cost / (1.0 + w.sum())
}

/// Switches on every term whose averaged measure leaves its band.
pub fn update_weights(report: &DistortionReport, th: &Thresholds) -> Weights {
    let on = |violated: bool| if violated { WEIGHT_ON } else { 0.0 };
    let outside = |v: f64, band: [f64; 2]| !(band[0] <= v && v <= band[1]);
    Weights {
        rho_ar: on(outside(report.e_ar, th.ar_band)),
        rho_sk: on(!(report.e_sk <= th.sk_max)),
        rho_r: on(!(report.e_r.abs() <= th.r_max)),
        rho_sr: on(outside(report.e_sr, th.sr_band)),
    }
}

/// Least-squares residual vector: Sampson residuals, then `sqrt(ρ_X/N_X) · dev_X` per image for active terms.
pub fn residuals(params: &RectParams, c: &CorrespondenceSet, w: &Weights) -> Result<Vec<f64>> {
    let pair = homography_pair(params, c.dims)?;
    let mut r = sampson_residuals(&pair.fundamental, c)?;
    if !w.is_zero() {
        let geo = side_geometries(&pair, c)?;
        for (i, k) in w.effective().iter().enumerate() {
            if *k > 0.0 {
                r.extend(geo.iter().map(|g| k.sqrt() * deviations(g)[i]));
            }
        }
    }
    if r.iter().all(|v| v.is_finite()) {
        Ok(r)
    } else {
        Err(Error::NonFiniteResidual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerTermination {
    GradientTolerance,
    StepTolerance,
    MaxIterations,
    /// The trust region collapsed without finding a decrease.
    NoProgress,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    pub params: RectParams,
    /// `½‖r‖²` at the start and after every accepted step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub termination: InnerTermination,
}

impl InnerOutcome {
    pub fn objective(&self) -> f64 {
        *self.objective_history.last().expect("history starts with the initial objective")
    }
}

fn half_sq_norm(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

fn eval(x: &Vec9, c: &CorrespondenceSet, w: &Weights) -> Result<DVector<f64>> {
    let p = RectParams::from_slice(x.as_slice())?;
    Ok(DVector::from_vec(residuals(&p, c, w)?))
}

/// Box on the parameters: only the focal deviations are bounded.
fn bounds() -> (Vec9, Vec9) {
    let mut lo = Vec9::repeat(f64::NEG_INFINITY);
    let mut hi = Vec9::repeat(f64::INFINITY);
    for i in [7, 8] {
        lo[i] = -DELTA_F_LIMIT;
        hi[i] = DELTA_F_LIMIT;
    }
    (lo, hi)
}

fn jacobian(x: &Vec9, r0: &DVector<f64>, c: &CorrespondenceSet, w: &Weights, step: f64) -> Result<DMatrix<f64>> {
    let (_, hi) = bounds();
    let mut j = DMatrix::zeros(r0.len(), PARAM_COUNT);
    for i in 0..PARAM_COUNT {
        let mut h = step * x[i].abs().max(1.0);
        // Difference inward at the upper bound so the model is never clamped.
        if x[i] + h > hi[i] {
            h = -h;
        }
        let mut xp = *x;
        xp[i] += h;
        let col = match eval(&xp, c, w) {
            Ok(rp) => (rp - r0) / h,
            Err(_) => {
                let mut xm = *x;
                xm[i] -= h;
                (r0 - eval(&xm, c, w)?) / h
            }
        };
        if col.len() != r0.len() {
            return Err(Error::NonFiniteResidual);
        }
        j.set_column(i, &col);
    }
    Ok(j)
}

/// Minimizer of the scaled model `‖J p + r‖²` subject to `‖D p‖ ≤ Δ`.
///
/// Works in the eigenbasis of `D⁻¹ JᵀJ D⁻¹`, where the step length is a
/// monotone function of the damping `λ`, so `λ` is found by bisection.
fn trust_region_step(jtj: &Mat9, g: &Vec9, diag: &Vec9, radius: f64) -> Vec9 {
    let d_inv = Mat9::from_diagonal(&diag.map(|d| 1.0 / d));
    let a = d_inv * jtj * d_inv;
    let gs = d_inv * g;
    let eig = a.symmetric_eigen();
    let coeff = eig.eigenvectors.transpose() * gs;
    let lambdas = eig.eigenvalues.map(|l| l.max(0.0));
    let step_norm = |lambda: f64| -> f64 {
        coeff
            .iter()
            .zip(lambdas.iter())
            .map(|(q, l)| {
                let den = l + lambda;
                if den > 0.0 {
                    (q / den).powi(2)
                } else if *q == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .sum::<f64>()
            .sqrt()
    };
    let lambda = if step_norm(0.0) <= radius {
        0.0
    } else {
        let mut lo = 0.0;
        let mut hi = (gs.norm() / radius).max(f64::MIN_POSITIVE);
        while step_norm(hi) > radius {
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if step_norm(mid) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        hi
    };
    let scaled = Vec9::from_iterator(coeff.iter().zip(lambdas.iter()).map(|(q, l)| {
        let den = l + lambda;
        if den > 0.0 {
            -q / den
        } else {
            0.0
        }
    }));
    d_inv * (eig.eigenvectors * scaled)
}

/// Trust-region Levenberg–Marquardt minimization of `½‖r(φ)‖²` from `init`.
///
/// The focal deviations are kept inside `±DELTA_F_LIMIT` by projecting each
/// trial point onto the box.
pub fn solve_inner(c: &CorrespondenceSet, w: &Weights, init: &RectParams, cfg: &SolverConfig) -> Result<InnerOutcome> {
    cfg.validate()?;
    if c.len() < crate::matching::MIN_PAIRS {
        return Err(Error::InsufficientInliers { needed: crate::matching::MIN_PAIRS, got: c.len() });
    }
    let (lo, hi) = bounds();
    let mut x = Vec9::from_column_slice(&init.to_array()).zip_zip_map(&lo, &hi, |v, l, h| v.clamp(l, h));
    let mut r = eval(&x, c, w)?;
    let mut f = half_sq_norm(&r);
    let mut history = vec![f];
    let mut radius = cfg.initial_radius;
    let mut diag = Vec9::repeat(0.0);
    let mut termination = InnerTermination::MaxIterations;
    let mut iterations = 0;
    let mut need_jacobian = true;
    let (mut jtj, mut g) = (Mat9::zeros(), Vec9::zeros());

    while iterations < cfg.max_inner_iters {
        iterations += 1;
        if need_jacobian {
            let j = jacobian(&x, &r, c, w, cfg.fd_step)?;
            jtj = Mat9::from_iterator((j.transpose() * &j).iter().copied());
            g = Vec9::from_iterator((j.transpose() * &r).iter().copied());
            for i in 0..PARAM_COUNT {
                diag[i] = diag[i].max(j.column(i).norm()).max(1e-12);
            }
            need_jacobian = false;
        }
        // Variables sitting on a bound with descent pointing outward stay fixed.
        let fixed: Vec<bool> = (0..PARAM_COUNT).map(|i| (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)).collect();
        let mut g_free = g;
        let mut jtj_free = jtj;
        for i in (0..PARAM_COUNT).filter(|&i| fixed[i]) {
            g_free[i] = 0.0;
            jtj_free.row_mut(i).fill(0.0);
            jtj_free.column_mut(i).fill(0.0);
            jtj_free[(i, i)] = diag[i] * diag[i];
        }
        if g_free.amax() <= cfg.gradient_tol * (1.0 + f) {
            termination = InnerTermination::GradientTolerance;
            break;
        }
        let candidate = (x + trust_region_step(&jtj_free, &g_free, &diag, radius)).zip_zip_map(&lo, &hi, |v, l, h| v.clamp(l, h));
        let p = candidate - x;
        let scaled_step = diag.component_mul(&p).norm();
        if scaled_step <= cfg.step_tol * (diag.component_mul(&x).norm() + cfg.step_tol) {
            termination = InnerTermination::StepTolerance;
            break;
        }
        let predicted = -(g.dot(&p) + 0.5 * p.dot(&(jtj * p)));
        let (ratio, trial) = match eval(&candidate, c, w) {
            Ok(r_new) if r_new.len() == r.len() => {
                let f_new = half_sq_norm(&r_new);
                let ratio = if predicted > 0.0 { (f - f_new) / predicted } else { -1.0 };
                (ratio, Some((r_new, f_new)))
            }
            _ => (-1.0, None),
        };
        if ratio < 0.25 {
            radius = 0.25 * scaled_step.min(radius);
        } else if ratio > 0.75 && scaled_step >= 0.99 * radius {
            radius *= 2.0;
        }
        match trial {
            Some((r_new, f_new)) if ratio > 1e-4 && f_new <= f => {
                x = candidate;
                r = r_new;
                f = f_new;
                history.push(f);
                need_jacobian = true;
            }
            _ => {}
        }
        if radius < 1e-14 {
            termination = InnerTermination::NoProgress;
            break;
        }
    }
    if termination == InnerTermination::MaxIterations {
        log::warn!("trust-region solver stopped after {iterations} iterations");
    }
    Ok(InnerOutcome { params: RectParams::from_slice(x.as_slice())?, objective_history: history, iterations, termination })
}

/// One outer round of [`solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub params: RectParams,
    /// Weights active in this round's inner solve.
    pub weights: Weights,
    /// Weights derived from this round's own report, used to score it.
    pub cost_weights: Weights,
    pub cost: f64,
    pub normalized_cost: f64,
    pub e_v: f64,
    pub report: DistortionReport,
    pub inner_iterations: usize,
    pub inner_termination: InnerTermination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Sampson-only mode: a single round.
    UsrSingleRound,
    /// Every measure was already within its band.
    ConstraintsSatisfied,
    /// A round failed to lower the normalized cost; the previous round was returned.
    CostNotDecreasing,
    MaxOuterIterations,
    /// A later round failed numerically; the previous round was returned.
    RoundFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub mode: Mode,
    /// Accepted rounds; the last one is the returned solution.
    pub rounds: Vec<RoundRecord>,
    /// The round that ended the loop without being accepted, if any.
    pub rejected: Option<RoundRecord>,
    pub termination: Termination,
}

impl SolveTrace {
    pub fn final_round(&self) -> &RoundRecord {
        self.rounds.last().expect("a trace holds at least one round")
    }

    /// One JSON document per line: accepted rounds, then the rejected one.
    pub fn to_json_lines(&self) -> String {
        self.rounds
            .iter()
            .map(|r| (r, true))
            .chain(self.rejected.iter().map(|r| (r, false)))
            .map(|(r, accepted)| {
                let mut v = serde_json::to_value(r).expect("round records serialize");
                v["accepted"] = accepted.into();
                v["mode"] = serde_json::to_value(self.mode).expect("mode serializes");
                v.to_string() + "\n"
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub params: RectParams,
    pub homographies: HomographyPair,
    pub report: DistortionReport,
    pub trace: SolveTrace,
}

fn score_round(
    round: usize,
    outcome: &InnerOutcome,
    weights: Weights,
    c: &CorrespondenceSet,
    cfg: &SolverConfig,
) -> Result<RoundRecord> {
    let pair = homography_pair(&outcome.params, c.dims)?;
    let report = full_report(&pair.left, &pair.right, c)?;
    let cost_weights = match cfg.mode {
        Mode::Usr => Weights::zero(),
        Mode::UsrCgd => update_weights(&report, &cfg.thresholds),
    };
    let cost = cost(&outcome.params, c, &cost_weights)?;
    Ok(RoundRecord {
        round,
        params: outcome.params,
        weights,
        cost_weights,
        cost,
        normalized_cost: normalized_cost(cost, &cost_weights),
        e_v: report.e_v,
        report,
        inner_iterations: outcome.iterations,
        inner_termination: outcome.termination,
    })
}

/// Adaptive-weight rectification from zero-initialized parameters.
pub fn solve(c: &CorrespondenceSet, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let first = solve_inner(c, &Weights::zero(), &RectParams::zero(), cfg)?;
    let mut rounds = vec![score_round(1, &first, Weights::zero(), c, cfg)?];
    let mut rejected = None;

    let termination = if cfg.mode == Mode::Usr {
        Termination::UsrSingleRound
    } else if rounds[0].cost_weights.is_zero() {
        Termination::ConstraintsSatisfied
    } else {
        let mut termination = Termination::MaxOuterIterations;
        while rounds.len() < cfg.max_outer_iters {
            let prev = rounds.last().expect("non-empty");
            let weights = prev.cost_weights;
            let round = solve_inner(c, &weights, &prev.params, cfg)
                .and_then(|o| score_round(prev.round + 1, &o, weights, c, cfg));
            match round {
                Ok(record) if record.normalized_cost < prev.normalized_cost => rounds.push(record),
                Ok(record) => {
                    rejected = Some(record);
                    termination = Termination::CostNotDecreasing;
                    break;
                }
                Err(e) => {
                    log::warn!("outer round {} failed: {e}", prev.round + 1);
                    termination = Termination::RoundFailed;
                    break;
                }
            }
        }
        termination
    };

    let last = rounds.last().expect("non-empty");
    let homographies = homography_pair(&last.params, c.dims)?;
    let (params, report) = (last.params, last.report);
    Ok(Solution { params, homographies, report, trace: SolveTrace { mode: cfg.mode, rounds, rejected, termination } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RigDims;
    use crate::synth::{generate, Distortion, RigConfig};

    fn dims() -> RigDims {
        RigDims::new(1920.0, 1080.0).unwrap()
    }

    fn rig(d: Distortion, m: f64) -> CorrespondenceSet {
        generate(&RigConfig::new(dims()).with_distortion(d, m)).unwrap().0
    }

    fn report_with(e_ar: f64, e_sk: f64, e_r: f64, e_sr: f64) -> DistortionReport {
        let g = SideGeometry { e_ar, e_sk, e_r, e_sr, ..SideGeometry::IDEAL };
        DistortionReport::from_parts(0.0, 0.0, g, g)
    }

    #[test]
    fn zero_weights_cost_is_sampson_error() {
        let c = rig(Distortion::YRot, 10.0);
        let p = RectParams { theta_yr: 0.05, t_yl: 0.01, ..RectParams::zero() };
        let f = homography_pair(&p, c.dims).unwrap().fundamental;
        assert_eq!(cost(&p, &c, &Weights::zero()).unwrap(), sampson_error(&f, &c).unwrap());
    }

    #[test]
    fn rectified_data_costs_nothing() {
        let c = rig(Distortion::XTrans, 0.6);
        for w in [Weights::zero(), Weights::all_on()] {
            assert!(cost(&RectParams::zero(), &c, &w).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalized_cost(1.0, &Weights::all_on()), 0.5);
        assert_eq!(normalized_cost(0.8, &Weights::zero()), 0.8);
        let two = Weights { rho_ar: WEIGHT_ON, rho_r: WEIGHT_ON, ..Weights::zero() };
        assert_eq!(normalized_cost(0.75, &two), 0.5);
    }

    #[test]
    fn weight_switching() {
        let th = Thresholds::default();
        assert_eq!(update_weights(&report_with(1.0, 0.0, 0.0, 1.0), &th), Weights::zero());
        assert_eq!(
            update_weights(&report_with(1.0, 6.0, 0.0, 1.0), &th),
            Weights { rho_sk: WEIGHT_ON, ..Weights::zero() }
        );
        assert_eq!(
            update_weights(&report_with(0.7, 0.0, 0.0, 1.0), &th),
            Weights { rho_ar: WEIGHT_ON, ..Weights::zero() }
        );
        assert_eq!(
            update_weights(&report_with(1.0, 5.0, 31.0, 1.25), &th),
            Weights { rho_r: WEIGHT_ON, rho_sr: WEIGHT_ON, ..Weights::zero() }
        );
    }

    #[test]
    fn config_round_trips_through_toml_and_json() {
        let cfg = SolverConfig { mode: Mode::Usr, max_outer_iters: 4, ..Default::default() };
        let toml_text = toml::to_string(&cfg).unwrap();
        assert_eq!(SolverConfig::from_toml_str(&toml_text).unwrap(), cfg);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SolverConfig::from_json_str(&json).unwrap(), cfg);
        let partial = SolverConfig::from_toml_str("mode = \"usr\"\n[thresholds]\nsk_max = 4.0\n").unwrap();
        assert_eq!(partial.mode, Mode::Usr);
        assert_eq!(partial.thresholds.sk_max, 4.0);
        assert_eq!(partial.thresholds.r_max, 30.0);
        assert!(SolverConfig::from_toml_str("fd_step = -1.0").is_err());
    }

    #[test]
    fn already_rectified_stays_at_zero() {
        let c = rig(Distortion::XTrans, 0.6);
        let out = solve_inner(&c, &Weights::zero(), &RectParams::zero(), &SolverConfig::default()).unwrap();
        assert!(out.objective() < 1e-12);
        assert!(out.params.to_array().iter().all(|v| v.abs() < 1e-9), "{:?}", out.params);
    }

    #[test]
    fn y_offset_absorbed_by_translation() {
        let c = rig(Distortion::YTrans, 0.1);
        let out = solve_inner(&c, &Weights::zero(), &RectParams::zero(), &SolverConfig::default()).unwrap();
        let pair = homography_pair(&out.params, c.dims).unwrap();
        let ev = crate::metrics::vertical_disparity(&pair.left, &pair.right, &c).unwrap();
        assert!(ev < 1e-6, "E_v {ev}, {:?}", out.params);
        assert!(out.objective_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn usr_mode_is_a_single_unweighted_round() {
        let c = rig(Distortion::ZRot, 10.0);
        let sol = solve(&c, &SolverConfig::with_mode(Mode::Usr)).unwrap();
        assert_eq!(sol.trace.rounds.len(), 1);
        assert_eq!(sol.trace.termination, Termination::UsrSingleRound);
        assert!(sol.trace.rounds[0].weights.is_zero() && sol.trace.rounds[0].cost_weights.is_zero());
        let step1 = solve_inner(&c, &Weights::zero(), &RectParams::zero(), &SolverConfig::default()).unwrap();
        assert_eq!(sol.params, step1.params);
    }

    #[test]
    fn trace_lines_parse() {
        let c = rig(Distortion::ZRot, 10.0);
        let sol = solve(&c, &SolverConfig::default()).unwrap();
        let text = sol.trace.to_json_lines();
        let n = sol.trace.rounds.len() + usize::from(sol.trace.rejected.is_some());
        assert_eq!(text.lines().count(), n);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["normalized_cost"].is_number());
            assert_eq!(v["mode"], "usr-cgd");
        }
    }
}
