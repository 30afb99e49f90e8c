//! End-to-end runs: outlier rejection, solving and evaluation over RANSAC seeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{ransac_filter_indexed, RansacConfig};
use crate::metrics::{CorrespondenceSet, DistortionReport};
use crate::optimizer::{solve, Solution, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Rectification {
    /// Indices of the RANSAC inliers into the input set.
    pub inliers: Vec<usize>,
    pub inlier_set: CorrespondenceSet,
    pub solution: Solution,
}

/// RANSAC filtering followed by the solver on the inliers.
pub fn rectify(c: &CorrespondenceSet, ransac: &RansacConfig, solver: &SolverConfig) -> Result<Rectification> {
    let outcome = ransac_filter_indexed(c, ransac)?;
    let inlier_set = c.select(&outcome.inliers);
    let solution = solve(&inlier_set, solver)?;
    Ok(Rectification { inliers: outcome.inliers, inlier_set, solution })
}

/// Measures averaged over several RANSAC seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub e_v: f64,
    pub e_o: f64,
    pub e_sk: f64,
    pub e_ar: f64,
    pub e_r: f64,
    pub e_sr: f64,
}

impl EvalSummary {
    pub fn from_report(r: &DistortionReport) -> Self {
        Self { e_v: r.e_v, e_o: r.e_o, e_sk: r.e_sk, e_ar: r.e_ar, e_r: r.e_r, e_sr: r.e_sr }
    }

    pub fn mean(items: &[EvalSummary]) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidInput("nothing to average".into()));
        }
        let n = items.len() as f64;
        let avg = |f: fn(&EvalSummary) -> f64| items.iter().map(f).sum::<f64>() / n;
        Ok(Self {
            e_v: avg(|s| s.e_v),
            e_o: avg(|s| s.e_o),
            e_sk: avg(|s| s.e_sk),
            e_ar: avg(|s| s.e_ar),
            e_r: avg(|s| s.e_r),
            e_sr: avg(|s| s.e_sr),
        })
    }
}

/// Runs [`rectify`] with RANSAC seeds `base_seed, base_seed + 1, ...` and averages the reports.
pub fn evaluate(
    c: &CorrespondenceSet,
    ransac: &RansacConfig,
    solver: &SolverConfig,
    base_seed: u64,
    seeds: usize,
) -> Result<(EvalSummary, Vec<DistortionReport>)> {
    let reports = (0..seeds as u64)
        .map(|k| {
            let cfg = RansacConfig { seed: base_seed.wrapping_add(k), ..*ransac };
            Ok(rectify(c, &cfg, solver)?.solution.report)
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries: Vec<_> = reports.iter().map(EvalSummary::from_report).collect();
    Ok((EvalSummary::mean(&summaries)?, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RigDims;
    use crate::optimizer::Mode;
    use crate::synth::{make_suite_with, SuiteOptions};

    #[test]
    fn evaluation_is_deterministic() {
        let dims = RigDims::new(1280.0, 720.0).unwrap();
        let opts = SuiteOptions { n_points: 120, ..Default::default() };
        let case = &make_suite_with(dims, 2, &opts).unwrap()[4];
        let solver = SolverConfig::with_mode(Mode::UsrCgd);
        let a = evaluate(&case.correspondences, &RansacConfig::default(), &solver, 0, 2).unwrap();
        let b = evaluate(&case.correspondences, &RansacConfig::default(), &solver, 0, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.len(), 2);
        assert!(a.0.e_v < 1.0);
    }

    #[test]
    fn mean_of_nothing_fails() {
        assert!(EvalSummary::mean(&[]).is_err());
    }
}
