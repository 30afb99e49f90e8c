//! Uncalibrated stereo rectification with constrained geometric distortion.
//!
//! The crate estimates a pair of rectifying homographies from point matches by
//! optimizing a nine-parameter model (rotations, vertical shifts and focal
//! deviations). The plain variant minimizes the Sampson error alone; the
//! constrained variant adds distortion penalties that switch on whenever a
//! geometric measure leaves its acceptable band.
//!
//! Modules, bottom-up:
//! - [`geometry`]: pinhole projection and epipolar primitives
//! - [`model`]: the parameter vector and the homographies it induces
//! - [`metrics`]: Sampson error, vertical disparity and distortion measures
//! - [`matching`]: normalized eight-point estimation and RANSAC filtering
//! - [`optimizer`]: trust-region solver and the adaptive-weight outer loop
//! - [`synth`]: synthetic stereo rigs with exact ground truth
//! - [`imaging`]: warping and scanline overlays
//! - [`io`]: JSON file formats read and written by the CLI
//! - [`pipeline`]: RANSAC, solving and multi-seed evaluation chained together

// Negated float comparisons are used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod imaging;
pub mod io;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod optimizer;
pub mod pipeline;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, CameraPose, Mat3, Point2, Side, Vec3H};
pub use matching::RansacConfig;
pub use metrics::{CorrespondenceSet, DistortionReport};
pub use model::{HomographyPair, RectParams, RigDims};
pub use optimizer::{solve, Mode, Solution, SolveTrace, SolverConfig, Thresholds, Weights};

