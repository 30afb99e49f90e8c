//! File formats.
//!
//! Correspondences travel as `{"width", "height", "pairs": [[ul, vl, ur, vr], ...]}`.
//! Matrices in every document are written row-major as nested arrays. Each
//! document the CLI produces embeds a [`RunManifest`] and contains no clock
//! readings, so identical runs give identical bytes.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Mat3;
use crate::matching::RansacConfig;
use crate::metrics::{CorrespondenceSet, DistortionReport};
use crate::model::{RectParams, RigDims};
use crate::optimizer::{Mode, SolveTrace, SolverConfig};
use crate::synth::{Distortion, GroundTruth, RigConfig};

pub type MatRows = [[f64; 3]; 3];

pub fn mat_to_rows(m: &Mat3) -> MatRows {
    [0, 1, 2].map(|r| [m[(r, 0)], m[(r, 1)], m[(r, 2)]])
}

pub fn rows_to_mat(rows: &MatRows) -> Mat3 {
    Mat3::from_fn(|r, c| rows[r][c])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceFile {
    pub width: u32,
    pub height: u32,
    pub pairs: Vec<[f64; 4]>,
}

impl CorrespondenceFile {
    pub fn from_set(c: &CorrespondenceSet) -> Self {
        Self { width: c.dims.w as u32, height: c.dims.h as u32, pairs: c.pairs.clone() }
    }

    pub fn into_set(self) -> Result<CorrespondenceSet> {
        CorrespondenceSet::new(RigDims::new(self.width as f64, self.height as f64)?, self.pairs)
    }
}

pub fn parse_correspondences(text: &str) -> Result<CorrespondenceSet> {
    from_json_str::<CorrespondenceFile>(text)?.into_set()
}

pub fn read_correspondences(path: &Path) -> Result<CorrespondenceSet> {
    parse_correspondences(&fs::read_to_string(path)?)
}

pub fn write_correspondences(path: &Path, c: &CorrespondenceSet) -> Result<()> {
    write_json(path, &CorrespondenceFile::from_set(c))
}

/// Provenance of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<String>,
    pub config: Option<String>,
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub output_dir: String,
}

impl RunManifest {
    pub fn new(command: &str, output_dir: &Path) -> Self {
        Self {
            tool: "stereorect".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs: Vec::new(),
            config: None,
            mode: None,
            seed: None,
            output_dir: output_dir.display().to_string(),
        }
    }
}

/// Ground-truth sidecar written next to each synthetic correspondence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDocument {
    pub name: String,
    pub manifest: RunManifest,
    pub distortion: Distortion,
    pub rig: RigConfig,
    pub fundamental: MatRows,
    #[serde(rename = "H_l")]
    pub h_l: MatRows,
    #[serde(rename = "H_r")]
    pub h_r: MatRows,
    pub inlier_mask: Vec<bool>,
}

impl TruthDocument {
    pub fn new(name: &str, manifest: RunManifest, rig: RigConfig, truth: &GroundTruth) -> Self {
        Self {
            name: name.into(),
            manifest,
            distortion: rig.distortion,
            rig,
            fundamental: mat_to_rows(&truth.fundamental),
            h_l: mat_to_rows(&truth.homographies.left),
            h_r: mat_to_rows(&truth.homographies.right),
            inlier_mask: truth.inlier_mask.clone(),
        }
    }
}

/// Output of a rectification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub manifest: RunManifest,
    #[serde(rename = "H_l")]
    pub h_l: MatRows,
    #[serde(rename = "H_r")]
    pub h_r: MatRows,
    pub fundamental: MatRows,
    pub params: RectParams,
    pub report: DistortionReport,
    pub input_pairs: usize,
    pub inlier_pairs: usize,
    pub trace: SolveTrace,
}

/// Contents of a `--config` file: solver and RANSAC sections, both optional.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub solver: SolverConfig,
    pub ransac: RansacConfig,
}

impl PipelineConfig {
    /// Loads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => from_json_str(&text)?,
            _ => toml::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?,
        };
        cfg.solver.validate()?;
        cfg.ransac.validate()?;
        Ok(cfg)
    }
}

pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("invalid JSON: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_str(&fs::read_to_string(path)?).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
