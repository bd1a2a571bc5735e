//! Single-model extraction: parse → build → partition → tessellate →
//! project → stabilize.

use alloc::format;
use alloc::string::{String, ToString};

use crate::brep::{build_brep, BRepSolid};
use crate::carrier::{project_labels, stabilize, Carrier, SkippedFace, DEFAULT_TAU_MIN};
use crate::eval::{TransferMode, DEFAULT_BAND, DEFAULT_SAMPLES};
use crate::partition::{build_adjacency, extract_parts, AdjacencyGraph, Partition, DEFAULT_THETA};
use crate::step::{parse_step, StepEntityGraph};
use crate::tessellate::{tessellate_solid, Tessellation, TessellationSpec};

/// Parameters that determine every output byte. Worker count and paths are
/// deliberately absent: they never change results.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunConfig {
    pub theta_deg: f64,
    pub tau_min: u32,
    pub tess: TessellationSpec,
    pub samples: usize,
    pub seed: u64,
    /// Boundary band as a fraction of the bounding box diagonal.
    pub band: f64,
    pub transfer: String,
    pub fail_fast: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            theta_deg: DEFAULT_THETA,
            tau_min: DEFAULT_TAU_MIN,
            tess: TessellationSpec::t0(),
            samples: DEFAULT_SAMPLES,
            seed: 0,
            band: DEFAULT_BAND,
            transfer: TransferMode::default().as_str().into(),
            fail_fast: false,
        }
    }
}

impl RunConfig {
    pub fn transfer_mode(&self) -> TransferMode {
        TransferMode::from_name(&self.transfer).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.theta_deg >= 0.0 && self.theta_deg <= 180.0) {
            return Err(format!("theta must be within [0, 180], got {}", self.theta_deg));
        }
        if !self.tess.is_valid() {
            return Err(format!("invalid tessellation spec {:?}", self.tess));
        }
        if self.samples == 0 {
            return Err("sample count must be positive".into());
        }
        if !(self.band >= 0.0 && self.band.is_finite()) {
            return Err(format!("band must be a non-negative fraction, got {}", self.band));
        }
        if TransferMode::from_name(&self.transfer).is_none() {
            return Err(format!("unknown transfer mode {:?}", self.transfer));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Stage {
    Parse,
    Build,
    Partition,
    Tessellate,
    Stabilize,
    Serialize,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Parse, Stage::Build, Stage::Partition, Stage::Tessellate, Stage::Stabilize, Stage::Serialize];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Build => "build",
            Stage::Partition => "partition",
            Stage::Tessellate => "tessellate",
            Stage::Stabilize => "stabilize",
            Stage::Serialize => "serialize",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{stage:?}: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, message: impl ToString) -> Self {
        PipelineError { stage, message: message.to_string() }
    }
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub solid: BRepSolid,
    pub graph: AdjacencyGraph,
    pub partition: Partition,
    pub tessellation: Tessellation,
    pub carrier: Carrier,
}

/// Full pipeline from Part 21 bytes. `on_stage` is called as each stage
/// finishes, which lets callers with a clock time them.
pub fn extract(bytes: &[u8], cfg: &RunConfig, on_stage: &mut dyn FnMut(Stage)) -> Result<Extraction, PipelineError> {
    let g = parse_step(bytes).map_err(|e| PipelineError::new(Stage::Parse, e))?;
    on_stage(Stage::Parse);
    extract_graph(&g, cfg, on_stage)
}

pub fn extract_graph(g: &StepEntityGraph, cfg: &RunConfig, on_stage: &mut dyn FnMut(Stage)) -> Result<Extraction, PipelineError> {
    let solid = build_brep(g).map_err(|e| PipelineError::new(Stage::Build, e))?;
    on_stage(Stage::Build);
    let graph = build_adjacency(&solid);
    let partition = extract_parts(&graph, cfg.theta_deg);
    on_stage(Stage::Partition);
    let tessellation = tessellate_solid(&solid, &cfg.tess);
    on_stage(Stage::Tessellate);
    let raw = project_labels(&tessellation.meshes, &partition).map_err(|e| PipelineError::new(Stage::Stabilize, e))?;
    let mut carrier = stabilize(&raw, cfg.tau_min);
    carrier.meta.theta_deg = cfg.theta_deg;
    carrier.meta.tau_min = cfg.tau_min;
    carrier.meta.tess = cfg.tess.clone();
    carrier.meta.skipped_faces = tessellation
        .skipped
        .iter()
        .map(|s| SkippedFace { face: s.face, step_id: s.step_id, reason: s.reason.as_str().into() })
        .collect();
    on_stage(Stage::Stabilize);
    Ok(Extraction { solid, graph, partition, tessellation, carrier })
}

/// Convenience wrapper without stage callbacks.
pub fn extract_carrier(bytes: &[u8], cfg: &RunConfig) -> Result<Carrier, PipelineError> {
    extract(bytes, cfg, &mut |_| {}).map(|e| e.carrier)
}
