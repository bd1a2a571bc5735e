//! Corpus processing over a bounded worker pool.
//!
//! Everything written to `summary.json` and the per-model files depends only
//! on the inputs and the [`RunConfig`]; wall-clock data goes to
//! `timing.json`.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use step_parts_core::pipeline::{extract, PipelineError, RunConfig, Stage};

use crate::io::{labels_string, obj_string, IoError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub model: String,
    pub file: String,
    pub stage: String,
    pub error: String,
}

impl ErrorReport {
    pub fn new(model: &str, file: &str, e: &PipelineError) -> Self {
        ErrorReport { model: model.into(), file: file.into(), stage: e.stage.as_str().into(), error: e.message.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("error serialize") + "\n"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
    /// Not attempted because an earlier model failed under fail-fast.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelOutcome {
    pub model: String,
    pub file: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub num_faces: usize,
    pub num_parts: usize,
    pub num_triangles: usize,
    pub skipped_faces: usize,
    pub isolates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelTiming {
    pub model: String,
    /// Seconds per completed stage.
    pub stages: BTreeMap<&'static str, f64>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub config: RunConfig,
    pub models: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub skipped: usize,
    pub results: Vec<ModelOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Percentiles {
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

impl Percentiles {
    /// Nearest-rank percentiles; all zero for an empty slice.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Percentiles { mean: 0.0, p50: 0.0, p90: 0.0, p99: 0.0, max: 0.0 };
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let rank = |p: f64| v[((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Percentiles { mean: v.iter().sum::<f64>() / v.len() as f64, p50: rank(0.5), p90: rank(0.9), p99: rank(0.99), max: v[v.len() - 1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchTiming {
    pub workers: usize,
    pub wall_seconds: f64,
    pub per_model: Percentiles,
    pub per_stage_mean: BTreeMap<&'static str, f64>,
    pub models: Vec<ModelTiming>,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub summary: BatchSummary,
    pub timing: BatchTiming,
}

impl BatchResult {
    /// 0 when every model succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.failed + self.summary.skipped == 0 {
            0
        } else {
            1
        }
    }
}

pub fn is_step_file(p: &Path) -> bool {
    p.is_file() && p.extension().and_then(|e| e.to_str()).is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "step" | "stp" | "p21"))
}

/// STEP files directly inside `dir`, sorted by file name.
pub fn list_step_files(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| IoError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_step_file(p))
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Expands directories to their STEP files; explicit files are kept as is.
/// Result is sorted by model id and deduplicated.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, IoError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            out.extend(list_step_files(p)?);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(IoError::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory")));
        }
    }
    out.sort_by(|a, b| (model_id(a), a).cmp(&(model_id(b), b)));
    out.dedup();
    Ok(out)
}

pub fn model_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Runs the pipeline on one file and writes its outputs into `out_dir`.
/// Panics inside the pipeline are reported as failures of the stage that
/// was running.
pub fn process_model(path: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<(ModelOutcome, ModelTiming), IoError> {
    let model = model_id(path);
    let file = file_name(path);
    let start = Instant::now();
    let mut stages = BTreeMap::new();
    let mut last = start;
    let mut mark = |s: Stage, stages: &mut BTreeMap<&'static str, f64>| {
        let now = Instant::now();
        stages.insert(s.as_str(), (now - last).as_secs_f64());
        last = now;
    };
    let mut outcome = ModelOutcome {
        model: model.clone(),
        file: file.clone(),
        status: Status::Ok,
        stage: None,
        error: None,
        num_faces: 0,
        num_parts: 0,
        num_triangles: 0,
        skipped_faces: 0,
        isolates: 0,
    };
    let result = match fs::read(path) {
        Ok(bytes) => {
            let mut done = Vec::new();
            let r = catch_unwind(AssertUnwindSafe(|| {
                extract(&bytes, cfg, &mut |s| {
                    done.push(s);
                    mark(s, &mut stages)
                })
            }));
            r.unwrap_or_else(|p| {
                let running = Stage::ALL.iter().copied().find(|s| !done.contains(s)).unwrap_or(Stage::Serialize);
                let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_default();
                Err(PipelineError::new(running, format!("internal error: {msg}")))
            })
        }
        Err(e) => Err(PipelineError::new(Stage::Parse, format!("cannot read file: {e}"))),
    };
    let error_path = out_dir.join(format!("{model}.error.json"));
    match result {
        Ok(ex) => {
            let c = &ex.carrier;
            outcome.num_faces = ex.solid.faces.len();
            outcome.num_parts = c.meta.num_parts;
            outcome.num_triangles = c.num_triangles();
            outcome.skipped_faces = c.meta.skipped_faces.len();
            outcome.isolates = c.meta.isolates.len();
            let (obj, labels) = crate::io::carrier_paths(out_dir, &model);
            fs::write(&obj, obj_string(c)).map_err(|e| IoError::io(&obj, e))?;
            fs::write(&labels, labels_string(c, Some(cfg))).map_err(|e| IoError::io(&labels, e))?;
            if error_path.exists() {
                fs::remove_file(&error_path).map_err(|e| IoError::io(&error_path, e))?;
            }
            let now = Instant::now();
            stages.insert(Stage::Serialize.as_str(), (now - last).as_secs_f64());
        }
        Err(e) => {
            outcome.status = Status::Failed;
            outcome.stage = Some(e.stage.as_str().into());
            outcome.error = Some(e.message.clone());
            fs::write(&error_path, ErrorReport::new(&model, &file, &e).to_json()).map_err(|e| IoError::io(&error_path, e))?;
        }
    }
    let total = start.elapsed().as_secs_f64();
    Ok((outcome, ModelTiming { model, stages, total }))
}

/// Processes every STEP file in `dir`. Only I/O failures on the output side
/// abort the run.
pub fn run_batch(dir: &Path, out_dir: &Path, cfg: &RunConfig, workers: usize) -> Result<BatchResult, IoError> {
    let files = list_step_files(dir)?;
    run_files(&files, out_dir, cfg, workers)
}

pub fn run_files(files: &[PathBuf], out_dir: &Path, cfg: &RunConfig, workers: usize) -> Result<BatchResult, IoError> {
    let workers = workers.max(1);
    fs::create_dir_all(out_dir).map_err(|e| IoError::io(out_dir, e))?;
    let start = Instant::now();
    let abort = AtomicBool::new(false);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    let results: Vec<Result<(ModelOutcome, ModelTiming), IoError>> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                if abort.load(Ordering::SeqCst) {
                    let m = model_id(f);
                    let skipped = ModelOutcome {
                        model: m.clone(),
                        file: file_name(f),
                        status: Status::Skipped,
                        stage: None,
                        error: None,
                        num_faces: 0,
                        num_parts: 0,
                        num_triangles: 0,
                        skipped_faces: 0,
                        isolates: 0,
                    };
                    return Ok((skipped, ModelTiming { model: m, stages: BTreeMap::new(), total: 0.0 }));
                }
                let r = process_model(f, out_dir, cfg);
                if cfg.fail_fast && !matches!(&r, Ok((o, _)) if o.status == Status::Ok) {
                    abort.store(true, Ordering::SeqCst);
                }
                r
            })
            .collect()
    });
    let mut pairs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    pairs.sort_by(|a, b| a.0.model.cmp(&b.0.model).then_with(|| a.0.file.cmp(&b.0.file)));
    let wall_seconds = start.elapsed().as_secs_f64();
    let (results, timings): (Vec<ModelOutcome>, Vec<ModelTiming>) = pairs.into_iter().unzip();
    let count = |s: Status| results.iter().filter(|r| r.status == s).count();
    let summary = BatchSummary {
        config: cfg.clone(),
        models: results.len(),
        succeeded: count(Status::Ok),
        failed: count(Status::Failed),
        skipped: count(Status::Skipped),
        results,
    };
    let attempted: Vec<&ModelTiming> = timings.iter().filter(|t| !t.stages.is_empty()).collect();
    let mut per_stage_mean = BTreeMap::new();
    for s in Stage::ALL {
        let v: Vec<f64> = attempted.iter().filter_map(|t| t.stages.get(s.as_str()).copied()).collect();
        if !v.is_empty() {
            per_stage_mean.insert(s.as_str(), v.iter().sum::<f64>() / v.len() as f64);
        }
    }
    let totals: Vec<f64> = attempted.iter().map(|t| t.total).collect();
    let timing = BatchTiming { workers, wall_seconds, per_model: Percentiles::of(&totals), per_stage_mean, models: timings };
    write_json(&out_dir.join("summary.json"), &summary)?;
    write_json(&out_dir.join("timing.json"), &timing)?;
    Ok(BatchResult { summary, timing })
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), IoError> {
    let s = serde_json::to_string_pretty(v).expect("json serialize") + "\n";
    fs::write(path, s).map_err(|e| IoError::io(path, e))
}
