//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use step_parts_core::analysis::{dihedral_histogram, threshold_sweep, SweepRecord, DEFAULT_BINS, DEFAULT_SWEEP};
use step_parts_core::brep::build_brep;
use step_parts_core::carrier::Carrier;
use step_parts_core::eval::{agreement, sample_points, self_consistency, transfer_labels, SampledLabels};
use step_parts_core::geom::Aabb;
use step_parts_core::partition::{build_adjacency, extract_parts, AdjacencyGraph};
use step_parts_core::pipeline::{extract, PipelineError, RunConfig, Stage};
use step_parts_core::step::{entity_stats, parse_step, write_step};
use step_parts_core::synth;
use step_parts_core::tessellate::TessellationSpec;

use crate::batch::{expand_inputs, file_name, model_id, run_batch, write_json, ErrorReport};
use crate::io::{read_carrier, read_labels, resolve_pair, write_carrier};
use crate::report::{report_json, write_hist_csv, write_sweep_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_FATAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "step-parts", version, about = "Geometric part extraction from STEP B-Rep models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TessName {
    T0,
    T1,
    T2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransferArg {
    Triangle,
    Vertex,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Merge threshold in degrees.
    #[arg(long, default_value_t = 8.0)]
    pub theta: f64,
    /// Minimum triangle count of a carrier component.
    #[arg(long, default_value_t = 20)]
    pub tau_min: u32,
    #[arg(long, value_enum, default_value = "t0")]
    pub tess: TessName,
    /// Overrides the chordal tolerance (fraction of the bbox diagonal).
    #[arg(long)]
    pub chord_tol: Option<f64>,
    /// Overrides the angular tolerance in degrees.
    #[arg(long)]
    pub angle_tol: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Boundary band as a fraction of the bbox diagonal.
    #[arg(long, default_value_t = 0.01)]
    pub band: f64,
    /// How candidate labels reach the sample points.
    #[arg(long, value_enum, default_value = "triangle")]
    pub transfer: TransferArg,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "STEP_PARTS_WORKERS")]
    pub workers: Option<usize>,
    /// Stop at the first failing model.
    #[arg(long)]
    pub fail_fast: bool,
}

impl Common {
    pub fn spec(&self) -> TessellationSpec {
        let base = match self.tess {
            TessName::T0 => TessellationSpec::t0(),
            TessName::T1 => TessellationSpec::t1(),
            TessName::T2 => TessellationSpec::t2(),
        };
        if self.chord_tol.is_none() && self.angle_tol.is_none() {
            return base;
        }
        TessellationSpec {
            name: format!("{}-custom", base.name),
            chord_tol: self.chord_tol.unwrap_or(base.chord_tol),
            angle_tol_deg: self.angle_tol.unwrap_or(base.angle_tol_deg),
            max_edge: base.max_edge,
        }
    }

    pub fn config(&self) -> RunConfig {
        RunConfig {
            theta_deg: self.theta,
            tau_min: self.tau_min,
            tess: self.spec(),
            samples: self.samples,
            seed: self.seed,
            band: self.band,
            transfer: match self.transfer {
                TransferArg::Triangle => "triangle",
                TransferArg::Vertex => "vertex",
            }
            .into(),
            fail_fast: self.fail_fast,
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.filter(|&w| w > 0).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition one STEP file and write `<stem>.obj` and `<stem>.labels.json`.
    Extract {
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare two carriers (`.labels.json`, `.obj` or stem). Points are
    /// sampled on the reference and candidate labels transferred to them.
    Eval {
        reference: PathBuf,
        candidate: PathBuf,
        /// Compare per-triangle labels directly instead of sampling.
        #[arg(long)]
        per_triangle: bool,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Self-consistency of one model between the `--tess` spec and `--alt`.
    Consistency {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "t2")]
        alt: TessName,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Same-primitive dihedral histogram over STEP files or directories.
    Hist {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        /// Threshold for the reported low-angle fraction, degrees.
        #[arg(long, default_value_t = 8.0)]
        low: f64,
        #[arg(long, default_value = "hist.csv")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Partition statistics per model over a list of thresholds.
    Sweep {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Comma-separated ascending thresholds in degrees.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP)]
        thetas: Vec<f64>,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Extract every STEP file of a directory.
    Batch {
        dir: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Entity, topology and partition summary of one STEP file.
    Stats {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write the synthetic fixtures, or a random corpus, as STEP files.
    Synth {
        out_dir: PathBuf,
        /// Generate this many random models instead of the fixtures.
        #[arg(long)]
        corpus: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn fatal(msg: impl std::fmt::Display) -> i32 {
    eprintln!("step-parts: {msg}");
    EXIT_FATAL
}

fn emit(out: Option<&Path>, text: &str) -> i32 {
    match out {
        Some(p) => match fs::write(p, text) {
            Ok(()) => EXIT_OK,
            Err(e) => fatal(format!("{}: {e}", p.display())),
        },
        None => {
            print!("{text}");
            let _ = std::io::stdout().flush();
            EXIT_OK
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Extract { input, out_dir, common } => cmd_extract(&input, &out_dir, &common),
        Command::Eval { reference, candidate, per_triangle, out, common } => cmd_eval(&reference, &candidate, per_triangle, out.as_deref(), &common),
        Command::Consistency { input, alt, out, common } => cmd_consistency(&input, alt, out.as_deref(), &common),
        Command::Hist { inputs, bins, low, out, common } => cmd_hist(&inputs, bins, low, &out, &common),
        Command::Sweep { inputs, thetas, out, common } => cmd_sweep(&inputs, &thetas, &out, &common),
        Command::Batch { dir, out_dir, common } => cmd_batch(&dir, &out_dir, &common),
        Command::Stats { input, common } => cmd_stats(&input, &common),
        Command::Synth { out_dir, corpus, seed } => cmd_synth(&out_dir, corpus, seed),
    }
}

fn checked_config(common: &Common) -> Result<RunConfig, i32> {
    let cfg = common.config();
    cfg.validate().map_err(fatal)?;
    Ok(cfg)
}

fn print_error(model: &str, file: &str, e: &PipelineError) -> i32 {
    print!("{}", ErrorReport::new(model, file, e).to_json());
    EXIT_FATAL
}

pub fn cmd_extract(input: &Path, out_dir: &Path, common: &Common) -> i32 {
    let cfg = match checked_config(common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (model, file) = (model_id(input), file_name(input));
    let start = Instant::now();
    let bytes = match fs::read(input) {
        Ok(b) => b,
        Err(e) => return print_error(&model, &file, &PipelineError::new(Stage::Parse, format!("cannot read file: {e}"))),
    };
    let mut timing = serde_json::Map::new();
    let mut last = start;
    let ex = extract(&bytes, &cfg, &mut |s| {
        let now = Instant::now();
        timing.insert(s.as_str().into(), json!((now - last).as_secs_f64()));
        last = now;
    });
    let ex = match ex {
        Ok(e) => e,
        Err(e) => return print_error(&model, &file, &e),
    };
    let t = Instant::now();
    if let Err(e) = write_carrier(&ex.carrier, Some(&cfg), out_dir, &model) {
        return fatal(e);
    }
    timing.insert(Stage::Serialize.as_str().into(), json!(t.elapsed().as_secs_f64()));
    let c = &ex.carrier;
    let summary = json!({
        "model": model,
        "num_faces": ex.solid.faces.len(),
        "num_parts": c.meta.num_parts,
        "num_triangles": c.num_triangles(),
        "skipped_faces": c.meta.skipped_faces,
        "isolates": c.meta.isolates,
        "timing": timing,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
    EXIT_OK
}

fn diag(c: &Carrier) -> f64 {
    Aabb::from_points(c.vertices.iter().copied()).diagonal()
}

pub fn cmd_eval(reference: &Path, candidate: &Path, per_triangle: bool, out: Option<&Path>, common: &Common) -> i32 {
    let cfg = match checked_config(common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let has_geometry = |p: &Path| resolve_pair(p).0.exists();
    let report = if per_triangle || !has_geometry(reference) || !has_geometry(candidate) {
        let (r, c) = match (read_labels(&resolve_pair(reference).1), read_labels(&resolve_pair(candidate).1)) {
            (Ok(r), Ok(c)) => (r, c),
            (Err(e), _) | (_, Err(e)) => return fatal(e),
        };
        if r.num_triangles() != c.num_triangles() {
            return fatal(format!("label counts differ: {} vs {}", r.num_triangles(), c.num_triangles()));
        }
        let lab = |l: Vec<u32>| SampledLabels { points: Vec::new(), labels: l, ..Default::default() };
        agreement(&lab(r.part_label), &lab(c.part_label))
    } else {
        let (r, c) = match (read_carrier(reference), read_carrier(candidate)) {
            (Ok(r), Ok(c)) => (r.0, c.0),
            (Err(e), _) | (_, Err(e)) => return fatal(e),
        };
        sample_points(&r, cfg.samples, cfg.seed, cfg.band * diag(&r))
            .and_then(|pts| transfer_labels(&pts, &c, cfg.transfer_mode()).and_then(|moved| agreement(&pts, &moved)))
    };
    match report {
        Ok(rep) => emit(out, &report_json(&rep, Some(&cfg))),
        Err(e) => fatal(e),
    }
}

fn load_solid(input: &Path) -> Result<step_parts_core::brep::BRepSolid, PipelineError> {
    let bytes = fs::read(input).map_err(|e| PipelineError::new(Stage::Parse, format!("cannot read file: {e}")))?;
    let g = parse_step(&bytes).map_err(|e| PipelineError::new(Stage::Parse, e))?;
    build_brep(&g).map_err(|e| PipelineError::new(Stage::Build, e))
}

fn tess_spec(n: TessName) -> TessellationSpec {
    match n {
        TessName::T0 => TessellationSpec::t0(),
        TessName::T1 => TessellationSpec::t1(),
        TessName::T2 => TessellationSpec::t2(),
    }
}

pub fn cmd_consistency(input: &Path, alt: TessName, out: Option<&Path>, common: &Common) -> i32 {
    let cfg = match checked_config(common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let solid = match load_solid(input) {
        Ok(s) => s,
        Err(e) => return print_error(&model_id(input), &file_name(input), &e),
    };
    let p = extract_parts(&build_adjacency(&solid), cfg.theta_deg);
    match self_consistency(&solid, &p, &cfg.tess, &tess_spec(alt), cfg.tau_min, cfg.samples, cfg.seed, cfg.band, cfg.transfer_mode()) {
        Ok(r) => emit(out, &report_json(&r, Some(&cfg))),
        Err(e) => fatal(e),
    }
}

/// Per-model work over a worker pool; results come back in input order.
/// Failures are reported on stderr.
fn per_model<T: Send>(files: &[PathBuf], workers: usize, f: impl Fn(&Path) -> Result<T, PipelineError> + Sync) -> (Vec<(String, T)>, usize) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    let results: Vec<(String, Result<T, PipelineError>)> = pool.install(|| files.par_iter().map(|p| (model_id(p), f(p))).collect());
    let mut ok = Vec::new();
    let mut failed = 0;
    for (m, r) in results {
        match r {
            Ok(v) => ok.push((m, v)),
            Err(e) => {
                failed += 1;
                eprintln!("{}", serde_json::to_string(&json!({"model": m, "stage": e.stage.as_str(), "error": e.message})).expect("json"));
            }
        }
    }
    (ok, failed)
}

fn partial(failed: usize) -> i32 {
    if failed > 0 {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

pub fn cmd_hist(inputs: &[PathBuf], bins: usize, low: f64, out: &Path, common: &Common) -> i32 {
    if bins < 2 {
        return fatal("bins must be at least 2");
    }
    let files = match expand_inputs(inputs) {
        Ok(f) => f,
        Err(e) => return fatal(e),
    };
    let (graphs, failed) = per_model(&files, common.workers(), |p| load_solid(p).map(|s| build_adjacency(&s)));
    let h = dihedral_histogram(graphs.iter().map(|g| &g.1 as &AdjacencyGraph), bins, low);
    let f = match fs::File::create(out) {
        Ok(f) => f,
        Err(e) => return fatal(format!("{}: {e}", out.display())),
    };
    if let Err(e) = write_hist_csv(&h, f) {
        return fatal(e);
    }
    let s = json!({
        "models": h.models,
        "failed": failed,
        "same_primitive_edges": h.total,
        "failed_edges": h.failed,
        "low_threshold_deg": low,
        "low_fraction": h.low_fraction(),
        "models_without_same_primitive": h.models_without_same_primitive,
    });
    println!("{}", serde_json::to_string_pretty(&s).expect("json"));
    partial(failed)
}

pub fn cmd_sweep(inputs: &[PathBuf], thetas: &[f64], out: &Path, common: &Common) -> i32 {
    let cfg = match checked_config(common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if thetas.is_empty() || thetas.windows(2).any(|w| !(w[0] < w[1])) {
        return fatal("thetas must be non-empty and ascending");
    }
    let files = match expand_inputs(inputs) {
        Ok(f) => f,
        Err(e) => return fatal(e),
    };
    let (rows, failed) = per_model(&files, common.workers(), |p| {
        let s = load_solid(p)?;
        threshold_sweep(&s, thetas, &cfg.tess, cfg.tau_min).map_err(|e| PipelineError::new(Stage::Tessellate, e))
    });
    let f = match fs::File::create(out) {
        Ok(f) => f,
        Err(e) => return fatal(format!("{}: {e}", out.display())),
    };
    let flat: Vec<(&str, &SweepRecord)> = rows.iter().flat_map(|(m, recs)| recs.iter().map(move |r| (m.as_str(), r))).collect();
    if let Err(e) = write_sweep_csv(flat, f) {
        return fatal(e);
    }
    partial(failed)
}

pub fn cmd_batch(dir: &Path, out_dir: &Path, common: &Common) -> i32 {
    let cfg = match checked_config(common) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run_batch(dir, out_dir, &cfg, common.workers()) {
        Ok(r) => {
            let s = &r.summary;
            eprintln!(
                "{} models: {} ok, {} failed, {} skipped; {:.2}s wall, {:.3}s mean per model",
                s.models, s.succeeded, s.failed, s.skipped, r.timing.wall_seconds, r.timing.per_model.mean
            );
            if cfg.fail_fast && s.failed > 0 {
                EXIT_FATAL
            } else {
                r.exit_code()
            }
        }
        Err(e) => fatal(e),
    }
}

#[derive(Serialize)]
struct Stats {
    model: String,
    entities: usize,
    keywords: std::collections::BTreeMap<String, usize>,
    faces: usize,
    edges: usize,
    shells: usize,
    diagonal: f64,
    boundary_edges: usize,
    non_manifold_edges: usize,
    skipped_entities: usize,
    same_primitive_edges: usize,
    orientation_conflict: bool,
    num_parts: usize,
    parts: Vec<serde_json::Value>,
}

pub fn cmd_stats(input: &Path, common: &Common) -> i32 {
    let (model, file) = (model_id(input), file_name(input));
    let bytes = match fs::read(input) {
        Ok(b) => b,
        Err(e) => return print_error(&model, &file, &PipelineError::new(Stage::Parse, format!("cannot read file: {e}"))),
    };
    let g = match parse_step(&bytes) {
        Ok(g) => g,
        Err(e) => return print_error(&model, &file, &PipelineError::new(Stage::Parse, e)),
    };
    let solid = match build_brep(&g) {
        Ok(s) => s,
        Err(e) => return print_error(&model, &file, &PipelineError::new(Stage::Build, e)),
    };
    let graph = build_adjacency(&solid);
    let p = extract_parts(&graph, common.theta);
    let d = &solid.diagnostics;
    let s = Stats {
        model,
        entities: g.len(),
        keywords: entity_stats(&g),
        faces: solid.faces.len(),
        edges: solid.edges.len(),
        shells: solid.shells.len(),
        diagonal: solid.diagonal(),
        boundary_edges: d.boundary.len(),
        non_manifold_edges: d.non_manifold.len(),
        skipped_entities: d.skipped.len(),
        same_primitive_edges: graph.edges.iter().filter(|e| e.same_primitive).count(),
        orientation_conflict: graph.orientation_conflict,
        num_parts: p.num_parts(),
        parts: p.parts.iter().map(|s| json!({"id": s.id, "faces": s.faces, "primitive": s.primitive.as_str()})).collect(),
    };
    println!("{}", serde_json::to_string_pretty(&s).expect("json"));
    EXIT_OK
}

pub fn cmd_synth(out_dir: &Path, corpus: Option<usize>, seed: u64) -> i32 {
    if let Err(e) = fs::create_dir_all(out_dir) {
        return fatal(format!("{}: {e}", out_dir.display()));
    }
    let models: Vec<(String, _)> = match corpus {
        Some(n) => synth::corpus(n, seed),
        None => synth::fixtures().into_iter().map(|(n, g)| (n.to_string(), g)).collect(),
    };
    for (name, g) in &models {
        let p = out_dir.join(format!("{name}.step"));
        if let Err(e) = fs::write(&p, write_step(g)) {
            return fatal(format!("{}: {e}", p.display()));
        }
    }
    if let Err(e) = write_json(&out_dir.join("manifest.json"), &models.iter().map(|m| m.0.as_str()).collect::<Vec<_>>()) {
        return fatal(e);
    }
    EXIT_OK
}
