//! Point-sampled label agreement between two labelings of a surface.

pub mod hungarian;
pub mod nn;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::brep::BRepSolid;
use crate::carrier::{project_labels, stabilize, Carrier};
use crate::geom::{sqrt, Vec3};
use crate::partition::Partition;
use crate::tessellate::{tessellate_solid, TessellationSpec};

pub use hungarian::max_weight_matching;
pub use nn::{PointIndex, TriangleIndex};

pub const DEFAULT_SAMPLES: usize = 100_000;
/// Boundary band half-width as a fraction of the bounding box diagonal.
pub const DEFAULT_BAND: f64 = 0.01;
/// Boundary samples drawn per surface sample.
pub const BOUNDARY_FRACTION: usize = 10;

/// Uniform double in `[0, 1)` from the top 53 bits of a ChaCha8 word.
pub fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("carrier has no triangles")]
    EmptyCarrier,
    #[error("transfer target has no labeled geometry")]
    EmptyTarget,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("labelings cover different point sets")]
    LengthMismatch,
}

/// Surface samples plus boundary-band samples, each with a label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledLabels {
    pub points: Vec<Vec3>,
    pub labels: Vec<u32>,
    pub boundary_points: Vec<Vec3>,
    pub boundary_labels: Vec<u32>,
    pub source: String,
}

/// Mesh edges separating different labels: `(a, b, adjacent triangles)`.
pub fn label_boundary_edges(c: &Carrier) -> Vec<(u32, u32, Vec<usize>)> {
    let mut e: Vec<(u32, u32, usize)> = Vec::with_capacity(3 * c.triangles.len());
    for (t, tri) in c.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            e.push((a.min(b), a.max(b), t));
        }
    }
    e.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < e.len() {
        let mut j = i + 1;
        while j < e.len() && e[j].0 == e[i].0 && e[j].1 == e[i].1 {
            j += 1;
        }
        let tris: Vec<usize> = e[i..j].iter().map(|x| x.2).collect();
        let l0 = c.part_label[tris[0]];
        if tris.iter().any(|&t| c.part_label[t] != l0) {
            out.push((e[i].0, e[i].1, tris));
        }
        i = j;
    }
    out
}

fn pick(cumulative: &[f64], r: f64) -> usize {
    let total = *cumulative.last().unwrap();
    let x = r * total;
    cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1)
}

/// `n` area-weighted surface samples and `n / 10` samples within `band`
/// (model units) of label boundaries, labeled by their triangle.
pub fn sample_points(c: &Carrier, n: usize, seed: u64, band: f64) -> Result<SampledLabels, EvalError> {
    if n == 0 {
        return Err(EvalError::NoSamples);
    }
    let mut cum = Vec::with_capacity(c.triangles.len());
    let mut acc = 0.0;
    for t in 0..c.triangles.len() {
        acc += c.triangle_area(t);
        cum.push(acc);
    }
    if cum.is_empty() || !(acc > 0.0) {
        return Err(EvalError::EmptyCarrier);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SampledLabels { source: String::from("carrier"), ..Default::default() };
    out.points.reserve(n);
    out.labels.reserve(n);
    for _ in 0..n {
        let t = pick(&cum, unit_f64(&mut rng));
        let (r1, r2) = (unit_f64(&mut rng), unit_f64(&mut rng));
        let s = sqrt(r1);
        let [a, b, cc] = c.triangle(t);
        out.points.push(a * (1.0 - s) + b * (s * (1.0 - r2)) + cc * (s * r2));
        out.labels.push(c.part_label[t]);
    }

    let edges = label_boundary_edges(c);
    if !edges.is_empty() {
        let mut cum = Vec::with_capacity(edges.len());
        let mut acc = 0.0;
        for (a, b, _) in &edges {
            acc += c.vertices[*a as usize].dist(c.vertices[*b as usize]);
            cum.push(acc);
        }
        let nb = (n / BOUNDARY_FRACTION).max(1);
        for _ in 0..nb {
            let (a, b, tris) = &edges[pick(&cum, unit_f64(&mut rng))];
            let t = tris[((unit_f64(&mut rng) * tris.len() as f64) as usize).min(tris.len() - 1)];
            let (pa, pb) = (c.vertices[*a as usize], c.vertices[*b as usize]);
            let e = pa.lerp(pb, unit_f64(&mut rng));
            let tri = c.triangles[t];
            let opp = tri.iter().copied().find(|&v| v != *a && v != *b).unwrap_or(tri[0]);
            let to = c.vertices[opp as usize] - e;
            let len = to.norm();
            let reach = if len > 0.0 { (band / len).min(1.0) } else { 0.0 };
            out.boundary_points.push(e + to * (unit_f64(&mut rng) * reach));
            out.boundary_labels.push(c.part_label[t]);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferMode {
    /// Label of the nearest target vertex.
    Vertex,
    /// Label of the nearest target triangle.
    #[default]
    Triangle,
}

impl TransferMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransferMode::Vertex => "vertex",
            TransferMode::Triangle => "triangle",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "vertex" => Some(TransferMode::Vertex),
            "triangle" => Some(TransferMode::Triangle),
            _ => None,
        }
    }
}

/// Per-vertex labels of a carrier: each vertex takes the label of the first
/// triangle using it. Unused vertices are omitted.
pub fn vertex_labels(c: &Carrier) -> (Vec<Vec3>, Vec<u32>) {
    let mut lab: Vec<Option<u32>> = vec![None; c.vertices.len()];
    for (t, tri) in c.triangles.iter().enumerate() {
        for &v in tri {
            lab[v as usize].get_or_insert(c.part_label[t]);
        }
    }
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for (v, l) in lab.iter().enumerate() {
        if let Some(l) = l {
            pts.push(c.vertices[v]);
            labels.push(*l);
        }
    }
    (pts, labels)
}

/// Labels the points of `points` from the nearest labeled vertex.
pub fn transfer_from_vertices(points: &SampledLabels, vertices: &[Vec3], labels: &[u32]) -> Result<SampledLabels, EvalError> {
    if vertices.is_empty() || vertices.len() != labels.len() {
        return Err(EvalError::EmptyTarget);
    }
    let idx = PointIndex::new(vertices);
    let look = |p: &Vec3| labels[idx.nearest(*p).unwrap()];
    Ok(SampledLabels {
        points: points.points.clone(),
        labels: points.points.iter().map(look).collect(),
        boundary_points: points.boundary_points.clone(),
        boundary_labels: points.boundary_points.iter().map(look).collect(),
        source: String::from("transfer:vertex"),
    })
}

/// Relabels `points` from `target` by nearest vertex or nearest triangle.
pub fn transfer_labels(points: &SampledLabels, target: &Carrier, mode: TransferMode) -> Result<SampledLabels, EvalError> {
    if target.triangles.is_empty() {
        return Err(EvalError::EmptyTarget);
    }
    match mode {
        TransferMode::Vertex => {
            let (v, l) = vertex_labels(target);
            transfer_from_vertices(points, &v, &l)
        }
        TransferMode::Triangle => {
            let tris: Vec<[Vec3; 3]> = (0..target.triangles.len()).map(|t| target.triangle(t)).collect();
            let idx = TriangleIndex::new(&tris);
            let look = |p: &Vec3| target.part_label[idx.nearest(*p).unwrap()];
            Ok(SampledLabels {
                points: points.points.clone(),
                labels: points.points.iter().map(look).collect(),
                boundary_points: points.boundary_points.clone(),
                boundary_labels: points.boundary_points.iter().map(look).collect(),
                source: String::from("transfer:triangle"),
            })
        }
    }
}

/// Optimal one-to-one correspondence between reference and candidate
/// labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Alignment {
    pub ref_labels: Vec<u32>,
    pub cand_labels: Vec<u32>,
    /// `overlap[r][c]`: points with reference label `ref_labels[r]` and
    /// candidate label `cand_labels[c]`.
    pub overlap: Vec<Vec<u64>>,
    pub matched: Vec<(u32, u32)>,
    pub unmatched_ref: Vec<u32>,
    pub unmatched_cand: Vec<u32>,
}

impl Alignment {
    /// Reference label matched to candidate label `c`.
    pub fn ref_for(&self, c: u32) -> Option<u32> {
        self.matched.iter().find(|m| m.1 == c).map(|m| m.0)
    }
}

fn distinct(l: &[u32]) -> Vec<u32> {
    let mut v = l.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Maximum-overlap matching of the two label sets over the same points.
pub fn align_labels(reference: &[u32], candidate: &[u32]) -> Result<Alignment, EvalError> {
    if reference.len() != candidate.len() {
        return Err(EvalError::LengthMismatch);
    }
    let rl = distinct(reference);
    let cl = distinct(candidate);
    let ri: BTreeMap<u32, usize> = rl.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let ci: BTreeMap<u32, usize> = cl.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut overlap = vec![vec![0u64; cl.len()]; rl.len()];
    for (r, c) in reference.iter().zip(candidate) {
        overlap[ri[r]][ci[c]] += 1;
    }
    let m = max_weight_matching(&overlap);
    let mut matched = Vec::new();
    let mut unmatched_ref = Vec::new();
    let mut used = vec![false; cl.len()];
    for (r, c) in m.iter().enumerate() {
        match c {
            Some(c) => {
                matched.push((rl[r], cl[*c]));
                used[*c] = true;
            }
            None => unmatched_ref.push(rl[r]),
        }
    }
    let unmatched_cand = cl.iter().zip(&used).filter(|(_, u)| !**u).map(|(l, _)| *l).collect();
    Ok(Alignment { ref_labels: rl, cand_labels: cl, overlap, matched, unmatched_ref, unmatched_cand })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgreementReport {
    pub accuracy: f64,
    pub miou: f64,
    pub boundary_accuracy: f64,
    pub matched: Vec<(u32, u32)>,
    pub unmatched_ref: Vec<u32>,
    pub unmatched_cand: Vec<u32>,
    /// Reference label → IoU with its matched candidate (0 when unmatched).
    pub per_label_iou: Vec<(u32, f64)>,
    pub num_points: usize,
    pub num_boundary_points: usize,
}

/// Accuracy, mean IoU over reference labels (unmatched count as 0) and
/// boundary-band accuracy after optimal alignment. Boundary accuracy is 1
/// when there are no boundary samples.
pub fn agreement(reference: &SampledLabels, candidate: &SampledLabels) -> Result<AgreementReport, EvalError> {
    if reference.points.len() != candidate.points.len() || reference.boundary_labels.len() != candidate.boundary_labels.len() {
        return Err(EvalError::LengthMismatch);
    }
    let al = align_labels(&reference.labels, &candidate.labels)?;
    let n = reference.labels.len();
    let ri: BTreeMap<u32, usize> = al.ref_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let ci: BTreeMap<u32, usize> = al.cand_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let ref_size: Vec<u64> = al.overlap.iter().map(|row| row.iter().sum()).collect();
    let cand_size: Vec<u64> = (0..al.cand_labels.len()).map(|c| al.overlap.iter().map(|row| row[c]).sum()).collect();

    let mut correct = 0u64;
    let mut per_label_iou: Vec<(u32, f64)> = al.ref_labels.iter().map(|&l| (l, 0.0)).collect();
    for &(r, c) in &al.matched {
        let (i, j) = (ri[&r], ci[&c]);
        let inter = al.overlap[i][j];
        correct += inter;
        let union = ref_size[i] + cand_size[j] - inter;
        per_label_iou[i].1 = if union > 0 { inter as f64 / union as f64 } else { 0.0 };
    }
    let accuracy = if n > 0 { correct as f64 / n as f64 } else { 1.0 };
    let miou = if per_label_iou.is_empty() {
        1.0
    } else {
        per_label_iou.iter().map(|x| x.1).sum::<f64>() / per_label_iou.len() as f64
    };

    let map: BTreeMap<u32, u32> = al.matched.iter().map(|&(r, c)| (c, r)).collect();
    let nb = reference.boundary_labels.len();
    let boundary_accuracy = if nb == 0 {
        1.0
    } else {
        let ok = reference
            .boundary_labels
            .iter()
            .zip(&candidate.boundary_labels)
            .filter(|(r, c)| map.get(c) == Some(r))
            .count();
        ok as f64 / nb as f64
    };
    Ok(AgreementReport {
        accuracy,
        miou,
        boundary_accuracy,
        matched: al.matched,
        unmatched_ref: al.unmatched_ref,
        unmatched_cand: al.unmatched_cand,
        per_label_iou,
        num_points: n,
        num_boundary_points: nb,
    })
}

/// Stabilized carrier of `solid` under `spec`.
pub fn stabilized_carrier(solid: &BRepSolid, partition: &Partition, spec: &TessellationSpec, tau_min: u32) -> Result<Carrier, EvalError> {
    let t = tessellate_solid(solid, spec);
    let c = project_labels(&t.meshes, partition).map_err(|_| EvalError::EmptyCarrier)?;
    if c.triangles.is_empty() {
        return Err(EvalError::EmptyCarrier);
    }
    let mut s = stabilize(&c, tau_min);
    s.meta.tess = spec.clone();
    Ok(s)
}

/// Agreement between carriers of the same partition under two tessellation
/// specs: points are sampled on the `spec_ref` carrier and the `spec_alt`
/// labels are transferred to them.
#[allow(clippy::too_many_arguments)]
pub fn self_consistency(
    solid: &BRepSolid,
    partition: &Partition,
    spec_ref: &TessellationSpec,
    spec_alt: &TessellationSpec,
    tau_min: u32,
    n: usize,
    seed: u64,
    band: f64,
    mode: TransferMode,
) -> Result<AgreementReport, EvalError> {
    let a = stabilized_carrier(solid, partition, spec_ref, tau_min)?;
    let b = stabilized_carrier(solid, partition, spec_alt, tau_min)?;
    let pts = sample_points(&a, n, seed, band * solid.diagonal())?;
    let moved = transfer_labels(&pts, &b, mode)?;
    agreement(&pts, &moved)
}

#[cfg(test)]
mod tests;
