//! Corpus statistics: same-primitive dihedral histograms and θ-sweep
//! partition metrics.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::brep::{BRepSolid, PrimitiveType};
use crate::carrier::{project_labels, stabilize, Carrier};
use crate::geom::{angle_between, log2, to_degrees, Vec3};
use crate::partition::{build_adjacency, extract_parts, AdjacencyGraph};
use crate::tessellate::{tessellate_solid, Tessellation, TessellationSpec};

pub const DEFAULT_BINS: usize = 90;
pub const DEFAULT_SWEEP: [f64; 5] = [4.0, 6.0, 8.0, 10.0, 12.0];

#[derive(Debug, Clone, PartialEq)]
pub struct DihedralHistogram {
    /// `bins + 1` edges in degrees from 0 to 180.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Same-primitive edges at or below `low_threshold`.
    pub low_count: u64,
    pub low_threshold: f64,
    /// Same-primitive edges whose normal evaluation failed (not binned).
    pub failed: u64,
    pub models: usize,
    pub models_without_same_primitive: usize,
}

impl DihedralHistogram {
    pub fn low_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.low_count as f64 / self.total as f64
        }
    }

    /// `(bin_lo, bin_hi, count)` rows.
    pub fn rows(&self) -> Vec<(f64, f64, u64)> {
        (0..self.counts.len()).map(|i| (self.edges[i], self.edges[i + 1], self.counts[i])).collect()
    }
}

/// Bin index of `phi` among `bins` equal bins over `[0, 180]`; 180 falls in
/// the last bin.
pub fn bin_of(phi: f64, bins: usize) -> usize {
    let b = (phi / 180.0 * bins as f64) as usize;
    b.min(bins - 1)
}

/// Histogram of φ over same-primitive adjacencies of all graphs. `bins` is
/// clamped to at least 2.
pub fn dihedral_histogram<'a>(graphs: impl IntoIterator<Item = &'a AdjacencyGraph>, bins: usize, low_threshold: f64) -> DihedralHistogram {
    let bins = bins.max(2);
    let mut h = DihedralHistogram {
        edges: (0..=bins).map(|i| 180.0 * i as f64 / bins as f64).collect(),
        counts: vec![0; bins],
        total: 0,
        low_count: 0,
        low_threshold,
        failed: 0,
        models: 0,
        models_without_same_primitive: 0,
    };
    for g in graphs {
        h.models += 1;
        let mut any = false;
        for e in g.edges.iter().filter(|e| e.same_primitive) {
            any = true;
            if e.failed {
                h.failed += 1;
                continue;
            }
            h.counts[bin_of(e.phi, bins)] += 1;
            h.total += 1;
            if e.phi <= low_threshold {
                h.low_count += 1;
            }
        }
        if !any {
            h.models_without_same_primitive += 1;
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub theta: f64,
    /// Final part count `P`.
    pub parts: usize,
    /// Part-size entropy `H` in bits over area shares.
    pub entropy: f64,
    /// Length-weighted mean dihedral (degrees) over carrier edges between
    /// different parts; 0 when there are none.
    pub s_boundary: f64,
    /// Mean over parts of the area-weighted mean angle (degrees) between
    /// triangle normals and the part's area-weighted mean normal.
    pub d_intra: f64,
    /// Parts per primitive type, indexed by `PrimitiveType::index`.
    pub primitive_counts: [usize; 9],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SweepError {
    #[error("threshold list must be non-empty and ascending")]
    BadThresholds,
    #[error("no face could be tessellated")]
    EmptyCarrier,
}

fn unit_normal(t: [Vec3; 3]) -> Option<Vec3> {
    (t[1] - t[0]).cross(t[2] - t[0]).normalized()
}

/// Metrics of one stabilized carrier.
pub fn carrier_metrics(c: &Carrier, theta: f64) -> SweepRecord {
    let labels = c.labels();
    let index: BTreeMap<u32, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let k = labels.len();
    let mut area = vec![0.0f64; k];
    let mut nsum = vec![Vec3::ZERO; k];
    let mut prim_area: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
    let normals: Vec<Option<Vec3>> = (0..c.num_triangles()).map(|t| unit_normal(c.triangle(t))).collect();
    for t in 0..c.num_triangles() {
        let i = index[&c.part_label[t]];
        let a = c.triangle_area(t);
        area[i] += a;
        if let Some(n) = normals[t] {
            nsum[i] += n * a;
        }
        *prim_area[i].entry(c.primitive[t].index()).or_insert(0.0) += a;
    }
    let total: f64 = area.iter().sum();
    let entropy = if total > 0.0 {
        -area.iter().filter(|&&a| a > 0.0).map(|&a| (a / total) * log2(a / total)).sum::<f64>()
    } else {
        0.0
    };
    let entropy = if entropy > 0.0 { entropy } else { 0.0 };

    let mut dev = vec![0.0f64; k];
    for t in 0..c.num_triangles() {
        let i = index[&c.part_label[t]];
        if let (Some(n), Some(m)) = (normals[t], nsum[i].normalized()) {
            dev[i] += to_degrees(angle_between(n, m)) * c.triangle_area(t);
        }
    }
    let d_intra = if k > 0 {
        (0..k).map(|i| if area[i] > 0.0 { dev[i] / area[i] } else { 0.0 }).sum::<f64>() / k as f64
    } else {
        0.0
    };

    let mut wsum = 0.0;
    let mut lsum = 0.0;
    for (a, b, tris) in crate::eval::label_boundary_edges(c) {
        let len = c.vertices[a as usize].dist(c.vertices[b as usize]);
        for x in 0..tris.len() {
            for y in x + 1..tris.len() {
                let (p, q) = (tris[x], tris[y]);
                if c.part_label[p] == c.part_label[q] {
                    continue;
                }
                if let (Some(np), Some(nq)) = (normals[p], normals[q]) {
                    wsum += to_degrees(angle_between(np, nq)) * len;
                    lsum += len;
                }
            }
        }
    }
    let s_boundary = if lsum > 0.0 { wsum / lsum } else { 0.0 };

    let mut primitive_counts = [0usize; 9];
    for pa in &prim_area {
        // dominant primitive by area, ties to the smaller index
        let best = pa.iter().fold(None, |b: Option<(usize, f64)>, (&p, &a)| match b {
            Some((_, ba)) if ba >= a => b,
            _ => Some((p, a)),
        });
        if let Some((p, _)) = best {
            primitive_counts[p] += 1;
        }
    }
    SweepRecord { theta, parts: k, entropy, s_boundary, d_intra, primitive_counts }
}

/// Runs partition → projection → stabilization for every θ over one shared
/// tessellation.
pub fn threshold_sweep(solid: &BRepSolid, thetas: &[f64], spec: &TessellationSpec, tau_min: u32) -> Result<Vec<SweepRecord>, SweepError> {
    let tess = tessellate_solid(solid, spec);
    sweep_with_tessellation(solid, &tess, thetas, tau_min)
}

pub fn sweep_with_tessellation(solid: &BRepSolid, tess: &Tessellation, thetas: &[f64], tau_min: u32) -> Result<Vec<SweepRecord>, SweepError> {
    if thetas.is_empty() || thetas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SweepError::BadThresholds);
    }
    if tess.meshes.is_empty() {
        return Err(SweepError::EmptyCarrier);
    }
    let graph = build_adjacency(solid);
    thetas
        .iter()
        .map(|&theta| {
            let p = extract_parts(&graph, theta);
            let c = project_labels(&tess.meshes, &p).map_err(|_| SweepError::EmptyCarrier)?;
            Ok(carrier_metrics(&stabilize(&c, tau_min), theta))
        })
        .collect()
}

/// Primitive column names in `primitive_counts` order.
pub fn primitive_columns() -> [PrimitiveType; 9] {
    PrimitiveType::ALL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brep::build_brep;
    use crate::synth;

    fn graph(g: &crate::step::StepEntityGraph) -> AdjacencyGraph {
        build_adjacency(&build_brep(g).unwrap())
    }

    #[test]
    fn cube_edges_all_in_ninety_degree_bin() {
        let g = graph(&synth::cube(10.0));
        let h = dihedral_histogram([&g], DEFAULT_BINS, 8.0);
        assert_eq!(h.total, 12);
        assert_eq!(h.counts[bin_of(90.0, DEFAULT_BINS)], 12);
        assert_eq!(h.counts.iter().sum::<u64>(), h.total);
        assert_eq!(h.low_fraction(), 0.0);
        assert_eq!(h.edges[0], 0.0);
        assert_eq!(h.edges[DEFAULT_BINS], 180.0);
    }

    #[test]
    fn split_cylinder_counts_only_seams() {
        let g = graph(&synth::split_cylinder(5.0, 10.0));
        let h = dihedral_histogram([&g], DEFAULT_BINS, 8.0);
        assert_eq!(h.total, 2);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.low_fraction(), 1.0);
    }

    #[test]
    fn models_without_same_primitive_adjacency_counted() {
        let a = graph(&synth::single_face(1.0));
        let b = graph(&synth::cube(1.0));
        let h = dihedral_histogram([&a, &b], 4, 8.0);
        assert_eq!(h.models, 2);
        assert_eq!(h.models_without_same_primitive, 1);
        assert_eq!(bin_of(180.0, 4), 3);
        assert_eq!(bin_of(0.0, 4), 0);
        assert_eq!(bin_of(45.0, 4), 1);
    }

    #[test]
    fn cube_sweep_is_stable() {
        let s = build_brep(&synth::cube(10.0)).unwrap();
        let r = threshold_sweep(&s, &DEFAULT_SWEEP, &TessellationSpec::t0(), 20).unwrap();
        assert_eq!(r.len(), 5);
        for rec in &r {
            assert_eq!(rec.parts, 6);
            assert!((rec.entropy - log2(6.0)).abs() < 1e-9);
            assert!(rec.d_intra.abs() < 1e-9);
            assert!((rec.s_boundary - 90.0).abs() < 1e-6);
            assert_eq!(rec.primitive_counts[PrimitiveType::Plane.index()], 6);
        }
        for w in r.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            assert_eq!((a.parts, a.entropy, a.s_boundary, a.d_intra, a.primitive_counts), (b.parts, b.entropy, b.s_boundary, b.d_intra, b.primitive_counts));
        }
    }

    #[test]
    fn single_face_sweep() {
        let s = build_brep(&synth::single_face(2.0)).unwrap();
        let r = threshold_sweep(&s, &[8.0], &TessellationSpec::t0(), 20).unwrap();
        assert_eq!(r[0].parts, 1);
        assert_eq!(r[0].entropy, 0.0);
        assert_eq!(r[0].d_intra, 0.0);
        assert_eq!(r[0].s_boundary, 0.0);
    }

    #[test]
    fn split_cylinder_boundaries_are_caps() {
        let s = build_brep(&synth::split_cylinder(5.0, 10.0)).unwrap();
        for rec in threshold_sweep(&s, &DEFAULT_SWEEP, &TessellationSpec::t0(), 20).unwrap() {
            assert_eq!(rec.parts, 3);
            assert!((rec.s_boundary - 90.0).abs() < 1e-6, "{}", rec.s_boundary);
            assert_eq!(rec.primitive_counts[PrimitiveType::Cylinder.index()], 1);
            assert_eq!(rec.primitive_counts[PrimitiveType::Plane.index()], 2);
        }
    }

    #[test]
    fn sweep_monotone_and_entropy_bounded() {
        for (name, g) in synth::fixtures() {
            let s = build_brep(&g).unwrap();
            let thetas = [0.5, 4.0, 8.0, 30.0, 90.0, 180.0];
            let r = threshold_sweep(&s, &thetas, &TessellationSpec::t2(), 20).unwrap();
            for w in r.windows(2) {
                assert!(w[1].parts <= w[0].parts, "{name}");
            }
            for rec in &r {
                assert!(rec.entropy >= 0.0);
                assert!(rec.entropy <= log2(rec.parts as f64) + 1e-9, "{name}");
                assert_eq!(rec.entropy == 0.0, rec.parts == 1, "{name}");
                assert_eq!(rec.primitive_counts.iter().sum::<usize>(), rec.parts);
            }
        }
    }

    #[test]
    fn bad_threshold_lists_rejected() {
        let s = build_brep(&synth::cube(1.0)).unwrap();
        let t = TessellationSpec::t2();
        assert_eq!(threshold_sweep(&s, &[], &t, 20), Err(SweepError::BadThresholds));
        assert_eq!(threshold_sweep(&s, &[8.0, 4.0], &t, 20), Err(SweepError::BadThresholds));
    }
}
