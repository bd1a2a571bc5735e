//! Labeled triangle carrier: tessellation plus per-triangle part label,
//! source face and primitive type, with micro-part stabilization.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::brep::PrimitiveType;
use crate::geom::Vec3;
use crate::partition::Partition;
use crate::tessellate::{tri_area, FaceMesh, TessellationSpec};

pub const DEFAULT_TAU_MIN: u32 = 20;

/// Face left out of the carrier and why.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkippedFace {
    pub face: usize,
    pub step_id: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CarrierMeta {
    pub theta_deg: f64,
    pub tau_min: u32,
    pub tess: TessellationSpec,
    pub num_parts: usize,
    /// Indexed by `label - 1`.
    pub part_triangles: Vec<usize>,
    pub part_area: Vec<f64>,
    pub skipped_faces: Vec<SkippedFace>,
    /// Labels of components below `tau_min` that had no neighbour to merge
    /// into.
    pub isolates: Vec<u32>,
    pub stabilized: bool,
    pub toolchain: String,
}

impl Default for CarrierMeta {
    fn default() -> Self {
        CarrierMeta {
            theta_deg: crate::partition::DEFAULT_THETA,
            tau_min: DEFAULT_TAU_MIN,
            tess: TessellationSpec::t0(),
            num_parts: 0,
            part_triangles: Vec::new(),
            part_area: Vec::new(),
            skipped_faces: Vec::new(),
            isolates: Vec::new(),
            stabilized: false,
            toolchain: String::from(concat!("step-parts ", env!("CARGO_PKG_VERSION"))),
        }
    }
}

/// Triangles are kept grouped by ascending part label (stable within a
/// label), the order used on disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Carrier {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub part_label: Vec<u32>,
    pub source_face: Vec<u32>,
    pub primitive: Vec<PrimitiveType>,
    pub meta: CarrierMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CarrierError {
    #[error("mesh references face {0} which is not in the partition")]
    UnknownFace(usize),
}

impl Carrier {
    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        tri_area(self.triangle(t))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Distinct labels, ascending.
    pub fn labels(&self) -> Vec<u32> {
        let mut l = self.part_label.clone();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Recomputes part count and per-part totals from the label array.
    pub fn refresh_totals(&mut self) {
        let k = self.part_label.iter().copied().max().unwrap_or(0) as usize;
        let mut tris = vec![0usize; k];
        let mut area = vec![0.0f64; k];
        for t in 0..self.triangles.len() {
            let l = self.part_label[t] as usize - 1;
            tris[l] += 1;
            area[l] += self.triangle_area(t);
        }
        self.meta.num_parts = self.labels().len();
        self.meta.part_triangles = tris;
        self.meta.part_area = area;
    }

    /// Stable reorder of the per-triangle arrays by label.
    fn group_by_label(&mut self) {
        let mut order: Vec<usize> = (0..self.triangles.len()).collect();
        order.sort_by_key(|&t| self.part_label[t]);
        self.triangles = order.iter().map(|&t| self.triangles[t]).collect();
        self.part_label = order.iter().map(|&t| self.part_label[t]).collect();
        self.source_face = order.iter().map(|&t| self.source_face[t]).collect();
        self.primitive = order.iter().map(|&t| self.primitive[t]).collect();
    }
}

/// Carrier with `y_j = ℓ(f_j)` and the source face's primitive type.
/// Vertices bit-identical across faces are merged.
pub fn project_labels(meshes: &[FaceMesh], partition: &Partition) -> Result<Carrier, CarrierError> {
    let mut c = Carrier::default();
    let mut index: BTreeMap<[u64; 3], u32> = BTreeMap::new();
    for m in meshes {
        let label = *partition.assignment.get(m.face).ok_or(CarrierError::UnknownFace(m.face))?;
        let primitive = partition.parts[label as usize - 1].primitive;
        let local: Vec<u32> = m
            .vertices
            .iter()
            .map(|v| {
                let next = c.vertices.len() as u32;
                *index.entry(v.bits()).or_insert_with(|| {
                    c.vertices.push(*v);
                    next
                })
            })
            .collect();
        for t in &m.triangles {
            c.triangles.push(t.map(|i| local[i as usize]));
            c.part_label.push(label);
            c.source_face.push(m.face as u32);
            c.primitive.push(primitive);
        }
    }
    c.group_by_label();
    c.refresh_totals();
    Ok(c)
}

/// Triangle adjacency through shared (undirected) mesh edges.
struct EdgeIndex {
    /// `(a, b, triangle)` with `a < b`, sorted.
    entries: Vec<(u32, u32, u32)>,
}

impl EdgeIndex {
    fn new(tris: &[[u32; 3]]) -> Self {
        let mut entries = Vec::with_capacity(tris.len() * 3);
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                entries.push((a.min(b), a.max(b), t as u32));
            }
        }
        entries.sort_unstable();
        EdgeIndex { entries }
    }

    /// Calls `f(edge_a, edge_b, t1, t2)` for every pair of triangles sharing
    /// an edge.
    fn for_each_pair(&self, mut f: impl FnMut(u32, u32, usize, usize)) {
        let e = &self.entries;
        let mut i = 0;
        while i < e.len() {
            let mut j = i + 1;
            while j < e.len() && e[j].0 == e[i].0 && e[j].1 == e[i].1 {
                j += 1;
            }
            for x in i..j {
                for y in x + 1..j {
                    f(e[i].0, e[i].1, e[x].2 as usize, e[y].2 as usize);
                }
            }
            i = j;
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Same-label connected components; returns per-triangle component ids
/// numbered by first triangle.
fn components(labels: &[u32], pairs: &[(usize, usize)]) -> (Vec<usize>, usize) {
    let n = labels.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b) in pairs {
        if labels[a] == labels[b] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut id = vec![usize::MAX; n];
    let mut remap = vec![usize::MAX; n];
    let mut count = 0;
    for t in 0..n {
        let r = find(&mut parent, t);
        if remap[r] == usize::MAX {
            remap[r] = count;
            count += 1;
        }
        id[t] = remap[r];
    }
    (id, count)
}

/// Absorbs same-label components with fewer than `tau_min` triangles into
/// the neighbouring label with the longest shared boundary (ties to the
/// smaller label), repeating until nothing changes, then compacts labels to
/// `1..=k'` preserving order. Geometry and triangle order are untouched
/// apart from regrouping by the new labels.
pub fn stabilize(carrier: &Carrier, tau_min: u32) -> Carrier {
    let mut c = carrier.clone();
    let n = c.triangles.len();
    let index = EdgeIndex::new(&c.triangles);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut pair_len: Vec<f64> = Vec::new();
    index.for_each_pair(|a, b, t1, t2| {
        pairs.push((t1, t2));
        pair_len.push(c.vertices[a as usize].dist(c.vertices[b as usize]));
    });
    let mut nbrs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(a, b), &len) in pairs.iter().zip(&pair_len) {
        nbrs[a].push((b, len));
        nbrs[b].push((a, len));
    }

    let tau = tau_min as usize;
    let mut isolated_tris: Vec<usize> = Vec::new();
    if tau > 0 {
        loop {
            let (comp, count) = components(&c.part_label, &pairs);
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
            for t in 0..n {
                members[comp[t]].push(t);
            }
            // smallest first, then by first triangle
            let mut order: Vec<usize> = (0..count).filter(|&k| members[k].len() < tau).collect();
            order.sort_by_key(|&k| (members[k].len(), members[k][0]));
            let mut changed = false;
            for k in order {
                let mut shared: BTreeMap<u32, f64> = BTreeMap::new();
                let own = c.part_label[members[k][0]];
                for &t in &members[k] {
                    for &(o, len) in &nbrs[t] {
                        let l = c.part_label[o];
                        if l != own {
                            *shared.entry(l).or_insert(0.0) += len;
                        }
                    }
                }
                let best = shared.iter().fold(None, |best: Option<(u32, f64)>, (&l, &len)| match best {
                    Some((_, b)) if b >= len => best,
                    _ => Some((l, len)),
                });
                if let Some((target, _)) = best {
                    for &t in &members[k] {
                        c.part_label[t] = target;
                    }
                    changed = true;
                    // components must be recomputed before the next merge
                    break;
                }
            }
            if !changed {
                for k in 0..count {
                    if members[k].len() < tau {
                        isolated_tris.push(members[k][0]);
                    }
                }
                break;
            }
        }
    }

    let old: Vec<u32> = c.labels();
    let remap: BTreeMap<u32, u32> = old.iter().enumerate().map(|(i, &l)| (l, i as u32 + 1)).collect();
    for l in c.part_label.iter_mut() {
        *l = remap[l];
    }
    let mut isolates: Vec<u32> = isolated_tris.iter().map(|&t| c.part_label[t]).collect();
    isolates.sort_unstable();
    isolates.dedup();
    c.meta.isolates = isolates;
    c.meta.tau_min = tau_min;
    c.meta.stabilized = true;
    c.group_by_label();
    c.refresh_totals();
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brep::build_brep;
    use crate::partition::{build_adjacency, extract_parts};
    use crate::synth;
    use crate::tessellate::tessellate_solid;
    use proptest::prelude::*;

    fn carrier_for(g: &crate::step::StepEntityGraph, spec: &TessellationSpec) -> (Carrier, Partition) {
        let s = build_brep(g).unwrap();
        let p = extract_parts(&build_adjacency(&s), 8.0);
        let t = tessellate_solid(&s, spec);
        (project_labels(&t.meshes, &p).unwrap(), p)
    }

    /// `w × h` grid of unit squares split into two triangles each;
    /// triangles `2(i + w j)` and `2(i + w j) + 1` fill square `(i, j)`.
    fn grid(w: usize, h: usize, label: impl Fn(usize, usize) -> u32) -> Carrier {
        let mut c = Carrier::default();
        for j in 0..=h {
            for i in 0..=w {
                c.vertices.push(Vec3::new(i as f64, j as f64, 0.0));
            }
        }
        let v = |i: usize, j: usize| (i + (w + 1) * j) as u32;
        for j in 0..h {
            for i in 0..w {
                let l = label(i, j);
                c.triangles.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
                c.triangles.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
                for _ in 0..2 {
                    c.part_label.push(l);
                    c.source_face.push(l - 1);
                    c.primitive.push(PrimitiveType::Plane);
                }
            }
        }
        c.group_by_label();
        c.refresh_totals();
        c
    }

    #[test]
    fn cube_faces_get_distinct_labels() {
        let (c, _) = carrier_for(&synth::cube(10.0), &TessellationSpec::t0());
        assert_eq!(c.labels(), vec![1, 2, 3, 4, 5, 6]);
        for t in 0..c.num_triangles() {
            assert_eq!(c.part_label[t], c.source_face[t] + 1);
            assert_eq!(c.primitive[t], PrimitiveType::Plane);
        }
        assert!(c.part_label.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(c.meta.num_parts, 6);
        assert!((c.meta.part_area.iter().sum::<f64>() - 600.0).abs() < 1e-9);
    }

    #[test]
    fn split_cylinder_lateral_faces_share_label() {
        let (c, p) = carrier_for(&synth::split_cylinder(5.0, 10.0), &TessellationSpec::t0());
        assert_eq!(p.num_parts(), 3);
        let label_of = |f: u32| c.part_label[c.source_face.iter().position(|&s| s == f).unwrap()];
        assert_eq!(label_of(0), label_of(1));
        assert_ne!(label_of(0), label_of(2));
        for t in 0..c.num_triangles() {
            assert_eq!(c.part_label[t], p.assignment[c.source_face[t] as usize]);
        }
    }

    #[test]
    fn empty_meshes_give_empty_carrier() {
        let p = Partition { assignment: vec![], parts: vec![] };
        let c = project_labels(&[], &p).unwrap();
        assert_eq!(c.num_triangles(), 0);
        assert_eq!(stabilize(&c, 20).num_triangles(), 0);
    }

    #[test]
    fn unknown_face_is_an_error() {
        let p = Partition { assignment: vec![], parts: vec![] };
        let m = FaceMesh { face: 3, vertices: vec![Vec3::ZERO, Vec3::X, Vec3::Y], triangles: vec![[0, 1, 2]] };
        assert_eq!(project_labels(&[m], &p), Err(CarrierError::UnknownFace(3)));
    }

    #[test]
    fn shared_edges_weld_across_faces() {
        let (c, _) = carrier_for(&synth::cube(10.0), &TessellationSpec::t2());
        let idx = EdgeIndex::new(&c.triangles);
        let mut cross = 0;
        idx.for_each_pair(|_, _, a, b| {
            if c.source_face[a] != c.source_face[b] {
                cross += 1;
            }
        });
        assert!(cross > 0);
    }

    #[test]
    fn large_parts_unchanged() {
        let (c, _) = carrier_for(&synth::cube(10.0), &TessellationSpec::t0());
        let s = stabilize(&c, 20);
        assert_eq!(s.part_label, c.part_label);
        assert_eq!(s.triangles, c.triangles);
        assert!(s.meta.isolates.is_empty());
    }

    #[test]
    fn tau_zero_is_identity() {
        let c = grid(4, 4, |i, _| if i < 2 { 1 } else { 2 });
        let s = stabilize(&c, 0);
        assert_eq!(s.part_label, c.part_label);
        assert_eq!(s.triangles, c.triangles);
    }

    #[test]
    fn five_triangle_sliver_absorbed_by_only_neighbour() {
        // part 1: left block, part 2: right block surrounding a sliver
        // labeled 3 of 5 triangles
        let mut c = grid(10, 4, |i, _| if i < 4 { 1 } else { 2 });
        // squares (6..8, 2) of the ungrouped layout; locate them by geometry
        let sq = |i: u32, j: u32| [i + 11 * j, i + 1 + 11 * j, i + 1 + 11 * (j + 1)];
        let sq2 = |i: u32, j: u32| [i + 11 * j, i + 1 + 11 * (j + 1), i + 11 * (j + 1)];
        let sliver: Vec<usize> = [sq(6, 2), sq2(6, 2), sq(7, 2), sq2(7, 2), sq(8, 2)]
            .iter()
            .map(|t| c.triangles.iter().position(|x| x == t).unwrap())
            .collect();
        for &t in &sliver {
            c.part_label[t] = 3;
        }
        c.group_by_label();
        let s = stabilize(&c, 20);
        assert_eq!(s.labels(), vec![1, 2]);
        // geometry untouched; regrouping keeps block 1 in front
        assert_eq!(s.num_triangles(), c.num_triangles());
        let mut before: Vec<[u32; 3]> = (0..c.num_triangles()).filter(|&t| c.part_label[t] == 3).map(|t| c.triangles[t]).collect();
        let mut after: Vec<[u32; 3]> = (0..s.num_triangles()).filter(|&t| s.part_label[t] == 2).map(|t| s.triangles[t]).collect();
        before.sort();
        after.sort();
        assert!(before.iter().all(|t| after.binary_search(t).is_ok()));
        assert_eq!(s.meta.part_triangles, vec![32, 48]);
    }

    #[test]
    fn longest_boundary_wins_and_ties_go_to_smaller_label() {
        // one-square sliver in the middle row touching 1 on the left edge and
        // 2 on the right edge: equal lengths, so label 1 wins
        let c = grid(21, 1, |i, _| match i {
            0..=9 => 1,
            10 => 3,
            _ => 2,
        });
        let s = stabilize(&c, 20);
        assert_eq!(s.labels(), vec![1, 2]);
        assert_eq!(s.meta.part_triangles, vec![22, 20]);
    }

    #[test]
    fn isolates_are_kept_and_flagged() {
        let c = grid(2, 1, |_, _| 1);
        let s = stabilize(&c, 20);
        assert_eq!(s.part_label, c.part_label);
        assert_eq!(s.meta.isolates, vec![1]);
    }

    #[test]
    fn labels_compacted_after_absorption() {
        let c = grid(12, 2, |i, _| match i {
            0..=5 => 1,
            6 => 4,
            _ => 7,
        });
        let s = stabilize(&c, 4);
        assert_eq!(s.labels(), vec![1, 2, 3]);
        let s = stabilize(&c, 20);
        assert_eq!(s.labels(), vec![1, 2]);
    }

    proptest! {
        #[test]
        fn stabilize_properties(
            w in 1usize..8,
            h in 1usize..6,
            labels in proptest::collection::vec(1u32..5, 48),
            tau in 0u32..12,
        ) {
            let c = grid(w, h, |i, j| labels[(i + w * j) % labels.len()]);
            let s = stabilize(&c, tau);
            prop_assert_eq!(stabilize(&s, tau).part_label.clone(), s.part_label.clone());
            prop_assert_eq!(s.num_triangles(), c.num_triangles());
            let mut tri_a = c.triangles.clone();
            let mut tri_b = s.triangles.clone();
            tri_a.sort();
            tri_b.sort();
            prop_assert_eq!(tri_a, tri_b);
            let k = s.labels();
            prop_assert!(k.len() <= c.labels().len());
            prop_assert_eq!(k, (1..=s.labels().len() as u32).collect::<Vec<_>>());

            // components at or above tau keep a consistent, injective label
            let idx = EdgeIndex::new(&c.triangles);
            let mut pairs = Vec::new();
            idx.for_each_pair(|_, _, a, b| pairs.push((a, b)));
            let (comp, count) = components(&c.part_label, &pairs);
            let new_of: BTreeMap<[u32; 3], u32> =
                (0..s.num_triangles()).map(|t| (s.triangles[t], s.part_label[t])).collect();
            let mut map: BTreeMap<u32, u32> = BTreeMap::new();
            for k in 0..count {
                let m: Vec<usize> = (0..c.num_triangles()).filter(|&t| comp[t] == k).collect();
                if m.len() < tau as usize {
                    continue;
                }
                let old = c.part_label[m[0]];
                let new = new_of[&c.triangles[m[0]]];
                prop_assert!(m.iter().all(|&t| new_of[&c.triangles[t]] == new));
                prop_assert_eq!(*map.entry(old).or_insert(new), new);
            }
            let mut vals: Vec<u32> = map.values().copied().collect();
            vals.sort();
            vals.dedup();
            prop_assert_eq!(vals.len(), map.len());

            // every small component left is an isolate
            let mut pairs_s = Vec::new();
            EdgeIndex::new(&s.triangles).for_each_pair(|_, _, a, b| pairs_s.push((a, b)));
            let (comp_s, count_s) = components(&s.part_label, &pairs_s);
            for k in 0..count_s {
                let m: Vec<usize> = (0..s.num_triangles()).filter(|&t| comp_s[t] == k).collect();
                if m.len() < tau as usize {
                    prop_assert!(s.meta.isolates.contains(&s.part_label[m[0]]));
                    let touches_other = pairs_s.iter().any(|&(a, b)| {
                        (comp_s[a] == k) != (comp_s[b] == k)
                    });
                    prop_assert!(!touches_other);
                }
            }
        }
    }
}
