//! Face-adjacency graph, dihedral merge predicate and flood-fill parts.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::brep::{eval_edge, BRepSolid, PrimitiveType, TopoEdge};
use crate::geom::{angle_between, to_degrees};

/// Default merge threshold in degrees.
pub const DEFAULT_THETA: f64 = 8.0;

/// Dihedral measurement at one point of an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dihedral {
    /// Degrees in `[0, 180]`; 180 when `failed`.
    pub phi: f64,
    /// Point inversion failed on one of the faces.
    pub failed: bool,
}

/// Angle between the oriented normals of the two faces of `edge` at the
/// curve point with fraction `s` along the edge.
///
/// The angle is computed as `atan2(|n_a × n_b|, n_a · n_b)`, the same
/// quantity as `acos(clamp(n_a · n_b))` but without its loss of precision
/// near 0° and 180°.
pub fn dihedral_at(solid: &BRepSolid, edge: &TopoEdge, s: f64) -> Dihedral {
    let faces = edge.faces();
    if faces.len() != 2 {
        return Dihedral { phi: 180.0, failed: true };
    }
    let p = eval_edge(edge, edge.param_at(s));
    let mut normals = [crate::geom::Vec3::ZERO; 2];
    for (k, &f) in faces.iter().enumerate() {
        match solid.surface_of(f).invert_point(p) {
            Ok((u, v)) => normals[k] = solid.face_normal(f, u, v).normal,
            Err(_) => return Dihedral { phi: 180.0, failed: true },
        }
    }
    Dihedral {
        phi: to_degrees(angle_between(normals[0], normals[1])).clamp(0.0, 180.0),
        failed: false,
    }
}

/// Dihedral at the edge's mid-parameter.
pub fn dihedral_angle(solid: &BRepSolid, edge: &TopoEdge) -> Dihedral {
    dihedral_at(solid, edge, 0.5)
}

/// Max minus min of the dihedral at 25%, 50% and 75% along the edge.
pub fn dihedral_spread(solid: &BRepSolid, edge: &TopoEdge) -> f64 {
    let v = [0.25, 0.5, 0.75].map(|s| dihedral_at(solid, edge, s).phi);
    v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyEdge {
    /// Topological edge id.
    pub edge: usize,
    pub face_a: usize,
    pub face_b: usize,
    pub phi: f64,
    pub same_primitive: bool,
    pub failed: bool,
}

impl AdjacencyEdge {
    /// The merge predicate: same primitive type and `φ ≤ θ`.
    pub fn mergeable(&self, theta: f64) -> bool {
        self.same_primitive && !self.failed && self.phi <= theta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyGraph {
    /// Primitive type per face id.
    pub primitives: Vec<PrimitiveType>,
    pub edges: Vec<AdjacencyEdge>,
    /// More than half of the graph edges have anti-parallel normals
    /// (φ ≥ 179°), a sign of inconsistent face orientation.
    pub orientation_conflict: bool,
}

impl AdjacencyGraph {
    pub fn num_faces(&self) -> usize {
        self.primitives.len()
    }

    pub fn same_primitive_phis(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.iter().filter(|e| e.same_primitive).map(|e| e.phi)
    }
}

/// One graph edge per topological edge shared by exactly two distinct
/// faces, in edge-id order.
pub fn build_adjacency(solid: &BRepSolid) -> AdjacencyGraph {
    let primitives: Vec<PrimitiveType> = solid.faces.iter().map(|f| f.primitive).collect();
    let mut edges = Vec::new();
    for e in &solid.edges {
        let faces = e.faces();
        if faces.len() != 2 || e.incidences.len() != 2 {
            continue;
        }
        let (a, b) = (faces[0].min(faces[1]), faces[0].max(faces[1]));
        let d = dihedral_angle(solid, e);
        edges.push(AdjacencyEdge {
            edge: e.id,
            face_a: a,
            face_b: b,
            phi: d.phi,
            same_primitive: primitives[a] == primitives[b],
            failed: d.failed,
        });
    }
    let anti = edges.iter().filter(|e| !e.failed && e.phi >= 179.0).count();
    AdjacencyGraph {
        primitives,
        orientation_conflict: !edges.is_empty() && 2 * anti > edges.len(),
        edges,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartSummary {
    pub id: u32,
    pub faces: usize,
    pub primitive: PrimitiveType,
}

/// Face → part assignment with contiguous ids `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub assignment: Vec<u32>,
    pub parts: Vec<PartSummary>,
}

impl Partition {
    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn part_of(&self, face: usize) -> u32 {
        self.assignment[face]
    }

    /// Every part of `self` lies inside a single part of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let mut image = vec![0u32; self.parts.len() + 1];
        for (f, &p) in self.assignment.iter().enumerate() {
            let q = coarser.assignment[f];
            if image[p as usize] == 0 {
                image[p as usize] = q;
            } else if image[p as usize] != q {
                return false;
            }
        }
        true
    }
}

/// Connected components under the merge predicate, by breadth-first flood
/// fill. Parts are numbered in ascending order of their smallest face id.
pub fn extract_parts(graph: &AdjacencyGraph, theta: f64) -> Partition {
    let n = graph.num_faces();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in graph.edges.iter().filter(|e| e.mergeable(theta)) {
        adj[e.face_a].push(e.face_b);
        adj[e.face_b].push(e.face_a);
    }
    let mut assignment = vec![0u32; n];
    let mut parts = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if assignment[start] != 0 {
            continue;
        }
        let id = parts.len() as u32 + 1;
        assignment[start] = id;
        queue.push_back(start);
        let mut count = 0;
        while let Some(f) = queue.pop_front() {
            count += 1;
            for &g in &adj[f] {
                if assignment[g] == 0 {
                    assignment[g] = id;
                    queue.push_back(g);
                }
            }
        }
        parts.push(PartSummary { id, faces: count, primitive: graph.primitives[start] });
    }
    Partition { assignment, parts }
}

/// Diagnostic dump, one line per graph edge:
/// `edge_id,face_a,face_b,type_a,type_b,phi_deg`.
pub fn adjacency_csv(graph: &AdjacencyGraph) -> String {
    let mut s = String::from("edge_id,face_a,face_b,type_a,type_b,phi_deg\n");
    for e in &graph.edges {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.edge, e.face_a, e.face_b, graph.primitives[e.face_a], graph.primitives[e.face_b], e.phi
        ));
    }
    s
}
