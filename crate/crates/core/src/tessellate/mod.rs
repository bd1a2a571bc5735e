//! Per-face triangulation of a B-rep.
//!
//! Every face is meshed independently in its own parameter domain: loop
//! samples are inverted to `(u, v)`, unwrapped across seams, closed at poles
//! when a loop winds around a periodic direction, and fed with a Steiner grid
//! to a constrained Delaunay triangulation. Edge samples are shared, so
//! neighbouring faces agree exactly on their common boundary points.

pub mod edges;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::brep::{BRepSolid, Face, Loop, SurfaceGeom};
use crate::geom::{acos, angle_between, ceil, round, to_radians, Vec3};

pub use edges::{edge_params, edge_points};

/// Named tolerance set. Tolerances are fractions of the model's bounding
/// box diagonal except `angle_tol_deg`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TessellationSpec {
    pub name: String,
    pub chord_tol: f64,
    pub angle_tol_deg: f64,
    pub max_edge: Option<f64>,
}

impl TessellationSpec {
    pub fn t0() -> Self {
        Self::named("T0", 0.005, 20.0, Some(0.05))
    }

    pub fn t1() -> Self {
        Self::named("T1", 0.002, 12.0, Some(0.035))
    }

    pub fn t2() -> Self {
        Self::named("T2", 0.02, 35.0, Some(0.1))
    }

    /// Chordal and angular bounds only; planar faces get no interior points.
    pub fn custom(chord_tol: f64, angle_tol_deg: f64) -> Self {
        Self::named("custom", chord_tol, angle_tol_deg, None)
    }

    fn named(name: &str, chord_tol: f64, angle_tol_deg: f64, max_edge: Option<f64>) -> Self {
        TessellationSpec { name: name.into(), chord_tol, angle_tol_deg, max_edge }
    }

    /// `T0`, `T1`, `T2` (case-insensitive).
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "T0" => Some(Self::t0()),
            "T1" => Some(Self::t1()),
            "T2" => Some(Self::t2()),
            _ => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.chord_tol > 0.0
            && self.chord_tol.is_finite()
            && self.angle_tol_deg > 0.0
            && self.angle_tol_deg < 90.0
            && self.max_edge.is_none_or(|m| m > 0.0 && m.is_finite())
    }

    /// Absolute tolerances for a model of bounding box diagonal `diag`.
    pub fn tolerances(&self, diag: f64) -> Tolerances {
        let diag = if diag > 0.0 { diag } else { 1.0 };
        Tolerances {
            chord: self.chord_tol * diag,
            angle: to_radians(self.angle_tol_deg),
            max_edge: self.max_edge.map(|m| m * diag),
            degenerate_area: 1e-14 * diag * diag,
        }
    }
}

/// Absolute tolerances in model units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub chord: f64,
    /// Radians.
    pub angle: f64,
    pub max_edge: Option<f64>,
    pub degenerate_area: f64,
}

/// Triangles of one source face. Winding follows the face's outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMesh {
    pub face: usize,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl FaceMesh {
    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| tri_area(self.triangle(t))).sum()
    }
}

pub fn tri_area([a, b, c]: [Vec3; 3]) -> f64 {
    0.5 * (b - a).cross(c - a).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    UnsupportedSurface,
    InversionFailed,
    SelfIntersecting,
    /// Loop winds around a periodic direction with no pole to close it.
    OpenPeriodic,
    UnsupportedTopology,
    NoBoundary,
    Empty,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::UnsupportedSurface => "unsupported surface",
            SkipReason::InversionFailed => "loop point inversion failed",
            SkipReason::SelfIntersecting => "self-intersecting trim loops",
            SkipReason::OpenPeriodic => "periodic loop without a closing pole",
            SkipReason::UnsupportedTopology => "unsupported loop topology",
            SkipReason::NoBoundary => "face has no boundary loop",
            SkipReason::Empty => "no triangles produced",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceSkip {
    pub face: usize,
    pub step_id: u64,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tessellation {
    /// Ascending by face id.
    pub meshes: Vec<FaceMesh>,
    pub skipped: Vec<FaceSkip>,
}

impl Tessellation {
    pub fn num_triangles(&self) -> usize {
        self.meshes.iter().map(|m| m.triangles.len()).sum()
    }

    pub fn num_vertices(&self) -> usize {
        self.meshes.iter().map(|m| m.vertices.len()).sum()
    }

    pub fn area(&self) -> f64 {
        self.meshes.iter().map(FaceMesh::area).sum()
    }
}

/// Lazily sampled edge polylines, `start → end`.
struct EdgeCache<'a> {
    solid: &'a BRepSolid,
    tol: Tolerances,
    pts: Vec<Option<Vec<Vec3>>>,
}

impl<'a> EdgeCache<'a> {
    fn new(solid: &'a BRepSolid, tol: Tolerances) -> Self {
        EdgeCache { solid, tol, pts: vec![None; solid.edges.len()] }
    }

    fn get(&mut self, e: usize) -> &[Vec3] {
        if self.pts[e].is_none() {
            let edge = &self.solid.edges[e];
            let params = edge_params(edge, &self.tol);
            self.pts[e] = Some(edge_points(edge, &params));
        }
        self.pts[e].as_deref().unwrap()
    }
}

pub fn tessellate_solid(solid: &BRepSolid, spec: &TessellationSpec) -> Tessellation {
    let tol = spec.tolerances(solid.diagonal());
    let mut cache = EdgeCache::new(solid, tol);
    let mut out = Tessellation::default();
    for face in &solid.faces {
        match mesh_face(solid, face, &tol, &mut cache) {
            Ok(m) => out.meshes.push(m),
            Err(reason) => out.skipped.push(FaceSkip { face: face.id, step_id: face.step_id, reason }),
        }
    }
    out
}

pub fn tessellate_face(solid: &BRepSolid, face: usize, spec: &TessellationSpec) -> Result<FaceMesh, SkipReason> {
    let tol = spec.tolerances(solid.diagonal());
    let mut cache = EdgeCache::new(solid, tol);
    mesh_face(solid, &solid.faces[face], &tol, &mut cache)
}

/// Boundary point in parameter space tied to a face-local 3D point.
#[derive(Debug, Clone, Copy)]
struct RPt {
    uv: [f64; 2],
    id: usize,
}

struct Ring {
    pts: Vec<RPt>,
    wind: [i64; 2],
}

struct FaceCtx<'a> {
    surf: &'a SurfaceGeom,
    periods: [Option<f64>; 2],
    diag: f64,
    p3: Vec<Vec3>,
}

impl FaceCtx<'_> {
    fn push(&mut self, p: Vec3) -> usize {
        self.p3.push(p);
        self.p3.len() - 1
    }

    fn point(&self, uv: [f64; 2]) -> Vec3 {
        self.surf.eval(uv[0], uv[1]).point
    }
}

fn mesh_face(solid: &BRepSolid, face: &Face, tol: &Tolerances, cache: &mut EdgeCache) -> Result<FaceMesh, SkipReason> {
    let surf = solid.surface_of(face.id);
    if matches!(surf, SurfaceGeom::Unsupported) {
        return Err(SkipReason::UnsupportedSurface);
    }
    let diag = if solid.diagonal() > 0.0 { solid.diagonal() } else { 1.0 };
    let mut ctx = FaceCtx { surf, periods: [surf.u_period(), surf.v_period()], diag, p3: Vec::new() };

    let mut rings = Vec::new();
    for lp in &face.loops {
        if let Some(mut r) = loop_ring(&mut ctx, lp, cache)? {
            if !face.same_sense {
                r.pts.reverse();
                r.wind = [-r.wind[0], -r.wind[1]];
            }
            rings.push(r);
        }
    }
    if rings.is_empty() {
        return Err(SkipReason::NoBoundary);
    }

    let plan = plan_region(&ctx, &rings)?;
    let (scale, spacing) = {
        let mut bb = uv_bounds(rings.iter().flat_map(|r| r.pts.iter().map(|p| p.uv)));
        if let Plan::Pole { v, .. } = plan {
            bb[2] = bb[2].min(v);
            bb[3] = bb[3].max(v);
        }
        metric(&ctx, bb, tol)
    };
    let polys = assemble(&mut ctx, rings, plan, scale, spacing)?;

    // scaled parameter space: roughly isometric to arc length
    let sc = |uv: [f64; 2]| [uv[0] * scale[0], uv[1] * scale[1]];
    let scaled: Vec<Vec<[f64; 2]>> = polys.iter().map(|p| p.iter().map(|q| sc(q.uv)).collect()).collect();

    let mut pts: Vec<([f64; 2], usize)> = Vec::new();
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut owner: Vec<usize> = Vec::new();
    let mut insert = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>, xy: [f64; 2], id: usize| {
        // the triangulator rejects tiny nonzero magnitudes
        let flush = |x: f64| if x.abs() < 1e-30 { 0.0 } else { x };
        let h = cdt.insert(Point2::new(flush(xy[0]), flush(xy[1]))).map_err(|_| SkipReason::InversionFailed)?;
        if h.index() >= owner.len() {
            owner.resize(h.index() + 1, usize::MAX);
        }
        if owner[h.index()] == usize::MAX {
            owner[h.index()] = pts.len();
            pts.push((xy, id));
        }
        Ok::<_, SkipReason>(h)
    };

    for (poly, xy) in polys.iter().zip(&scaled) {
        let handles: Vec<_> = poly
            .iter()
            .zip(xy)
            .map(|(p, q)| insert(&mut cdt, *q, p.id))
            .collect::<Result<_, _>>()?;
        for k in 0..handles.len() {
            let (a, b) = (handles[k], handles[(k + 1) % handles.len()]);
            if a == b || cdt.exists_constraint(a, b) {
                continue;
            }
            if cdt.try_add_constraint(a, b).is_empty() {
                return Err(SkipReason::SelfIntersecting);
            }
        }
    }

    for xy in steiner_grid(&scaled, spacing) {
        let uv = [xy[0] / scale[0], xy[1] / scale[1]];
        let id = ctx.push(ctx.point(uv));
        insert(&mut cdt, xy, id)?;
    }

    let mut vmap: BTreeMap<[u64; 3], u32> = BTreeMap::new();
    let mut mesh = FaceMesh { face: face.id, vertices: Vec::new(), triangles: Vec::new() };
    for f in cdt.inner_faces() {
        let vs = f.vertices();
        let xy: [[f64; 2]; 3] = core::array::from_fn(|i| {
            let p = vs[i].position();
            [p.x, p.y]
        });
        let c = [(xy[0][0] + xy[1][0] + xy[2][0]) / 3.0, (xy[0][1] + xy[1][1] + xy[2][1]) / 3.0];
        if !inside(&scaled, c) {
            continue;
        }
        let ids: [usize; 3] = core::array::from_fn(|i| pts[owner[vs[i].fix().index()]].1);
        let corners = ids.map(|i| ctx.p3[i]);
        if tri_area(corners) <= tol.degenerate_area {
            continue;
        }
        let mut tri = [0u32; 3];
        for i in 0..3 {
            let next = mesh.vertices.len() as u32;
            tri[i] = *vmap.entry(corners[i].bits()).or_insert_with(|| {
                mesh.vertices.push(corners[i]);
                next
            });
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            continue;
        }
        if !face.same_sense {
            tri.swap(1, 2);
        }
        mesh.triangles.push(tri);
    }
    if mesh.triangles.is_empty() {
        return Err(SkipReason::Empty);
    }
    Ok(mesh)
}

/// Samples one loop and maps it to unwrapped parameter space. Points where a
/// parameter is undefined (poles, apexes) are split in two, one per
/// neighbouring parameter value.
fn loop_ring(ctx: &mut FaceCtx, lp: &Loop, cache: &mut EdgeCache) -> Result<Option<Ring>, SkipReason> {
    let mut pts3: Vec<Vec3> = Vec::new();
    for oe in &lp.edges {
        let e = cache.get(oe.edge);
        if oe.forward {
            pts3.extend_from_slice(&e[..e.len() - 1]);
        } else {
            pts3.extend(e[1..].iter().rev());
        }
    }
    if pts3.len() < 2 {
        return Ok(None);
    }
    let n = pts3.len();
    let mut c = [vec![0.0; n], vec![0.0; n]];
    let mut deg = [vec![false; n], vec![false; n]];
    let eps = 1e-9 * ctx.diag;
    for (k, p) in pts3.iter().enumerate() {
        let (u, v) = ctx.surf.invert_point(*p).map_err(|_| SkipReason::InversionFailed)?;
        let d = ctx.surf.derivs(u, v);
        c[0][k] = u;
        c[1][k] = v;
        deg[0][k] = d.du.norm() <= eps;
        deg[1][k] = !deg[0][k] && d.dv.norm() <= eps;
    }
    let mut wind = [0i64; 2];
    for a in 0..2 {
        if deg[a].iter().all(|&d| d) {
            return Ok(None);
        }
        wind[a] = unwrap_axis(&mut c[a], &deg[a], ctx.periods[a]);
    }
    let ids: Vec<usize> = pts3.iter().map(|p| ctx.push(*p)).collect();
    let mut out: Vec<RPt> = Vec::with_capacity(n + 4);
    for k in 0..n {
        let a = if deg[0][k] {
            0
        } else if deg[1][k] {
            1
        } else {
            out.push(RPt { uv: [c[0][k], c[1][k]], id: ids[k] });
            continue;
        };
        let shift = wind[a] as f64 * ctx.periods[a].unwrap_or(0.0);
        let prev = (1..n)
            .map(|s| (k + n - s) % n)
            .find(|&i| !deg[a][i])
            .map(|i| if i > k { c[a][i] - shift } else { c[a][i] })
            .unwrap();
        let next = (1..n)
            .map(|s| (k + s) % n)
            .find(|&i| !deg[a][i])
            .map(|i| if i < k { c[a][i] + shift } else { c[a][i] })
            .unwrap();
        let other = c[1 - a][k];
        let mk = |x: f64| {
            let mut uv = [0.0; 2];
            uv[a] = x;
            uv[1 - a] = other;
            RPt { uv, id: ids[k] }
        };
        out.push(mk(prev));
        if (next - prev).abs() > 1e-12 * (1.0 + prev.abs()) {
            out.push(mk(next));
        }
    }
    out.dedup_by(|b, a| a.uv == b.uv);
    while out.len() > 1 && out[0].uv == out[out.len() - 1].uv {
        out.pop();
    }
    if out.len() < 2 {
        return Ok(None);
    }
    Ok(Some(Ring { pts: out, wind }))
}

/// Makes consecutive non-skipped values continuous modulo `period` and
/// returns the loop's winding number in that direction.
fn unwrap_axis(c: &mut [f64], skip: &[bool], period: Option<f64>) -> i64 {
    let Some(p) = period else { return 0 };
    let mut first = None;
    let mut prev: Option<f64> = None;
    for k in 0..c.len() {
        if skip[k] {
            continue;
        }
        match prev {
            Some(q) => c[k] += p * round((q - c[k]) / p),
            None => first = Some(k),
        }
        prev = Some(c[k]);
    }
    match (first, prev) {
        (Some(f), Some(l)) => round((l - c[f]) / p) as i64,
        _ => 0,
    }
}

#[derive(Debug, Clone, Copy)]
enum Plan {
    Plain,
    /// Ring `ring` winds once around `u`; close it at the pole row `v`.
    Pole { ring: usize, v: f64 },
    /// Rings `a` (winding +1) and `b` (winding -1) around `axis` bound an
    /// annulus; cut it open along a seam.
    Join { axis: usize, a: usize, b: usize },
}

fn plan_region(ctx: &FaceCtx, rings: &[Ring]) -> Result<Plan, SkipReason> {
    let winding: Vec<usize> = (0..rings.len()).filter(|&i| rings[i].wind != [0, 0]).collect();
    for &i in &winding {
        let w = rings[i].wind;
        if (w[0] != 0 && w[1] != 0) || w[0].abs() > 1 || w[1].abs() > 1 {
            return Err(SkipReason::UnsupportedTopology);
        }
    }
    match winding.as_slice() {
        [] => Ok(Plan::Plain),
        &[i] => {
            let r = &rings[i];
            if r.wind[0] == 0 {
                return Err(SkipReason::UnsupportedTopology);
            }
            let v_ref = r.pts.iter().map(|p| p.uv[1]).sum::<f64>() / r.pts.len() as f64;
            let v = ctx.surf.pole_v(v_ref, r.wind[0] > 0, ctx.diag).ok_or(SkipReason::OpenPeriodic)?;
            Ok(Plan::Pole { ring: i, v })
        }
        &[i, j] => {
            let axis = if rings[i].wind[0] != 0 { 0 } else { 1 };
            let (wi, wj) = (rings[i].wind[axis], rings[j].wind[axis]);
            if wj != -wi || wi == 0 {
                return Err(SkipReason::UnsupportedTopology);
            }
            let (a, b) = if wi > 0 { (i, j) } else { (j, i) };
            Ok(Plan::Join { axis, a, b })
        }
        _ => Err(SkipReason::UnsupportedTopology),
    }
}

/// `[umin, umax, vmin, vmax]`.
fn uv_bounds(it: impl Iterator<Item = [f64; 2]>) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for p in it {
        b[0] = b[0].min(p[0]);
        b[1] = b[1].max(p[0]);
        b[2] = b[2].min(p[1]);
        b[3] = b[3].max(p[1]);
    }
    b
}

/// Parameter scale factors (mean speed along `u`, `v`) and target 3D
/// spacing along each direction from the sampled surface curvature.
fn metric(ctx: &FaceCtx, bb: [f64; 4], tol: &Tolerances) -> ([f64; 2], [f64; 2]) {
    const N: usize = 9;
    let at = |i: usize, j: usize| {
        let u = bb[0] + (bb[1] - bb[0]) * i as f64 / (N - 1) as f64;
        let v = bb[2] + (bb[3] - bb[2]) * j as f64 / (N - 1) as f64;
        (u, v)
    };
    let mut speed = [0.0f64; 2];
    let mut top = [0.0f64; 2];
    let mut count = [0usize; 2];
    let mut grid = Vec::with_capacity(N * N);
    for i in 0..N {
        for j in 0..N {
            let (u, v) = at(i, j);
            let d = ctx.surf.derivs(u, v);
            for (a, dd) in [d.du, d.dv].into_iter().enumerate() {
                let s = dd.norm();
                if s > 1e-9 * ctx.diag && s.is_finite() {
                    speed[a] += s;
                    top[a] = top[a].max(s);
                    count[a] += 1;
                }
            }
            grid.push(ctx.surf.eval(u, v));
        }
    }
    let scale = [0, 1].map(|a| if count[a] > 0 { speed[a] / count[a] as f64 } else { 1.0 });

    let mut kappa = [0.0f64; 2];
    for i in 0..N {
        for j in 0..N {
            let p = grid[i * N + j];
            for (a, (ii, jj)) in [(i + 1, j), (i, j + 1)].into_iter().enumerate() {
                if ii >= N || jj >= N {
                    continue;
                }
                let q = grid[ii * N + jj];
                let d = p.point.dist(q.point);
                if p.singular || q.singular || d <= 1e-9 * ctx.diag {
                    continue;
                }
                kappa[a] = kappa[a].max(angle_between(p.normal, q.normal) / d);
            }
        }
    }
    // grid steps are laid out in scaled coordinates; shrink them where the
    // surface moves faster than its mean speed
    let spacing = [0, 1].map(|a| {
        let h = spacing_for_curvature(kappa[a], tol);
        if top[a] > 0.0 { h * scale[a] / top[a] } else { h }
    });
    (scale, spacing)
}

fn spacing_for_curvature(kappa: f64, tol: &Tolerances) -> f64 {
    let mut h = tol.max_edge.unwrap_or(f64::INFINITY);
    if kappa > 1e-12 {
        let r = 1.0 / kappa;
        h = h.min(tol.angle * r);
        if tol.chord < r {
            h = h.min(2.0 * r * acos(1.0 - tol.chord / r));
        }
    }
    h
}

/// Builds the closed polygons (outer first) for the triangulation.
fn assemble(
    ctx: &mut FaceCtx,
    mut rings: Vec<Ring>,
    plan: Plan,
    scale: [f64; 2],
    spacing: [f64; 2],
) -> Result<Vec<Vec<RPt>>, SkipReason> {
    let h = spacing[0].min(spacing[1]);
    let cut_segments = |from: [f64; 2], to: [f64; 2]| {
        let len = libm::hypot((to[0] - from[0]) * scale[0], (to[1] - from[1]) * scale[1]);
        if h.is_finite() && h > 0.0 {
            (ceil(len / h) as usize).clamp(1, 10_000)
        } else {
            1
        }
    };

    let (outer, used): (Vec<RPt>, Vec<usize>) = match plan {
        Plan::Plain => {
            let i = (0..rings.len())
                .max_by(|&a, &b| signed_area(&rings[a].pts).abs().total_cmp(&signed_area(&rings[b].pts).abs()))
                .unwrap();
            (core::mem::take(&mut rings[i].pts), vec![i])
        }
        Plan::Pole { ring, v: vp } => {
            let r = core::mem::take(&mut rings[ring].pts);
            let p = ctx.periods[0].unwrap();
            let w = rings[ring].wind[0] as f64;
            let a0 = r[0];
            let u_end = a0.uv[0] + w * p;
            let n = cut_segments(a0.uv, [a0.uv[0], vp]);
            let cut: Vec<(f64, usize)> = (1..n)
                .map(|k| {
                    let v = a0.uv[1] + (vp - a0.uv[1]) * k as f64 / n as f64;
                    (v, ctx.push(ctx.point([a0.uv[0], v])))
                })
                .collect();
            let pole = ctx.push(ctx.point([a0.uv[0], vp]));
            let m = if spacing[0].is_finite() {
                (ceil(p * scale[0] / spacing[0]) as usize).clamp(4, r.len().max(4))
            } else {
                4
            };
            let mut poly = r;
            poly.push(RPt { uv: [u_end, a0.uv[1]], id: a0.id });
            poly.extend(cut.iter().map(|&(v, id)| RPt { uv: [u_end, v], id }));
            poly.extend((0..=m).map(|k| RPt { uv: [u_end + (a0.uv[0] - u_end) * k as f64 / m as f64, vp], id: pole }));
            poly.extend(cut.iter().rev().map(|&(v, id)| RPt { uv: [a0.uv[0], v], id }));
            (poly, vec![ring])
        }
        Plan::Join { axis, a, b } => {
            let p = ctx.periods[axis].unwrap();
            let ra = core::mem::take(&mut rings[a].pts);
            let rb = core::mem::take(&mut rings[b].pts);
            let a0 = ra[0];
            let sym = |x: f64| x - p * round(x / p);
            let j = (0..rb.len())
                .min_by(|&x, &y| sym(rb[x].uv[axis] - a0.uv[axis]).abs().total_cmp(&sym(rb[y].uv[axis] - a0.uv[axis]).abs()))
                .unwrap();
            let target = a0.uv[axis] + p;
            let shift = p * round((target - rb[j].uv[axis]) / p);
            let moved = |q: RPt, s: f64| {
                let mut q = q;
                q.uv[axis] += s;
                q
            };
            let a_end = moved(a0, p);
            let bj = moved(rb[j], shift);
            let n = cut_segments(a_end.uv, bj.uv);
            // cut points evaluated once and shared by both sides of the seam
            let cut: Vec<([f64; 2], usize)> = (1..n)
                .map(|k| {
                    let t = k as f64 / n as f64;
                    let uv = [a_end.uv[0] + (bj.uv[0] - a_end.uv[0]) * t, a_end.uv[1] + (bj.uv[1] - a_end.uv[1]) * t];
                    let mut base = uv;
                    base[axis] -= p;
                    (uv, ctx.push(ctx.point(base)))
                })
                .collect();
            let mut poly = ra;
            poly.push(a_end);
            poly.extend(cut.iter().map(|&(uv, id)| RPt { uv, id }));
            poly.extend(rb[j..].iter().map(|&q| moved(q, shift)));
            poly.extend(rb[..j].iter().map(|&q| moved(q, shift - p)));
            poly.push(moved(rb[j], shift - p));
            poly.extend(cut.iter().rev().map(|&(uv, id)| {
                let mut uv = uv;
                uv[axis] -= p;
                RPt { uv, id }
            }));
            (poly, vec![a, b])
        }
    };

    let ob = uv_bounds(outer.iter().map(|q| q.uv));
    let center = [0.5 * (ob[0] + ob[1]), 0.5 * (ob[2] + ob[3])];
    let mut polys = vec![outer];
    for (i, r) in rings.into_iter().enumerate() {
        if used.contains(&i) || r.pts.len() < 3 {
            continue;
        }
        let mut pts = r.pts;
        let cb = uv_bounds(pts.iter().map(|q| q.uv));
        for a in 0..2 {
            if let Some(p) = ctx.periods[a] {
                let c = 0.5 * (cb[2 * a] + cb[2 * a + 1]);
                let s = p * round((center[a] - c) / p);
                pts.iter_mut().for_each(|q| q.uv[a] += s);
            }
        }
        polys.push(pts);
    }
    if polys[0].len() < 3 {
        return Err(SkipReason::NoBoundary);
    }
    Ok(polys)
}

fn signed_area(pts: &[RPt]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i].uv, pts[(i + 1) % n].uv);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        * 0.5
}

/// Even-odd containment against all rings.
fn inside(polys: &[Vec<[f64; 2]>], p: [f64; 2]) -> bool {
    let mut c = false;
    for poly in polys {
        let n = poly.len();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    c = !c;
                }
            }
        }
    }
    c
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    libm::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)
}

/// Interior grid points at the target spacing, kept clear of the boundary.
fn steiner_grid(polys: &[Vec<[f64; 2]>], spacing: [f64; 2]) -> Vec<[f64; 2]> {
    if !spacing[0].is_finite() || !spacing[1].is_finite() {
        return Vec::new();
    }
    let b = {
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for p in &polys[0] {
            b[0] = b[0].min(p[0]);
            b[1] = b[1].max(p[0]);
            b[2] = b[2].min(p[1]);
            b[3] = b[3].max(p[1]);
        }
        b
    };
    let (w, hgt) = (b[1] - b[0], b[3] - b[2]);
    let mut nx = ceil(w / spacing[0]).max(1.0) as usize;
    let mut ny = ceil(hgt / spacing[1]).max(1.0) as usize;
    while nx * ny > 250_000 {
        nx = nx.div_ceil(2);
        ny = ny.div_ceil(2);
    }
    let clear = 0.5 * (w / nx as f64).min(hgt / ny as f64);
    let mut out = Vec::new();
    for i in 1..nx {
        for j in 1..ny {
            let p = [b[0] + w * i as f64 / nx as f64, b[2] + hgt * j as f64 / ny as f64];
            if !inside(polys, p) {
                continue;
            }
            let near = polys.iter().any(|poly| {
                let n = poly.len();
                (0..n).any(|k| seg_dist(p, poly[k], poly[(k + 1) % n]) < clear)
            });
            if !near {
                out.push(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
