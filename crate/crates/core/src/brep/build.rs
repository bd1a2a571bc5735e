use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::bspline::{expand_knots, BSplineCurve, BSplineSurface};
use super::{
    classify_record, BRepSolid, BrepDiagnostics, BrepError, CurveGeom, Face, Frame, Loop, OrientedEdge, Surface,
    SurfaceGeom, TopoEdge,
};
use crate::geom::{Aabb, RigidMotion, Vec3, FRAC_PI_2, PI};
use crate::step::{EntityRecord, StepEntityGraph, Value};

type Result<T> = core::result::Result<T, BrepError>;

fn unresolvable(id: u64, what: impl Into<String>) -> BrepError {
    BrepError::Unresolvable { id, what: what.into() }
}

struct Ctx<'a> {
    g: &'a StepEntityGraph,
    /// Multiplier from file plane-angle units to radians.
    angle: f64,
}

fn arg(args: &[Value], i: usize, id: u64) -> Result<&Value> {
    args.get(i).ok_or_else(|| unresolvable(id, format!("missing argument {i}")))
}

fn ref_arg(args: &[Value], i: usize, id: u64) -> Result<u64> {
    arg(args, i, id)?
        .as_ref_id()
        .ok_or_else(|| unresolvable(id, format!("argument {i} is not a reference")))
}

fn f64_arg(args: &[Value], i: usize, id: u64) -> Result<f64> {
    arg(args, i, id)?
        .as_f64()
        .ok_or_else(|| unresolvable(id, format!("argument {i} is not a number")))
}

fn bool_arg(args: &[Value], i: usize, id: u64) -> Result<bool> {
    Ok(arg(args, i, id)?.as_bool().unwrap_or(true))
}

fn ref_list(v: &Value, id: u64) -> Result<Vec<u64>> {
    v.as_list()
        .ok_or_else(|| unresolvable(id, "expected a list"))?
        .iter()
        .map(|x| x.as_ref_id().ok_or_else(|| unresolvable(id, "expected references")))
        .collect()
}

fn i64_list(v: &Value, id: u64) -> Result<Vec<i64>> {
    v.as_list()
        .ok_or_else(|| unresolvable(id, "expected a list"))?
        .iter()
        .map(|x| x.as_i64().ok_or_else(|| unresolvable(id, "expected integers")))
        .collect()
}

fn f64_list(v: &Value, id: u64) -> Result<Vec<f64>> {
    v.as_f64_list().ok_or_else(|| unresolvable(id, "expected numbers"))
}

/// Plane-angle unit factor declared in the file: degrees if a conversion
/// based unit named DEGREE is combined with PLANE_ANGLE_UNIT, else radians.
fn angle_factor(g: &StepEntityGraph) -> f64 {
    for rec in g.entities.values() {
        if rec.has("PLANE_ANGLE_UNIT") {
            if let Some(p) = rec.part("CONVERSION_BASED_UNIT") {
                let name = p.args.first().and_then(Value::as_str).unwrap_or("");
                if name.to_ascii_uppercase().contains("DEGREE") {
                    return PI / 180.0;
                }
            }
        }
    }
    1.0
}

impl<'a> Ctx<'a> {
    fn rec(&self, id: u64) -> Result<&'a EntityRecord> {
        self.g.get(id).ok_or_else(|| unresolvable(id, "missing entity"))
    }

    fn simple(&self, id: u64, expect: &[&str]) -> Result<(&'a str, &'a [Value])> {
        let r = self.rec(id)?;
        let p = &r.parts[0];
        if r.complex || !expect.contains(&p.keyword.as_str()) {
            return Err(unresolvable(id, format!("expected {}", expect.join("/"))));
        }
        Ok((p.keyword.as_str(), &p.args))
    }

    fn point(&self, id: u64) -> Result<Vec3> {
        let (_, a) = self.simple(id, &["CARTESIAN_POINT"])?;
        let c = f64_list(arg(a, 1, id)?, id)?;
        Vec3::from_slice(&c).ok_or_else(|| unresolvable(id, "bad coordinates"))
    }

    fn direction(&self, id: u64) -> Result<Vec3> {
        let (_, a) = self.simple(id, &["DIRECTION"])?;
        let c = f64_list(arg(a, 1, id)?, id)?;
        Vec3::from_slice(&c).ok_or_else(|| unresolvable(id, "bad direction"))
    }

    fn opt_direction(&self, v: &Value) -> Result<Option<Vec3>> {
        match v {
            Value::Unset => Ok(None),
            Value::Ref(r) => self.direction(*r).map(Some),
            _ => Ok(None),
        }
    }

    fn vector_dir(&self, id: u64) -> Result<Vec3> {
        let (kw, a) = self.simple(id, &["VECTOR", "DIRECTION"])?;
        let d = if kw == "DIRECTION" {
            self.direction(id)?
        } else {
            self.direction(ref_arg(a, 1, id)?)?
        };
        d.normalized().ok_or_else(|| unresolvable(id, "zero vector"))
    }

    fn placement(&self, id: u64) -> Result<Frame> {
        let (_, a) = self.simple(id, &["AXIS2_PLACEMENT_3D"])?;
        let origin = self.point(ref_arg(a, 1, id)?)?;
        let axis = match a.get(2) {
            Some(v) => self.opt_direction(v)?,
            None => None,
        }
        .unwrap_or(Vec3::Z);
        let axis_n = axis.normalized().ok_or_else(|| unresolvable(id, "zero axis"))?;
        let reference = match a.get(3) {
            Some(v) => self.opt_direction(v)?,
            None => None,
        }
        .unwrap_or(if axis_n.cross(Vec3::X).norm() > 1e-9 { Vec3::X } else { Vec3::Z });
        Frame::from_axis_ref(origin, axis, reference)
            .ok_or_else(|| BrepError::DegenerateSurface { id, what: "axis parallel to reference direction".into() })
    }

    fn curve(&self, id: u64) -> Result<CurveGeom> {
        let r = self.rec(id)?;
        if r.complex || r.parts[0].keyword == "B_SPLINE_CURVE_WITH_KNOTS" {
            return self.bspline_curve(id, r);
        }
        let a = &r.parts[0].args;
        match r.parts[0].keyword.as_str() {
            "LINE" => {
                let origin = self.point(ref_arg(a, 1, id)?)?;
                let dir = self.vector_dir(ref_arg(a, 2, id)?)?;
                Ok(CurveGeom::Line { origin, dir })
            }
            "CIRCLE" => {
                let frame = self.placement(ref_arg(a, 1, id)?)?;
                let radius = f64_arg(a, 2, id)?;
                if !(radius > 0.0) {
                    return Err(BrepError::DegenerateSurface { id, what: "circle radius <= 0".into() });
                }
                Ok(CurveGeom::Circle { frame, radius })
            }
            "ELLIPSE" => {
                let frame = self.placement(ref_arg(a, 1, id)?)?;
                let semi1 = f64_arg(a, 2, id)?;
                let semi2 = f64_arg(a, 3, id)?;
                if !(semi1 > 0.0 && semi2 > 0.0) {
                    return Err(BrepError::DegenerateSurface { id, what: "ellipse axis <= 0".into() });
                }
                Ok(CurveGeom::Ellipse { frame, semi1, semi2 })
            }
            "SURFACE_CURVE" | "SEAM_CURVE" | "INTERSECTION_CURVE" | "TRIMMED_CURVE" => self.curve(ref_arg(a, 1, id)?),
            "POLYLINE" => {
                let pts = ref_list(arg(a, 1, id)?, id)?
                    .into_iter()
                    .map(|p| self.point(p))
                    .collect::<Result<Vec<_>>>()?;
                if pts.len() < 2 {
                    return Err(unresolvable(id, "polyline needs two points"));
                }
                Ok(CurveGeom::Polyline(pts))
            }
            kw => Err(unresolvable(id, format!("unsupported curve {kw}"))),
        }
    }

    fn bspline_curve(&self, id: u64, r: &EntityRecord) -> Result<CurveGeom> {
        let (degree, ctrl, mults, knots, weights) = if r.complex {
            let base = r.part("B_SPLINE_CURVE").ok_or_else(|| unresolvable(id, "unsupported complex curve"))?;
            let wk = r.part("B_SPLINE_CURVE_WITH_KNOTS").ok_or_else(|| unresolvable(id, "curve without knots"))?;
            let w = match r.part("RATIONAL_B_SPLINE_CURVE") {
                Some(p) => Some(f64_list(arg(&p.args, 0, id)?, id)?),
                None => None,
            };
            (
                arg(&base.args, 0, id)?,
                arg(&base.args, 1, id)?,
                arg(&wk.args, 0, id)?,
                arg(&wk.args, 1, id)?,
                w,
            )
        } else {
            let a = &r.parts[0].args;
            (arg(a, 1, id)?, arg(a, 2, id)?, arg(a, 6, id)?, arg(a, 7, id)?, None)
        };
        let degree = degree.as_i64().filter(|d| *d > 0).ok_or_else(|| unresolvable(id, "bad degree"))? as usize;
        let ctrl = ref_list(ctrl, id)?
            .into_iter()
            .map(|p| self.point(p))
            .collect::<Result<Vec<_>>>()?;
        let knots = expand_knots(&i64_list(mults, id)?, &f64_list(knots, id)?).ok_or_else(|| unresolvable(id, "bad knots"))?;
        BSplineCurve::new(degree, knots, ctrl, weights)
            .map(CurveGeom::BSpline)
            .ok_or_else(|| unresolvable(id, "inconsistent b-spline curve"))
    }

    fn surface(&self, id: u64) -> Result<SurfaceGeom> {
        let r = self.rec(id)?;
        if r.complex {
            if r.has("B_SPLINE_SURFACE") && r.has("B_SPLINE_SURFACE_WITH_KNOTS") {
                return self.bspline_surface(id, r);
            }
            return Ok(SurfaceGeom::Unsupported);
        }
        let a = &r.parts[0].args;
        let positive = |v: f64, what: &str| {
            if v > 0.0 {
                Ok(v)
            } else {
                Err(BrepError::DegenerateSurface { id, what: format!("{what} <= 0") })
            }
        };
        match r.parts[0].keyword.as_str() {
            "PLANE" => Ok(SurfaceGeom::Plane(self.placement(ref_arg(a, 1, id)?)?)),
            "CYLINDRICAL_SURFACE" => Ok(SurfaceGeom::Cylinder {
                frame: self.placement(ref_arg(a, 1, id)?)?,
                radius: positive(f64_arg(a, 2, id)?, "radius")?,
            }),
            "CONICAL_SURFACE" => {
                let frame = self.placement(ref_arg(a, 1, id)?)?;
                let radius = f64_arg(a, 2, id)?;
                let semi_angle = f64_arg(a, 3, id)? * self.angle;
                if !(radius >= 0.0) {
                    return Err(BrepError::DegenerateSurface { id, what: "cone radius < 0".into() });
                }
                if !(semi_angle > 0.0 && semi_angle < FRAC_PI_2) {
                    return Err(BrepError::DegenerateSurface { id, what: "cone semi-angle outside (0, pi/2)".into() });
                }
                Ok(SurfaceGeom::Cone { frame, radius, semi_angle })
            }
            "SPHERICAL_SURFACE" => Ok(SurfaceGeom::Sphere {
                frame: self.placement(ref_arg(a, 1, id)?)?,
                radius: positive(f64_arg(a, 2, id)?, "radius")?,
            }),
            "TOROIDAL_SURFACE" | "DEGENERATE_TOROIDAL_SURFACE" => Ok(SurfaceGeom::Torus {
                frame: self.placement(ref_arg(a, 1, id)?)?,
                major: positive(f64_arg(a, 2, id)?, "major radius")?,
                minor: positive(f64_arg(a, 3, id)?, "minor radius")?,
            }),
            "SURFACE_OF_LINEAR_EXTRUSION" => Ok(SurfaceGeom::Extrusion {
                curve: Box::new(self.curve(ref_arg(a, 1, id)?)?),
                dir: self.vector_dir(ref_arg(a, 2, id)?)?,
            }),
            "SURFACE_OF_REVOLUTION" => {
                let curve = self.curve(ref_arg(a, 1, id)?)?;
                let ax = ref_arg(a, 2, id)?;
                let (_, aa) = self.simple(ax, &["AXIS1_PLACEMENT"])?;
                let origin = self.point(ref_arg(aa, 1, ax)?)?;
                let axis = match aa.get(2) {
                    Some(v) => self.opt_direction(v)?,
                    None => None,
                }
                .unwrap_or(Vec3::Z)
                .normalized()
                .ok_or_else(|| unresolvable(ax, "zero axis"))?;
                Ok(SurfaceGeom::Revolution { curve: Box::new(curve), origin, axis })
            }
            "B_SPLINE_SURFACE_WITH_KNOTS" => self.bspline_surface(id, r),
            _ => Ok(SurfaceGeom::Unsupported),
        }
    }

    fn bspline_surface(&self, id: u64, r: &EntityRecord) -> Result<SurfaceGeom> {
        let (udeg, vdeg, ctrl, umults, vmults, uknots, vknots, weights) = if r.complex {
            let base = r.part("B_SPLINE_SURFACE").ok_or_else(|| unresolvable(id, "complex surface"))?;
            let wk = r.part("B_SPLINE_SURFACE_WITH_KNOTS").ok_or_else(|| unresolvable(id, "surface without knots"))?;
            let w = match r.part("RATIONAL_B_SPLINE_SURFACE") {
                Some(p) => Some(
                    arg(&p.args, 0, id)?
                        .as_list()
                        .ok_or_else(|| unresolvable(id, "weights"))?
                        .iter()
                        .map(|row| f64_list(row, id))
                        .collect::<Result<Vec<_>>>()?,
                ),
                None => None,
            };
            let (b, k) = (&base.args, &wk.args);
            (
                arg(b, 0, id)?,
                arg(b, 1, id)?,
                arg(b, 2, id)?,
                arg(k, 0, id)?,
                arg(k, 1, id)?,
                arg(k, 2, id)?,
                arg(k, 3, id)?,
                w,
            )
        } else {
            let a = &r.parts[0].args;
            (
                arg(a, 1, id)?,
                arg(a, 2, id)?,
                arg(a, 3, id)?,
                arg(a, 8, id)?,
                arg(a, 9, id)?,
                arg(a, 10, id)?,
                arg(a, 11, id)?,
                None,
            )
        };
        let deg = |v: &Value| v.as_i64().filter(|d| *d > 0).map(|d| d as usize).ok_or_else(|| unresolvable(id, "bad degree"));
        let (udeg, vdeg) = (deg(udeg)?, deg(vdeg)?);
        let ctrl = ctrl
            .as_list()
            .ok_or_else(|| unresolvable(id, "control net"))?
            .iter()
            .map(|row| ref_list(row, id)?.into_iter().map(|p| self.point(p)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let uk = expand_knots(&i64_list(umults, id)?, &f64_list(uknots, id)?).ok_or_else(|| unresolvable(id, "u knots"))?;
        let vk = expand_knots(&i64_list(vmults, id)?, &f64_list(vknots, id)?).ok_or_else(|| unresolvable(id, "v knots"))?;
        BSplineSurface::new(udeg, vdeg, uk, vk, ctrl, weights)
            .map(SurfaceGeom::BSpline)
            .ok_or_else(|| unresolvable(id, "inconsistent b-spline surface"))
    }
}

struct RawEdge {
    step_id: u64,
    start_vertex: u64,
    end_vertex: u64,
    start: Vec3,
    end: Vec3,
    curve: Option<CurveGeom>,
    same_sense: bool,
    incidences: Vec<(usize, bool)>,
}

/// Reconstruct the B-Rep from a parsed entity graph.
///
/// Shells are taken from MANIFOLD_SOLID_BREP, BREP_WITH_VOIDS and
/// SHELL_BASED_SURFACE_MODEL in ascending entity id; when none exist, bare
/// CLOSED_SHELL / OPEN_SHELL entities are used. Face ids are assigned in
/// traversal order. Faces sharing an EDGE_CURVE instance share one edge.
pub fn build_brep(graph: &StepEntityGraph) -> Result<BRepSolid> {
    let ctx = Ctx { g: graph, angle: angle_factor(graph) };
    let mut shell_refs: Vec<(u64, bool)> = Vec::new();
    for (&id, rec) in &graph.entities {
        if rec.complex {
            continue;
        }
        let a = &rec.parts[0].args;
        match rec.parts[0].keyword.as_str() {
            "MANIFOLD_SOLID_BREP" => shell_refs.push((ref_arg(a, 1, id)?, true)),
            "BREP_WITH_VOIDS" => {
                shell_refs.push((ref_arg(a, 1, id)?, true));
                for v in ref_list(arg(a, 2, id)?, id)? {
                    shell_refs.push((v, true));
                }
            }
            "SHELL_BASED_SURFACE_MODEL" => {
                for s in ref_list(arg(a, 1, id)?, id)? {
                    shell_refs.push((s, true));
                }
            }
            _ => {}
        }
    }
    if shell_refs.is_empty() {
        for (&id, rec) in &graph.entities {
            if !rec.complex && matches!(rec.parts[0].keyword.as_str(), "CLOSED_SHELL" | "OPEN_SHELL") {
                shell_refs.push((id, true));
            }
        }
    }
    if shell_refs.is_empty() {
        return Err(BrepError::NoShell);
    }

    let mut diagnostics = BrepDiagnostics::default();
    let mut faces: Vec<Face> = Vec::new();
    let mut shells: Vec<Vec<usize>> = Vec::new();
    let mut surfaces: Vec<Surface> = Vec::new();
    let mut surface_index: BTreeMap<u64, usize> = BTreeMap::new();
    let mut raw_edges: Vec<RawEdge> = Vec::new();
    let mut edge_index: BTreeMap<u64, usize> = BTreeMap::new();
    let mut seen_faces: BTreeMap<u64, usize> = BTreeMap::new();

    for (shell_id, sense) in shell_refs {
        let (kw, a) = ctx.simple(shell_id, &["CLOSED_SHELL", "OPEN_SHELL", "ORIENTED_CLOSED_SHELL", "ORIENTED_OPEN_SHELL"])?;
        let (face_refs, sense) = if kw.starts_with("ORIENTED_") {
            let inner = ref_arg(a, 2, shell_id)?;
            let (_, ia) = ctx.simple(inner, &["CLOSED_SHELL", "OPEN_SHELL"])?;
            (ref_list(arg(ia, 1, inner)?, inner)?, sense == bool_arg(a, 3, shell_id)?)
        } else {
            (ref_list(arg(a, 1, shell_id)?, shell_id)?, sense)
        };
        let shell_no = shells.len();
        let mut members = Vec::new();
        for fid in face_refs {
            if seen_faces.contains_key(&fid) {
                continue;
            }
            let (_, fa) = ctx.simple(fid, &["ADVANCED_FACE", "FACE_SURFACE"])?;
            let sid = ref_arg(fa, 2, fid)?;
            let surface = match surface_index.get(&sid) {
                Some(&s) => s,
                None => {
                    let geom = ctx.surface(sid)?;
                    let primitive = classify_record(ctx.rec(sid)?);
                    surfaces.push(Surface { step_id: sid, primitive, geom });
                    surface_index.insert(sid, surfaces.len() - 1);
                    surfaces.len() - 1
                }
            };
            let face_no = faces.len();
            let mut loops = Vec::new();
            for bid in ref_list(arg(fa, 1, fid)?, fid)? {
                let (bkw, ba) = ctx.simple(bid, &["FACE_BOUND", "FACE_OUTER_BOUND"])?;
                let orientation = bool_arg(ba, 2, bid)?;
                let lid = ref_arg(ba, 1, bid)?;
                let lrec = ctx.rec(lid)?;
                let mut lp = Loop { edges: Vec::new(), outer: bkw == "FACE_OUTER_BOUND", vertex: None };
                match lrec.keyword().as_ref() {
                    "EDGE_LOOP" => {
                        for oe in ref_list(arg(lrec.args(), 1, lid)?, lid)? {
                            let (eid, fwd) = resolve_oriented(&ctx, oe)?;
                            let idx = match edge_index.get(&eid) {
                                Some(&i) => i,
                                None => {
                                    raw_edges.push(raw_edge(&ctx, eid, &mut diagnostics)?);
                                    edge_index.insert(eid, raw_edges.len() - 1);
                                    raw_edges.len() - 1
                                }
                            };
                            lp.edges.push(OrientedEdge { edge: idx, forward: fwd });
                        }
                    }
                    "VERTEX_LOOP" => {
                        let vid = ref_arg(lrec.args(), 1, lid)?;
                        let (_, va) = ctx.simple(vid, &["VERTEX_POINT"])?;
                        lp.vertex = Some(ctx.point(ref_arg(va, 1, vid)?)?);
                    }
                    other => {
                        diagnostics.skipped.push((lid, format!("unsupported loop {other}")));
                        continue;
                    }
                }
                if !orientation {
                    lp.edges.reverse();
                    for e in &mut lp.edges {
                        e.forward = !e.forward;
                    }
                }
                for e in &lp.edges {
                    raw_edges[e.edge].incidences.push((face_no, e.forward));
                }
                loops.push(lp);
            }
            let same_sense = bool_arg(fa, 3, fid)? == sense;
            faces.push(Face {
                id: face_no,
                step_id: fid,
                surface,
                same_sense,
                loops,
                primitive: surfaces[surface].primitive,
                shell: shell_no,
            });
            seen_faces.insert(fid, face_no);
            members.push(face_no);
        }
        shells.push(members);
    }

    // provisional extent from vertices, refined by curve samples below
    let mut bbox = Aabb::from_points(raw_edges.iter().flat_map(|e| [e.start, e.end]));
    for f in &faces {
        for l in &f.loops {
            if let Some(v) = l.vertex {
                bbox.insert(v);
            }
        }
    }
    let tol0 = 1e-6 * bbox.diagonal();
    let mut edges: Vec<TopoEdge> = raw_edges
        .into_iter()
        .enumerate()
        .map(|(i, r)| finish_edge(i, r, tol0))
        .collect();
    for e in &edges {
        for k in 0..=8 {
            bbox.insert(e.curve.eval(e.t0 + (e.t1 - e.t0) * k as f64 / 8.0));
        }
    }
    let tol_vertex = 1e-6 * bbox.diagonal();
    for e in &mut edges {
        let a = e.curve.eval(e.param_at(0.0));
        let b = e.curve.eval(e.param_at(1.0));
        if a.dist(e.start) > tol_vertex || b.dist(e.end) > tol_vertex {
            diagnostics.vertex_mismatch.push(e.id);
        }
        match e.faces().len() {
            1 => diagnostics.boundary.push(e.id),
            n if n > 2 => diagnostics.non_manifold.push(e.id),
            _ => {}
        }
    }

    Ok(BRepSolid { faces, edges, surfaces, shells, bbox, diagnostics })
}

/// Follow ORIENTED_EDGE chains down to an EDGE_CURVE, composing senses.
fn resolve_oriented(ctx: &Ctx<'_>, mut id: u64) -> Result<(u64, bool)> {
    let mut forward = true;
    for _ in 0..16 {
        let rec = ctx.rec(id)?;
        match rec.keyword().as_ref() {
            "ORIENTED_EDGE" => {
                let a = rec.args();
                forward = forward == bool_arg(a, 4, id)?;
                id = ref_arg(a, 3, id)?;
            }
            "EDGE_CURVE" => return Ok((id, forward)),
            other => return Err(unresolvable(id, format!("expected edge, found {other}"))),
        }
    }
    Err(unresolvable(id, "oriented edge chain too deep"))
}

fn raw_edge(ctx: &Ctx<'_>, id: u64, diag: &mut BrepDiagnostics) -> Result<RawEdge> {
    let (_, a) = ctx.simple(id, &["EDGE_CURVE"])?;
    let vertex = |vid: u64| -> Result<Vec3> {
        let (_, va) = ctx.simple(vid, &["VERTEX_POINT"])?;
        ctx.point(ref_arg(va, 1, vid)?)
    };
    let (sv, ev) = (ref_arg(a, 1, id)?, ref_arg(a, 2, id)?);
    let cid = ref_arg(a, 3, id)?;
    let curve = match ctx.curve(cid) {
        Ok(c) => Some(c),
        Err(BrepError::DegenerateSurface { id, what }) => return Err(BrepError::DegenerateSurface { id, what }),
        Err(e) => {
            diag.skipped.push((cid, e.to_string()));
            None
        }
    };
    Ok(RawEdge {
        step_id: id,
        start_vertex: sv,
        end_vertex: ev,
        start: vertex(sv)?,
        end: vertex(ev)?,
        curve,
        same_sense: bool_arg(a, 4, id)?,
        incidences: Vec::new(),
    })
}

fn finish_edge(id: usize, r: RawEdge, tol: f64) -> TopoEdge {
    let closed = r.start_vertex == r.end_vertex || r.start.dist(r.end) <= tol;
    let Some(curve) = r.curve else {
        return TopoEdge {
            id,
            step_id: r.step_id,
            curve: CurveGeom::Polyline(vec![r.start, r.end]),
            t0: 0.0,
            t1: 1.0,
            curve_forward: true,
            start: r.start,
            end: r.end,
            closed,
            incidences: r.incidences,
        };
    };
    let ts = curve.closest_param(r.start);
    let te = curve.closest_param(r.end);
    let (mut t0, mut t1, mut fwd) = (ts, te, r.same_sense);
    if !r.same_sense {
        core::mem::swap(&mut t0, &mut t1);
    }
    match (curve.period(), curve.domain()) {
        (Some(p), _) => {
            if closed {
                t1 = t0 + p;
            } else {
                while t1 <= t0 {
                    t1 += p;
                }
            }
        }
        (None, Some((a, b))) if closed => {
            t0 = a;
            t1 = b;
        }
        _ => {
            if t1 < t0 {
                core::mem::swap(&mut t0, &mut t1);
                fwd = !fwd;
            }
        }
    }
    TopoEdge {
        id,
        step_id: r.step_id,
        curve,
        t0,
        t1,
        curve_forward: fwd,
        start: r.start,
        end: r.end,
        closed,
        incidences: r.incidences,
    }
}

/// Copy of `graph` with every 3D CARTESIAN_POINT and DIRECTION mapped by
/// `m`. Scalars (radii, angles) are motion invariant and left alone.
pub fn transform_graph(graph: &StepEntityGraph, m: &RigidMotion) -> StepEntityGraph {
    let mut out = graph.clone();
    for rec in out.entities.values_mut() {
        for part in &mut rec.parts {
            let is_point = part.keyword == "CARTESIAN_POINT";
            if !is_point && part.keyword != "DIRECTION" {
                continue;
            }
            let Some(Value::List(items)) = part.args.get_mut(1) else { continue };
            let Some(c) = Value::List(items.clone()).as_f64_list() else { continue };
            if c.len() != 3 {
                continue;
            }
            let v = Vec3::new(c[0], c[1], c[2]);
            let w = if is_point { m.apply_point(v) } else { m.apply_vector(v) };
            *items = vec![Value::Real(w.x), Value::Real(w.y), Value::Real(w.z)];
        }
    }
    out
}
