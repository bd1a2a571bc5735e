//! Programmatic STEP fixtures with hand-checked topology, plus a seeded
//! random corpus built from them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::brep::transform_graph;
use crate::geom::{cos, sin, RigidMotion, Vec3, PI, TAU};
use crate::step::{EntityPart, StepBuilder, StepEntityGraph, Value};

/// Handle to an EDGE_CURVE under construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeH(usize);

struct EdgeRec {
    id: u64,
    start: usize,
    end: usize,
    /// Points along the edge from start to end (for loop orientation).
    samples: Vec<Vec3>,
}

/// Thin layer over [`StepBuilder`] that emits AP214-style B-Rep entities.
pub struct Synth {
    b: StepBuilder,
    verts: Vec<(Vec3, u64)>,
    edges: Vec<EdgeRec>,
    faces: Vec<u64>,
}

fn s(x: &str) -> Value {
    Value::Str(x.into())
}

fn real_list(v: Vec3) -> Value {
    Value::List(vec![Value::Real(v.x), Value::Real(v.y), Value::Real(v.z)])
}

fn refs(ids: &[u64]) -> Value {
    Value::List(ids.iter().map(|&i| Value::Ref(i)).collect())
}

fn flag(b: bool) -> Value {
    Value::Enum(if b { "T" } else { "F" }.into())
}

impl Synth {
    pub fn new(name: &str) -> Self {
        Synth { b: StepBuilder::new(name), verts: Vec::new(), edges: Vec::new(), faces: Vec::new() }
    }

    pub fn point(&mut self, p: Vec3) -> u64 {
        self.b.add("CARTESIAN_POINT", vec![s(""), real_list(p)])
    }

    pub fn direction(&mut self, d: Vec3) -> u64 {
        self.b.add("DIRECTION", vec![s(""), real_list(d)])
    }

    pub fn axis2(&mut self, origin: Vec3, z: Vec3, x: Vec3) -> u64 {
        let o = self.point(origin);
        let zd = self.direction(z);
        let xd = self.direction(x);
        self.b.add("AXIS2_PLACEMENT_3D", vec![s(""), Value::Ref(o), Value::Ref(zd), Value::Ref(xd)])
    }

    /// Vertex index; identical positions share one VERTEX_POINT.
    pub fn vertex(&mut self, p: Vec3) -> usize {
        if let Some(i) = self.verts.iter().position(|(q, _)| q.bits() == p.bits()) {
            return i;
        }
        let pt = self.point(p);
        let id = self.b.add("VERTEX_POINT", vec![s(""), Value::Ref(pt)]);
        self.verts.push((p, id));
        self.verts.len() - 1
    }

    pub fn vertex_pos(&self, v: usize) -> Vec3 {
        self.verts[v].0
    }

    fn edge_curve(&mut self, a: usize, b: usize, curve: u64, samples: Vec<Vec3>) -> EdgeH {
        let (va, vb) = (self.verts[a].1, self.verts[b].1);
        let id = self.b.add("EDGE_CURVE", vec![s(""), Value::Ref(va), Value::Ref(vb), Value::Ref(curve), flag(true)]);
        self.edges.push(EdgeRec { id, start: a, end: b, samples });
        EdgeH(self.edges.len() - 1)
    }

    pub fn line(&mut self, a: usize, b: usize) -> EdgeH {
        let (pa, pb) = (self.verts[a].0, self.verts[b].0);
        let o = self.point(pa);
        let d = self.direction((pb - pa).normalized().expect("distinct line endpoints"));
        let v = self.b.add("VECTOR", vec![s(""), Value::Ref(d), Value::Real(1.0)]);
        let c = self.b.add("LINE", vec![s(""), Value::Ref(o), Value::Ref(v)]);
        self.edge_curve(a, b, c, vec![pa, pb])
    }

    /// Arc from `a` to `b` running counter-clockwise about `axis`.
    pub fn arc(&mut self, a: usize, b: usize, center: Vec3, axis: Vec3) -> EdgeH {
        let (pa, pb) = (self.verts[a].0, self.verts[b].0);
        let x = (pa - center).normalized().expect("arc start off center");
        let z = axis.normalized().expect("arc axis");
        let y = z.cross(x);
        let r = (pa - center).norm();
        let d = pb - center;
        let mut sweep = crate::geom::atan2(d.dot(y), d.dot(x));
        if sweep <= 0.0 {
            sweep += TAU;
        }
        let samples = (0..=16)
            .map(|k| {
                let t = sweep * k as f64 / 16.0;
                center + (x * cos(t) + y * sin(t)) * r
            })
            .collect();
        let ax = self.axis2(center, z, x);
        let c = self.b.add("CIRCLE", vec![s(""), Value::Ref(ax), Value::Real(r)]);
        self.edge_curve(a, b, c, samples)
    }

    /// Closed circle starting and ending at vertex `v`.
    pub fn circle(&mut self, v: usize, center: Vec3, axis: Vec3) -> EdgeH {
        self.arc(v, v, center, axis)
    }

    /// Ellipse edge closed at vertex `v`, which must sit at the end of the
    /// major axis `x`.
    pub fn ellipse(&mut self, v: usize, center: Vec3, axis: Vec3, x: Vec3, semi1: f64, semi2: f64) -> EdgeH {
        let z = axis.normalized().expect("ellipse axis");
        let x = x.normalized().expect("ellipse x");
        let y = z.cross(x);
        let samples = (0..=32)
            .map(|k| {
                let t = TAU * k as f64 / 32.0;
                center + x * (semi1 * cos(t)) + y * (semi2 * sin(t))
            })
            .collect();
        let ax = self.axis2(center, z, x);
        let c = self.b.add("ELLIPSE", vec![s(""), Value::Ref(ax), Value::Real(semi1), Value::Real(semi2)]);
        self.edge_curve(v, v, c, samples)
    }

    /// B-spline curve edge through the given control points (clamped,
    /// uniform interior knots).
    pub fn bspline_edge(&mut self, a: usize, b: usize, degree: usize, ctrl: &[Vec3], knots: &[f64], mults: &[i64]) -> EdgeH {
        let pts: Vec<u64> = ctrl.iter().map(|&p| self.point(p)).collect();
        let c = self.b.add(
            "B_SPLINE_CURVE_WITH_KNOTS",
            vec![
                s(""),
                Value::Integer(degree as i64),
                refs(&pts),
                Value::Enum("UNSPECIFIED".into()),
                flag(false),
                flag(false),
                Value::List(mults.iter().map(|&m| Value::Integer(m)).collect()),
                Value::List(knots.iter().map(|&k| Value::Real(k)).collect()),
                Value::Enum("UNSPECIFIED".into()),
            ],
        );
        let full = crate::brep::bspline::expand_knots(mults, knots).expect("knots");
        let curve = crate::brep::bspline::BSplineCurve::new(degree, full, ctrl.to_vec(), None).expect("curve");
        let (t0, t1) = curve.domain();
        let samples = (0..=16).map(|k| curve.eval(t0 + (t1 - t0) * k as f64 / 16.0)).collect();
        self.edge_curve(a, b, c, samples)
    }

    pub fn plane(&mut self, origin: Vec3, normal: Vec3, x: Vec3) -> u64 {
        let ax = self.axis2(origin, normal, x);
        self.b.add("PLANE", vec![s(""), Value::Ref(ax)])
    }

    pub fn cylinder(&mut self, origin: Vec3, axis: Vec3, x: Vec3, radius: f64) -> u64 {
        let ax = self.axis2(origin, axis, x);
        self.b.add("CYLINDRICAL_SURFACE", vec![s(""), Value::Ref(ax), Value::Real(radius)])
    }

    pub fn cone(&mut self, origin: Vec3, axis: Vec3, x: Vec3, radius: f64, semi_angle: f64) -> u64 {
        let ax = self.axis2(origin, axis, x);
        self.b.add("CONICAL_SURFACE", vec![s(""), Value::Ref(ax), Value::Real(radius), Value::Real(semi_angle)])
    }

    pub fn sphere(&mut self, origin: Vec3, axis: Vec3, x: Vec3, radius: f64) -> u64 {
        let ax = self.axis2(origin, axis, x);
        self.b.add("SPHERICAL_SURFACE", vec![s(""), Value::Ref(ax), Value::Real(radius)])
    }

    pub fn torus(&mut self, origin: Vec3, axis: Vec3, x: Vec3, major: f64, minor: f64) -> u64 {
        let ax = self.axis2(origin, axis, x);
        self.b.add("TOROIDAL_SURFACE", vec![s(""), Value::Ref(ax), Value::Real(major), Value::Real(minor)])
    }

    /// Oriented edges for a loop; `forward` per entry.
    fn oriented(&mut self, edges: &[(EdgeH, bool)]) -> Vec<u64> {
        edges
            .iter()
            .map(|&(EdgeH(e), f)| {
                let id = self.edges[e].id;
                self.b.add("ORIENTED_EDGE", vec![s(""), Value::Derived, Value::Derived, Value::Ref(id), flag(f)])
            })
            .collect()
    }

    /// Face with explicitly oriented loops; the first loop is the outer bound.
    pub fn face(&mut self, surface: u64, same_sense: bool, loops: &[Vec<(EdgeH, bool)>]) -> u64 {
        let mut bounds = Vec::new();
        for (i, lp) in loops.iter().enumerate() {
            let oes = self.oriented(lp);
            let l = self.b.add("EDGE_LOOP", vec![s(""), refs(&oes)]);
            let kw = if i == 0 { "FACE_OUTER_BOUND" } else { "FACE_BOUND" };
            bounds.push(self.b.add(kw, vec![s(""), Value::Ref(l), flag(true)]));
        }
        let f = self.b.add("ADVANCED_FACE", vec![s(""), refs(&bounds), Value::Ref(surface), flag(same_sense)]);
        self.faces.push(f);
        f
    }

    /// Face with a single-vertex loop in addition to edge loops (apex).
    pub fn face_with_vertex_loop(&mut self, surface: u64, same_sense: bool, loops: &[Vec<(EdgeH, bool)>], apex: usize) -> u64 {
        let mut bounds = Vec::new();
        for (i, lp) in loops.iter().enumerate() {
            let oes = self.oriented(lp);
            let l = self.b.add("EDGE_LOOP", vec![s(""), refs(&oes)]);
            let kw = if i == 0 { "FACE_OUTER_BOUND" } else { "FACE_BOUND" };
            bounds.push(self.b.add(kw, vec![s(""), Value::Ref(l), flag(true)]));
        }
        let vl = self.b.add("VERTEX_LOOP", vec![s(""), Value::Ref(self.verts[apex].1)]);
        bounds.push(self.b.add("FACE_BOUND", vec![s(""), Value::Ref(vl), flag(true)]));
        let f = self.b.add("ADVANCED_FACE", vec![s(""), refs(&bounds), Value::Ref(surface), flag(same_sense)]);
        self.faces.push(f);
        f
    }

    /// Chain edges head to tail, choosing each edge's direction so its
    /// start meets the previous end. The first edge runs forward.
    fn chain(&self, edges: &[EdgeH]) -> Vec<(EdgeH, bool)> {
        let mut out = Vec::with_capacity(edges.len());
        let mut at = None;
        for (i, &e) in edges.iter().enumerate() {
            let r = &self.edges[e.0];
            let fwd = match at {
                None => {
                    // pick the direction whose end meets the next edge
                    match edges.get(i + 1) {
                        Some(n) => {
                            let nr = &self.edges[n.0];
                            r.end == nr.start || r.end == nr.end
                        }
                        None => true,
                    }
                }
                Some(v) => r.start == v,
            };
            at = Some(if fwd { r.end } else { r.start });
            out.push((e, fwd));
        }
        out
    }

    fn loop_polygon(&self, lp: &[(EdgeH, bool)]) -> Vec<Vec3> {
        let mut pts = Vec::new();
        for &(EdgeH(e), fwd) in lp {
            let smp = &self.edges[e].samples;
            if fwd {
                pts.extend_from_slice(&smp[..smp.len() - 1]);
            } else {
                pts.extend(smp.iter().rev().take(smp.len() - 1));
            }
        }
        pts
    }

    /// Planar face with outward normal `normal`. Loops are given as edge
    /// chains; the first is the outer boundary. Traversal directions are
    /// chosen so the outer loop runs counter-clockwise about `normal` and
    /// holes clockwise.
    pub fn planar_face(&mut self, normal: Vec3, loops: &[Vec<EdgeH>]) -> u64 {
        let n = normal.normalized().expect("normal");
        let mut oriented = Vec::new();
        for (i, lp) in loops.iter().enumerate() {
            let mut c = self.chain(lp);
            let poly = self.loop_polygon(&c);
            let mut area = Vec3::ZERO;
            for k in 0..poly.len() {
                area += poly[k].cross(poly[(k + 1) % poly.len()]);
            }
            let ccw = area.dot(n) > 0.0;
            if ccw != (i == 0) {
                c.reverse();
                for e in &mut c {
                    e.1 = !e.1;
                }
            }
            oriented.push(c);
        }
        let o = self.vertex_pos(self.edges[loops[0][0].0].start);
        let x = n.any_perpendicular();
        let p = self.plane(o, n, x);
        self.face(p, true, &oriented)
    }

    /// Closed solid: CLOSED_SHELL wrapped in MANIFOLD_SOLID_BREP.
    pub fn finish_solid(mut self) -> StepEntityGraph {
        let faces = self.faces.clone();
        let sh = self.b.add("CLOSED_SHELL", vec![s(""), refs(&faces)]);
        self.b.add("MANIFOLD_SOLID_BREP", vec![s(""), Value::Ref(sh)]);
        self.units();
        self.b.finish()
    }

    /// Open sheet: OPEN_SHELL in a SHELL_BASED_SURFACE_MODEL.
    pub fn finish_sheet(mut self) -> StepEntityGraph {
        let faces = self.faces.clone();
        let sh = self.b.add("OPEN_SHELL", vec![s(""), refs(&faces)]);
        self.b.add("SHELL_BASED_SURFACE_MODEL", vec![s(""), refs(&[sh])]);
        self.units();
        self.b.finish()
    }

    fn units(&mut self) {
        self.b.add_complex(vec![
            EntityPart { keyword: "NAMED_UNIT".into(), args: vec![Value::Derived] },
            EntityPart { keyword: "PLANE_ANGLE_UNIT".into(), args: vec![] },
            EntityPart { keyword: "SI_UNIT".into(), args: vec![Value::Unset, Value::Enum("RADIAN".into())] },
        ]);
    }
}

/// Axis-aligned box `[0,dx]×[0,dy]×[0,dz]`: 6 PLANE faces, 12 line edges,
/// 8 vertices.
pub fn box_solid(dx: f64, dy: f64, dz: f64) -> StepEntityGraph {
    let mut sy = Synth::new("box");
    let v: Vec<usize> = (0..8)
        .map(|i| {
            let p = Vec3::new(
                if i & 1 != 0 { dx } else { 0.0 },
                if i & 2 != 0 { dy } else { 0.0 },
                if i & 4 != 0 { dz } else { 0.0 },
            );
            sy.vertex(p)
        })
        .collect();
    // edges along x, y, z
    let ex: Vec<EdgeH> = [(0, 1), (2, 3), (4, 5), (6, 7)].iter().map(|&(a, b)| sy.line(v[a], v[b])).collect();
    let ey: Vec<EdgeH> = [(0, 2), (1, 3), (4, 6), (5, 7)].iter().map(|&(a, b)| sy.line(v[a], v[b])).collect();
    let ez: Vec<EdgeH> = [(0, 4), (1, 5), (2, 6), (3, 7)].iter().map(|&(a, b)| sy.line(v[a], v[b])).collect();
    sy.planar_face(-Vec3::Z, &[vec![ex[0], ey[1], ex[1], ey[0]]]);
    sy.planar_face(Vec3::Z, &[vec![ex[2], ey[3], ex[3], ey[2]]]);
    sy.planar_face(-Vec3::Y, &[vec![ex[0], ez[1], ex[2], ez[0]]]);
    sy.planar_face(Vec3::Y, &[vec![ex[1], ez[3], ex[3], ez[2]]]);
    sy.planar_face(-Vec3::X, &[vec![ey[0], ez[2], ey[2], ez[0]]]);
    sy.planar_face(Vec3::X, &[vec![ey[1], ez[3], ey[3], ez[1]]]);
    sy.finish_solid()
}

pub fn cube(size: f64) -> StepEntityGraph {
    box_solid(size, size, size)
}

/// Box whose top is two coplanar faces split at `x = dx/2`: 7 faces,
/// 10 vertices, 15 edges.
pub fn split_top_box(dx: f64, dy: f64, dz: f64) -> StepEntityGraph {
    let mut sy = Synth::new("split_top_box");
    let p = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
    let h = 0.5 * dx;
    let b = [p(0.0, 0.0, 0.0), p(dx, 0.0, 0.0), p(dx, dy, 0.0), p(0.0, dy, 0.0)].map(|q| sy.vertex(q));
    let t = [p(0.0, 0.0, dz), p(dx, 0.0, dz), p(dx, dy, dz), p(0.0, dy, dz)].map(|q| sy.vertex(q));
    let m0 = sy.vertex(p(h, 0.0, dz));
    let m1 = sy.vertex(p(h, dy, dz));
    let eb: Vec<EdgeH> = (0..4).map(|i| sy.line(b[i], b[(i + 1) % 4])).collect();
    let ev: Vec<EdgeH> = (0..4).map(|i| sy.line(b[i], t[i])).collect();
    let t0m = sy.line(t[0], m0);
    let mt1 = sy.line(m0, t[1]);
    let t12 = sy.line(t[1], t[2]);
    let t2m = sy.line(t[2], m1);
    let mt3 = sy.line(m1, t[3]);
    let t30 = sy.line(t[3], t[0]);
    let mid = sy.line(m0, m1);
    sy.planar_face(-Vec3::Z, core::slice::from_ref(&eb));
    sy.planar_face(-Vec3::Y, &[vec![eb[0], ev[1], mt1, t0m, ev[0]]]);
    sy.planar_face(Vec3::X, &[vec![eb[1], ev[2], t12, ev[1]]]);
    sy.planar_face(Vec3::Y, &[vec![eb[2], ev[3], mt3, t2m, ev[2]]]);
    sy.planar_face(-Vec3::X, &[vec![eb[3], ev[0], t30, ev[3]]]);
    sy.planar_face(Vec3::Z, &[vec![t0m, mid, mt3, t30]]);
    sy.planar_face(Vec3::Z, &[vec![mt1, t12, t2m, mid]]);
    sy.finish_solid()
}

/// Cylinder of radius `r`, height `h` along z whose lateral surface is two
/// half-cylinder faces on one CYLINDRICAL_SURFACE, joined by two seam
/// lines; plus two planar caps. 4 faces, 6 edges, 4 vertices.
pub fn split_cylinder(r: f64, h: f64) -> StepEntityGraph {
    let mut sy = Synth::new("split_cylinder");
    let a0 = sy.vertex(Vec3::new(r, 0.0, 0.0));
    let b0 = sy.vertex(Vec3::new(-r, 0.0, 0.0));
    let a1 = sy.vertex(Vec3::new(r, 0.0, h));
    let b1 = sy.vertex(Vec3::new(-r, 0.0, h));
    let c0 = Vec3::ZERO;
    let c1 = Vec3::new(0.0, 0.0, h);
    let eb1 = sy.arc(a0, b0, c0, Vec3::Z);
    let eb2 = sy.arc(b0, a0, c0, Vec3::Z);
    let et1 = sy.arc(a1, b1, c1, Vec3::Z);
    let et2 = sy.arc(b1, a1, c1, Vec3::Z);
    let sa = sy.line(a0, a1);
    let sb = sy.line(b0, b1);
    let cyl = sy.cylinder(Vec3::ZERO, Vec3::Z, Vec3::X, r);
    sy.face(cyl, true, &[vec![(eb1, true), (sb, true), (et1, false), (sa, false)]]);
    sy.face(cyl, true, &[vec![(eb2, true), (sa, true), (et2, false), (sb, false)]]);
    sy.planar_face(-Vec3::Z, &[vec![eb1, eb2]]);
    sy.planar_face(Vec3::Z, &[vec![et1, et2]]);
    sy.finish_solid()
}

/// Cylinder with a single lateral face bounded by a seam line used twice.
/// 3 faces, 3 edges, 2 vertices.
pub fn full_cylinder(r: f64, h: f64) -> StepEntityGraph {
    let mut sy = Synth::new("full_cylinder");
    let a0 = sy.vertex(Vec3::new(r, 0.0, 0.0));
    let a1 = sy.vertex(Vec3::new(r, 0.0, h));
    let bot = sy.circle(a0, Vec3::ZERO, Vec3::Z);
    let top = sy.circle(a1, Vec3::new(0.0, 0.0, h), Vec3::Z);
    let seam = sy.line(a0, a1);
    let cyl = sy.cylinder(Vec3::ZERO, Vec3::Z, Vec3::X, r);
    sy.face(cyl, true, &[vec![(bot, true), (seam, true), (top, false), (seam, false)]]);
    sy.planar_face(-Vec3::Z, &[vec![bot]]);
    sy.planar_face(Vec3::Z, &[vec![top]]);
    sy.finish_solid()
}

/// Block `[0,a]×[0,b]×[0,c]` with the edge at `x=a, z=c` rounded by a
/// fillet of radius `r`. The fillet cylinder meets the top and right planes
/// tangentially. 7 faces, 15 edges, 10 vertices.
pub fn filleted_block(a: f64, b: f64, c: f64, r: f64) -> StepEntityGraph {
    let mut sy = Synth::new("filleted_block");
    let p = Vec3::new;
    let v000 = sy.vertex(p(0.0, 0.0, 0.0));
    let va00 = sy.vertex(p(a, 0.0, 0.0));
    let vab0 = sy.vertex(p(a, b, 0.0));
    let v0b0 = sy.vertex(p(0.0, b, 0.0));
    let v00c = sy.vertex(p(0.0, 0.0, c));
    let v0bc = sy.vertex(p(0.0, b, c));
    let vr0 = sy.vertex(p(a, 0.0, c - r));
    let vrb = sy.vertex(p(a, b, c - r));
    let vt0 = sy.vertex(p(a - r, 0.0, c));
    let vtb = sy.vertex(p(a - r, b, c));
    let e_b0 = sy.line(v000, va00);
    let e_b1 = sy.line(va00, vab0);
    let e_b2 = sy.line(vab0, v0b0);
    let e_b3 = sy.line(v0b0, v000);
    let e_l0 = sy.line(v000, v00c);
    let e_l1 = sy.line(v0b0, v0bc);
    let e_lt = sy.line(v00c, v0bc);
    let e_r0 = sy.line(va00, vr0);
    let e_r1 = sy.line(vab0, vrb);
    let e_rt = sy.line(vr0, vrb);
    let e_t0 = sy.line(v00c, vt0);
    let e_t1 = sy.line(v0bc, vtb);
    let e_tf = sy.line(vt0, vtb);
    let axis_c0 = p(a - r, 0.0, c - r);
    let axis_cb = p(a - r, b, c - r);
    let arc0 = sy.arc(vr0, vt0, axis_c0, -Vec3::Y);
    let arcb = sy.arc(vrb, vtb, axis_cb, -Vec3::Y);
    sy.planar_face(-Vec3::Z, &[vec![e_b0, e_b1, e_b2, e_b3]]);
    sy.planar_face(-Vec3::X, &[vec![e_b3, e_l0, e_lt, e_l1]]);
    sy.planar_face(Vec3::X, &[vec![e_b1, e_r1, e_rt, e_r0]]);
    sy.planar_face(Vec3::Z, &[vec![e_lt, e_t1, e_tf, e_t0]]);
    sy.planar_face(-Vec3::Y, &[vec![e_b0, e_r0, arc0, e_t0, e_l0]]);
    sy.planar_face(Vec3::Y, &[vec![e_b2, e_l1, e_t1, arcb, e_r1]]);
    // fillet: cylinder axis along y; with x-ref +x and axis -y the
    // parameter runs from +x towards +z, outward normal is radial
    let cyl = sy.cylinder(axis_c0, -Vec3::Y, Vec3::X, r);
    // uv loop (u along the arc, v = -y): (0,-b)->(π/2,-b)->(π/2,0)->(0,0)
    sy.face(cyl, true, &[vec![(arcb, true), (e_tf, false), (arc0, false), (e_rt, true)]]);
    sy.finish_solid()
}

/// Sphere octant `x, y, z >= 0` of radius `r`: one spherical face whose
/// boundary passes through the pole, and three quarter-disc planes.
pub fn sphere_octant(r: f64) -> StepEntityGraph {
    let mut sy = Synth::new("sphere_octant");
    let o = sy.vertex(Vec3::ZERO);
    let px = sy.vertex(Vec3::new(r, 0.0, 0.0));
    let py = sy.vertex(Vec3::new(0.0, r, 0.0));
    let pz = sy.vertex(Vec3::new(0.0, 0.0, r));
    let axy = sy.arc(px, py, Vec3::ZERO, Vec3::Z);
    let ayz = sy.arc(py, pz, Vec3::ZERO, Vec3::X);
    let azx = sy.arc(pz, px, Vec3::ZERO, Vec3::Y);
    let lx = sy.line(o, px);
    let ly = sy.line(o, py);
    let lz = sy.line(o, pz);
    let sph = sy.sphere(Vec3::ZERO, Vec3::Z, Vec3::X, r);
    sy.face(sph, true, &[vec![(axy, true), (ayz, true), (azx, true)]]);
    sy.planar_face(-Vec3::Z, &[vec![lx, axy, ly]]);
    sy.planar_face(-Vec3::X, &[vec![ly, ayz, lz]]);
    sy.planar_face(-Vec3::Y, &[vec![lz, azx, lx]]);
    sy.finish_solid()
}

/// Square plate `[0,w]²×[0,t]` with a through hole of radius `r` at the
/// centre: 6 box faces (top and bottom with an inner loop) plus the hole
/// wall, a full cylinder facing inward.
pub fn plate_with_hole(w: f64, t: f64, r: f64) -> StepEntityGraph {
    let mut sy = Synth::new("plate_with_hole");
    let p = Vec3::new;
    let c = w * 0.5;
    let b: Vec<usize> = [p(0.0, 0.0, 0.0), p(w, 0.0, 0.0), p(w, w, 0.0), p(0.0, w, 0.0)].into_iter().map(|q| sy.vertex(q)).collect();
    let u: Vec<usize> = [p(0.0, 0.0, t), p(w, 0.0, t), p(w, w, t), p(0.0, w, t)].into_iter().map(|q| sy.vertex(q)).collect();
    let eb: Vec<EdgeH> = (0..4).map(|i| sy.line(b[i], b[(i + 1) % 4])).collect();
    let et: Vec<EdgeH> = (0..4).map(|i| sy.line(u[i], u[(i + 1) % 4])).collect();
    let ev: Vec<EdgeH> = (0..4).map(|i| sy.line(b[i], u[i])).collect();
    let h0 = sy.vertex(p(c + r, c, 0.0));
    let h1 = sy.vertex(p(c + r, c, t));
    let hb = sy.circle(h0, p(c, c, 0.0), Vec3::Z);
    let ht = sy.circle(h1, p(c, c, t), Vec3::Z);
    let hs = sy.line(h0, h1);
    sy.planar_face(-Vec3::Z, &[eb.clone(), vec![hb]]);
    sy.planar_face(Vec3::Z, &[et.clone(), vec![ht]]);
    let normals = [-Vec3::Y, Vec3::X, Vec3::Y, -Vec3::X];
    for i in 0..4 {
        sy.planar_face(normals[i], &[vec![eb[i], ev[(i + 1) % 4], et[i], ev[i]]]);
    }
    let cyl = sy.cylinder(p(c, c, 0.0), Vec3::Z, Vec3::X, r);
    // material is outside the hole: face normal points to the axis
    sy.face(cyl, false, &[vec![(hs, true), (ht, true), (hs, false), (hb, false)]]);
    sy.finish_solid()
}

/// Cone frustum along z: bottom radius `r0`, top radius `r1 < r0`,
/// height `h`. Lateral face on a CONICAL_SURFACE with a seam.
pub fn cone_frustum(r0: f64, r1: f64, h: f64) -> StepEntityGraph {
    let mut sy = Synth::new("cone_frustum");
    // radius shrinks with z: place the cone on -z axis so tanα > 0
    let semi = crate::geom::atan2(r0 - r1, h);
    let a0 = sy.vertex(Vec3::new(r0, 0.0, 0.0));
    let a1 = sy.vertex(Vec3::new(r1, 0.0, h));
    let bot = sy.circle(a0, Vec3::ZERO, Vec3::Z);
    let top = sy.circle(a1, Vec3::new(0.0, 0.0, h), Vec3::Z);
    let seam = sy.line(a0, a1);
    // axis -z, x-ref +x: u runs clockwise seen from +z, v = -z
    let cone = sy.cone(Vec3::ZERO, -Vec3::Z, Vec3::X, r0, semi);
    // natural normal = cosα·radial - sinα·axis = cosα·radial + sinα·z: outward
    // uv: bottom circle is v=0, top v=-h, u = -angle; the bottom circle
    // forward therefore runs towards decreasing u along the upper uv edge
    sy.face(cone, true, &[vec![(bot, true), (seam, true), (top, false), (seam, false)]]);
    sy.planar_face(-Vec3::Z, &[vec![bot]]);
    sy.planar_face(Vec3::Z, &[vec![top]]);
    sy.finish_solid()
}

/// Quarter ring of a torus (`u ∈ [0, π/2]`, full minor circle) closed by
/// two planar discs.
pub fn torus_quarter(major: f64, minor: f64) -> StepEntityGraph {
    let mut sy = Synth::new("torus_quarter");
    let p0 = sy.vertex(Vec3::new(major + minor, 0.0, 0.0));
    let p1 = sy.vertex(Vec3::new(0.0, major + minor, 0.0));
    // minor circles: at u=0 in the xz plane, at u=π/2 in the yz plane
    let c0 = sy.circle(p0, Vec3::new(major, 0.0, 0.0), -Vec3::Y);
    let c1 = sy.circle(p1, Vec3::new(0.0, major, 0.0), Vec3::X);
    let seam = sy.arc(p0, p1, Vec3::ZERO, Vec3::Z);
    let tor = sy.torus(Vec3::ZERO, Vec3::Z, Vec3::X, major, minor);
    // uv loop: (0,0)->(π/2,0) seam, (π/2,0)->(π/2,2π) c1, back along the
    // seam at v=2π, then c0 downwards
    sy.face(tor, true, &[vec![(seam, true), (c1, true), (seam, false), (c0, false)]]);
    sy.planar_face(-Vec3::Y, &[vec![c0]]);
    sy.planar_face(-Vec3::X, &[vec![c1]]);
    sy.finish_solid()
}

/// Elliptic prism: lateral face on a SURFACE_OF_LINEAR_EXTRUSION of an
/// ellipse, two planar caps.
pub fn elliptic_prism(a: f64, b: f64, h: f64) -> StepEntityGraph {
    let mut sy = Synth::new("elliptic_prism");
    let a0 = sy.vertex(Vec3::new(a, 0.0, 0.0));
    let a1 = sy.vertex(Vec3::new(a, 0.0, h));
    let bot = sy.ellipse(a0, Vec3::ZERO, Vec3::Z, Vec3::X, a, b);
    let top = sy.ellipse(a1, Vec3::new(0.0, 0.0, h), Vec3::Z, Vec3::X, a, b);
    let seam = sy.line(a0, a1);
    let ax = sy.axis2(Vec3::ZERO, Vec3::Z, Vec3::X);
    let prof = sy.b.add("ELLIPSE", vec![s(""), Value::Ref(ax), Value::Real(a), Value::Real(b)]);
    let d = sy.direction(Vec3::Z);
    let vecz = sy.b.add("VECTOR", vec![s(""), Value::Ref(d), Value::Real(h)]);
    let ext = sy.b.add("SURFACE_OF_LINEAR_EXTRUSION", vec![s(""), Value::Ref(prof), Value::Ref(vecz)]);
    // du = ellipse tangent (ccw), dv = +z: du × dv points outward
    sy.face(ext, true, &[vec![(bot, true), (seam, true), (top, false), (seam, false)]]);
    sy.planar_face(-Vec3::Z, &[vec![bot]]);
    sy.planar_face(Vec3::Z, &[vec![top]]);
    sy.finish_solid()
}

/// Frustum generated by revolving a slanted segment about z
/// (SURFACE_OF_REVOLUTION), with two planar caps.
pub fn revolved_frustum(r0: f64, r1: f64, h: f64) -> StepEntityGraph {
    let mut sy = Synth::new("revolved_frustum");
    let a0 = sy.vertex(Vec3::new(r0, 0.0, 0.0));
    let a1 = sy.vertex(Vec3::new(r1, 0.0, h));
    let bot = sy.circle(a0, Vec3::ZERO, Vec3::Z);
    let top = sy.circle(a1, Vec3::new(0.0, 0.0, h), Vec3::Z);
    let seam = sy.line(a0, a1);
    // profile runs bottom to top so that du × dv points outward
    let pa = sy.point(Vec3::new(r0, 0.0, 0.0));
    let dir = sy.direction((Vec3::new(r1, 0.0, h) - Vec3::new(r0, 0.0, 0.0)).normalized().unwrap());
    let vv = sy.b.add("VECTOR", vec![s(""), Value::Ref(dir), Value::Real(1.0)]);
    let prof = sy.b.add("LINE", vec![s(""), Value::Ref(pa), Value::Ref(vv)]);
    let o = sy.point(Vec3::ZERO);
    let z = sy.direction(Vec3::Z);
    let ax = sy.b.add("AXIS1_PLACEMENT", vec![s(""), Value::Ref(o), Value::Ref(z)]);
    let rev = sy.b.add("SURFACE_OF_REVOLUTION", vec![s(""), Value::Ref(prof), Value::Ref(ax)]);
    sy.face(rev, true, &[vec![(bot, true), (seam, true), (top, false), (seam, false)]]);
    sy.planar_face(-Vec3::Z, &[vec![bot]]);
    sy.planar_face(Vec3::Z, &[vec![top]]);
    sy.finish_solid()
}

/// Control net of the bump patch used by [`bspline_sheet`]:
/// bicubic × biquadratic, `u ∈ [0,1]`, `v ∈ [0,2]`.
pub fn bump_net(size: f64, height: f64) -> (Vec<Vec<Vec3>>, [Vec<f64>; 2], [Vec<i64>; 2]) {
    let mut ctrl = Vec::new();
    for i in 0..5 {
        let mut row = Vec::new();
        for j in 0..4 {
            let z = if (1..4).contains(&i) && (1..3).contains(&j) { height } else { 0.0 };
            row.push(Vec3::new(size * i as f64 / 4.0, size * j as f64 / 3.0, z));
        }
        ctrl.push(row);
    }
    (ctrl, [vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 2.0]], [vec![4, 1, 4], vec![3, 1, 3]])
}

/// Open sheet with one B-spline face; boundary edges are the patch's exact
/// boundary iso-curves.
pub fn bspline_sheet(size: f64, height: f64) -> StepEntityGraph {
    let mut sy = Synth::new("bspline_sheet");
    let (ctrl, knots, mults) = bump_net(size, height);
    let (nu, nv) = (ctrl.len(), ctrl[0].len());
    let c00 = sy.vertex(ctrl[0][0]);
    let c10 = sy.vertex(ctrl[nu - 1][0]);
    let c11 = sy.vertex(ctrl[nu - 1][nv - 1]);
    let c01 = sy.vertex(ctrl[0][nv - 1]);
    let row = |j: usize| -> Vec<Vec3> { ctrl.iter().map(|r| r[j]).collect() };
    let v0 = sy.bspline_edge(c00, c10, 3, &row(0), &knots[0], &mults[0]);
    let v1 = sy.bspline_edge(c01, c11, 3, &row(nv - 1), &knots[0], &mults[0]);
    let u0 = sy.bspline_edge(c00, c01, 2, &ctrl[0], &knots[1], &mults[1]);
    let u1 = sy.bspline_edge(c10, c11, 2, &ctrl[nu - 1], &knots[1], &mults[1]);
    let pts: Vec<Vec<u64>> = ctrl.iter().map(|r| r.iter().map(|&p| sy.point(p)).collect()).collect();
    let net = Value::List(pts.iter().map(|r| refs(r)).collect());
    let ints = |m: &[i64]| Value::List(m.iter().map(|&x| Value::Integer(x)).collect());
    let reals = |k: &[f64]| Value::List(k.iter().map(|&x| Value::Real(x)).collect());
    let surf = sy.b.add(
        "B_SPLINE_SURFACE_WITH_KNOTS",
        vec![
            s(""),
            Value::Integer(3),
            Value::Integer(2),
            net,
            Value::Enum("UNSPECIFIED".into()),
            flag(false),
            flag(false),
            flag(false),
            ints(&mults[0]),
            ints(&mults[1]),
            reals(&knots[0]),
            reals(&knots[1]),
            Value::Enum("UNSPECIFIED".into()),
        ],
    );
    sy.face(surf, true, &[vec![(v0, true), (u1, true), (v1, false), (u0, false)]]);
    sy.finish_sheet()
}

/// One square planar face `[0,s]²` in an open shell.
pub fn single_face(size: f64) -> StepEntityGraph {
    let mut sy = Synth::new("single_face");
    let v = [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(size, 0.0, 0.0),
        Vec3::new(size, size, 0.0),
        Vec3::new(0.0, size, 0.0),
    ]
    .map(|p| sy.vertex(p));
    let e: Vec<EdgeH> = (0..4).map(|i| sy.line(v[i], v[(i + 1) % 4])).collect();
    sy.planar_face(Vec3::Z, &[e]);
    sy.finish_sheet()
}

/// Named fixture generators with default dimensions.
pub fn fixtures() -> Vec<(&'static str, StepEntityGraph)> {
    vec![
        ("cube", cube(10.0)),
        ("split_top_box", split_top_box(12.0, 8.0, 5.0)),
        ("split_cylinder", split_cylinder(5.0, 10.0)),
        ("full_cylinder", full_cylinder(5.0, 10.0)),
        ("filleted_block", filleted_block(10.0, 8.0, 6.0, 2.0)),
        ("sphere_octant", sphere_octant(1.0)),
        ("plate_with_hole", plate_with_hole(20.0, 4.0, 5.0)),
        ("cone_frustum", cone_frustum(6.0, 3.0, 8.0)),
        ("torus_quarter", torus_quarter(8.0, 2.0)),
        ("elliptic_prism", elliptic_prism(6.0, 3.0, 5.0)),
        ("revolved_frustum", revolved_frustum(5.0, 3.0, 6.0)),
        ("bspline_sheet", bspline_sheet(10.0, 3.0)),
        ("single_face", single_face(4.0)),
    ]
}

use crate::eval::unit_f64 as unit;

/// Uniformly random rigid motion with translation in `[-t, t]³`.
pub fn random_motion(rng: &mut ChaCha8Rng, t: f64) -> RigidMotion {
    let z = 2.0 * unit(rng) - 1.0;
    let phi = TAU * unit(rng);
    let rho = crate::geom::sqrt((1.0 - z * z).max(0.0));
    let axis = Vec3::new(rho * cos(phi), rho * sin(phi), z);
    let angle = PI * unit(rng);
    let shift = Vec3::new(t * (2.0 * unit(rng) - 1.0), t * (2.0 * unit(rng) - 1.0), t * (2.0 * unit(rng) - 1.0));
    RigidMotion::from_axis_angle(axis, angle, shift)
}

/// `n` models drawn from the fixture families with random dimensions and
/// a random rigid motion each. Names are `model_0000`, ...
pub fn corpus(n: usize, seed: u64) -> Vec<(String, StepEntityGraph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let k = (rng.next_u64() % 12) as usize;
        let mut d = |lo: f64, hi: f64| lo + (hi - lo) * unit(&mut rng);
        let g = match k {
            0 => box_solid(d(2.0, 20.0), d(2.0, 20.0), d(2.0, 20.0)),
            1 => split_top_box(d(4.0, 20.0), d(2.0, 20.0), d(2.0, 10.0)),
            2 => split_cylinder(d(1.0, 8.0), d(2.0, 20.0)),
            3 => full_cylinder(d(1.0, 8.0), d(2.0, 20.0)),
            4 => {
                let c = d(3.0, 10.0);
                filleted_block(d(4.0, 15.0), d(2.0, 15.0), c, d(0.5, 0.4 * c))
            }
            5 => sphere_octant(d(1.0, 10.0)),
            6 => {
                let w = d(6.0, 30.0);
                plate_with_hole(w, d(1.0, 6.0), d(0.1, 0.4) * w)
            }
            7 => {
                let r0 = d(2.0, 10.0);
                cone_frustum(r0, d(0.2, 0.8) * r0, d(2.0, 15.0))
            }
            8 => {
                let major = d(4.0, 12.0);
                torus_quarter(major, d(0.1, 0.4) * major)
            }
            9 => {
                let a = d(2.0, 10.0);
                elliptic_prism(a, d(0.3, 0.9) * a, d(2.0, 10.0))
            }
            10 => {
                let r0 = d(2.0, 10.0);
                revolved_frustum(r0, d(0.3, 0.9) * r0, d(2.0, 10.0))
            }
            _ => bspline_sheet(d(4.0, 20.0), d(0.5, 4.0)),
        };
        let m = random_motion(&mut rng, 50.0);
        out.push((format!("model_{i:04}"), transform_graph(&g, &m)));
    }
    out
}
