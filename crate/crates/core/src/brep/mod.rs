//! Boundary-representation model: faces, topological edges and the
//! analytic surfaces they trim.

pub mod bspline;
mod build;
pub mod curve;
pub mod surface;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use build::{build_brep, transform_graph};
pub use curve::CurveGeom;
pub use surface::{InversionError, SurfaceGeom, SurfacePoint};

use crate::geom::{cos, sin, Aabb, RigidMotion, Vec3};

/// Orthonormal right-handed placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Vec3,
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

impl Frame {
    pub fn world() -> Frame {
        Frame {
            origin: Vec3::ZERO,
            x: Vec3::X,
            y: Vec3::Y,
            z: Vec3::Z,
        }
    }

    /// Frame with `z` along `axis` and `x` the part of `reference`
    /// orthogonal to it. `None` if either is zero or they are parallel
    /// (angle at most 1e-9 rad).
    pub fn from_axis_ref(origin: Vec3, axis: Vec3, reference: Vec3) -> Option<Frame> {
        let z = axis.normalized()?;
        let r = reference.normalized()?;
        if z.cross(r).norm() <= 1e-9 {
            return None;
        }
        let x = (r - z * r.dot(z)).normalized()?;
        Some(Frame { origin, x, y: z.cross(x), z })
    }

    /// Unit radial and tangential directions at angle `u` in the xy plane.
    pub fn radial(&self, u: f64) -> (Vec3, Vec3) {
        let (s, c) = (sin(u), cos(u));
        (self.x * c + self.y * s, self.y * c - self.x * s)
    }

    /// Coordinates of `p` in this frame.
    pub fn local(&self, p: Vec3) -> (f64, f64, f64) {
        let d = p - self.origin;
        (d.dot(self.x), d.dot(self.y), d.dot(self.z))
    }

    pub fn transformed(&self, m: &RigidMotion) -> Frame {
        Frame {
            origin: m.apply_point(self.origin),
            x: m.apply_vector(self.x),
            y: m.apply_vector(self.y),
            z: m.apply_vector(self.z),
        }
    }
}

/// Analytic primitive class of a face's underlying surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimitiveType {
    Plane,
    Cylinder,
    Cone,
    Sphere,
    Torus,
    ExtrusionSurface,
    RevolutionSurface,
    BSpline,
    Other,
}

impl PrimitiveType {
    pub const ALL: [PrimitiveType; 9] = [
        PrimitiveType::Plane,
        PrimitiveType::Cylinder,
        PrimitiveType::Cone,
        PrimitiveType::Sphere,
        PrimitiveType::Torus,
        PrimitiveType::ExtrusionSurface,
        PrimitiveType::RevolutionSurface,
        PrimitiveType::BSpline,
        PrimitiveType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PrimitiveType::Plane => "Plane",
            PrimitiveType::Cylinder => "Cylinder",
            PrimitiveType::Cone => "Cone",
            PrimitiveType::Sphere => "Sphere",
            PrimitiveType::Torus => "Torus",
            PrimitiveType::ExtrusionSurface => "ExtrusionSurface",
            PrimitiveType::RevolutionSurface => "RevolutionSurface",
            PrimitiveType::BSpline => "BSpline",
            PrimitiveType::Other => "Other",
        }
    }

    pub fn from_name(s: &str) -> Option<PrimitiveType> {
        PrimitiveType::ALL.into_iter().find(|p| p.as_str() == s)
    }

    /// Dense index in [`PrimitiveType::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PrimitiveType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for PrimitiveType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for PrimitiveType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        PrimitiveType::from_name(&s).ok_or_else(|| serde::de::Error::custom("unknown primitive type"))
    }
}

/// Primitive class of a surface entity keyword. Total: anything
/// unrecognized is `Other`.
pub fn classify_keyword(keyword: &str) -> PrimitiveType {
    match keyword {
        "PLANE" => PrimitiveType::Plane,
        "CYLINDRICAL_SURFACE" => PrimitiveType::Cylinder,
        "CONICAL_SURFACE" => PrimitiveType::Cone,
        "SPHERICAL_SURFACE" => PrimitiveType::Sphere,
        "TOROIDAL_SURFACE" | "DEGENERATE_TOROIDAL_SURFACE" => PrimitiveType::Torus,
        "SURFACE_OF_LINEAR_EXTRUSION" => PrimitiveType::ExtrusionSurface,
        "SURFACE_OF_REVOLUTION" => PrimitiveType::RevolutionSurface,
        "B_SPLINE_SURFACE_WITH_KNOTS"
        | "B_SPLINE_SURFACE"
        | "RATIONAL_B_SPLINE_SURFACE"
        | "BEZIER_SURFACE"
        | "UNIFORM_SURFACE"
        | "QUASI_UNIFORM_SURFACE" => PrimitiveType::BSpline,
        _ => PrimitiveType::Other,
    }
}

/// Classification of a (possibly complex) entity record: the first
/// constituent keyword with a known class wins.
pub fn classify_record(rec: &crate::step::EntityRecord) -> PrimitiveType {
    rec.parts
        .iter()
        .map(|p| classify_keyword(&p.keyword))
        .find(|t| *t != PrimitiveType::Other)
        .unwrap_or(PrimitiveType::Other)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub step_id: u64,
    pub primitive: PrimitiveType,
    pub geom: SurfaceGeom,
}

/// Edge use inside a loop; `forward` means traversed start → end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedEdge {
    pub edge: usize,
    pub forward: bool,
}

/// Boundary loop, normalized so that traversal already accounts for the
/// bound's orientation flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub edges: Vec<OrientedEdge>,
    /// Declared as `FACE_OUTER_BOUND`.
    pub outer: bool,
    /// Single-vertex loop (cone apex and the like).
    pub vertex: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: usize,
    pub step_id: u64,
    pub surface: usize,
    pub same_sense: bool,
    pub loops: Vec<Loop>,
    pub primitive: PrimitiveType,
    pub shell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoEdge {
    pub id: usize,
    pub step_id: u64,
    pub curve: CurveGeom,
    /// Curve parameter range, `t0 < t1`.
    pub t0: f64,
    pub t1: f64,
    /// Curve direction `t0 → t1` runs from `start` to `end`.
    pub curve_forward: bool,
    pub start: Vec3,
    pub end: Vec3,
    pub closed: bool,
    /// `(face id, traversed forward)` for every loop use.
    pub incidences: Vec<(usize, bool)>,
}

impl TopoEdge {
    pub fn mid_param(&self) -> f64 {
        0.5 * (self.t0 + self.t1)
    }

    /// Curve parameter at fraction `s ∈ [0, 1]` from `start` to `end`.
    pub fn param_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        if self.curve_forward {
            self.t0 + (self.t1 - self.t0) * s
        } else {
            self.t1 - (self.t1 - self.t0) * s
        }
    }

    /// Distinct faces using this edge, in incidence order.
    pub fn faces(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &(f, _) in &self.incidences {
            if !out.contains(&f) {
                out.push(f);
            }
        }
        out
    }
}

/// Point on an edge's curve; `t` is clamped to the edge range.
pub fn eval_edge(edge: &TopoEdge, t: f64) -> Vec3 {
    edge.curve.eval(t.clamp(edge.t0, edge.t1))
}

/// Point and unit normal of a surface at `(u, v)`.
pub fn eval_surface(surface: &SurfaceGeom, u: f64, v: f64) -> SurfacePoint {
    surface.eval(u, v)
}

/// Non-fatal findings collected while building.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BrepDiagnostics {
    /// Edges whose curve endpoints miss their vertices by more than `tol_vertex`.
    pub vertex_mismatch: Vec<usize>,
    /// Edges used by more than two faces.
    pub non_manifold: Vec<usize>,
    /// Edges used by a single face (open boundary).
    pub boundary: Vec<usize>,
    /// Entity ids skipped because their geometry could not be resolved.
    pub skipped: Vec<(u64, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BRepSolid {
    pub faces: Vec<Face>,
    pub edges: Vec<TopoEdge>,
    pub surfaces: Vec<Surface>,
    /// Face ids per shell.
    pub shells: Vec<Vec<usize>>,
    pub bbox: Aabb,
    pub diagnostics: BrepDiagnostics,
}

impl BRepSolid {
    pub fn diagonal(&self) -> f64 {
        self.bbox.diagonal()
    }

    pub fn tol_vertex(&self) -> f64 {
        1e-6 * self.diagonal()
    }

    pub fn tol_onsurface(&self) -> f64 {
        1e-5 * self.diagonal()
    }

    pub fn surface_of(&self, face: usize) -> &SurfaceGeom {
        &self.surfaces[self.faces[face].surface].geom
    }

    /// Outward normal of `face` at `(u, v)`: the natural normal flipped by
    /// the face's same-sense flag.
    pub fn face_normal(&self, face: usize, u: f64, v: f64) -> SurfacePoint {
        let mut e = self.surface_of(face).eval(u, v);
        if !self.faces[face].same_sense {
            e.normal = -e.normal;
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BrepError {
    #[error("no shell found")]
    NoShell,
    #[error("entity #{id}: unresolvable reference ({what})")]
    Unresolvable { id: u64, what: String },
    #[error("entity #{id}: degenerate surface parameters ({what})")]
    DegenerateSurface { id: u64, what: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_is_total_and_keyword_only() {
        assert_eq!(classify_keyword("PLANE"), PrimitiveType::Plane);
        assert_eq!(classify_keyword("SURFACE_OF_REVOLUTION"), PrimitiveType::RevolutionSurface);
        assert_eq!(classify_keyword("OFFSET_SURFACE"), PrimitiveType::Other);
        assert_eq!(classify_keyword(""), PrimitiveType::Other);
        for p in PrimitiveType::ALL {
            assert_eq!(PrimitiveType::from_name(p.as_str()), Some(p));
        }
    }

    #[test]
    fn frame_rejects_parallel_reference() {
        assert!(Frame::from_axis_ref(Vec3::ZERO, Vec3::Z, Vec3::Z * 2.0).is_none());
        let f = Frame::from_axis_ref(Vec3::ZERO, Vec3::Z, Vec3::new(1.0, 0.0, 0.5)).unwrap();
        assert!((f.x - Vec3::X).norm() < 1e-15);
        assert!((f.y - Vec3::Y).norm() < 1e-15);
    }
}
