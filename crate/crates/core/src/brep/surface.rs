use alloc::boxed::Box;

use super::bspline::{BSplineSurface, SurfaceDerivs};
use super::curve::CurveGeom;
use super::{Frame, PrimitiveType};
use crate::geom::{atan2, cos, floor, sin, sqrt, tan, wrap_angle, RigidMotion, Vec3, FRAC_PI_2, TAU};

/// Underlying surface of a face, in its natural parameterization.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceGeom {
    Plane(Frame),
    Cylinder { frame: Frame, radius: f64 },
    /// `radius` at `v = 0`, `v` measured along the axis.
    Cone { frame: Frame, radius: f64, semi_angle: f64 },
    Sphere { frame: Frame, radius: f64 },
    Torus { frame: Frame, major: f64, minor: f64 },
    /// `curve(u) + v * dir`, `dir` unit length.
    Extrusion { curve: Box<CurveGeom>, dir: Vec3 },
    /// `curve(v)` rotated by `u` about the axis through `origin` along `axis`.
    Revolution { curve: Box<CurveGeom>, origin: Vec3, axis: Vec3 },
    BSpline(BSplineSurface),
    /// Known-unknown surface: classified, never evaluated.
    Unsupported,
}

/// Evaluated point with its natural unit normal (`∂u × ∂v` direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub point: Vec3,
    pub normal: Vec3,
    /// Parameterization is degenerate here (pole, apex); the normal is the
    /// limit value.
    pub singular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum InversionError {
    #[error("point inversion did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("surface has no evaluator")]
    Unsupported,
}

/// Coarse seed grid resolution and iteration budget for numeric inversion.
const SEED_GRID: usize = 16;
const MAX_ITERS: usize = 50;
const STEP_TOL: f64 = 1e-10;

impl SurfaceGeom {
    /// Primitive class implied by the geometry variant. Agrees with
    /// [`super::classify_keyword`] for every buildable surface.
    pub fn primitive(&self) -> PrimitiveType {
        match self {
            SurfaceGeom::Plane(_) => PrimitiveType::Plane,
            SurfaceGeom::Cylinder { .. } => PrimitiveType::Cylinder,
            SurfaceGeom::Cone { .. } => PrimitiveType::Cone,
            SurfaceGeom::Sphere { .. } => PrimitiveType::Sphere,
            SurfaceGeom::Torus { .. } => PrimitiveType::Torus,
            SurfaceGeom::Extrusion { .. } => PrimitiveType::ExtrusionSurface,
            SurfaceGeom::Revolution { .. } => PrimitiveType::RevolutionSurface,
            SurfaceGeom::BSpline(_) => PrimitiveType::BSpline,
            SurfaceGeom::Unsupported => PrimitiveType::Other,
        }
    }

    pub fn u_period(&self) -> Option<f64> {
        match self {
            SurfaceGeom::Cylinder { .. }
            | SurfaceGeom::Cone { .. }
            | SurfaceGeom::Sphere { .. }
            | SurfaceGeom::Torus { .. }
            | SurfaceGeom::Revolution { .. } => Some(TAU),
            SurfaceGeom::Extrusion { curve, .. } => curve.period(),
            SurfaceGeom::BSpline(b) => bspline_closed_u(b).then(|| b.u_domain().1 - b.u_domain().0),
            _ => None,
        }
    }

    pub fn v_period(&self) -> Option<f64> {
        match self {
            SurfaceGeom::Torus { .. } => Some(TAU),
            SurfaceGeom::Revolution { curve, .. } => curve.period(),
            SurfaceGeom::BSpline(b) => bspline_closed_v(b).then(|| b.v_domain().1 - b.v_domain().0),
            _ => None,
        }
    }

    /// Parameter bounds in u, `None` when unbounded or periodic.
    pub fn u_bounds(&self) -> Option<(f64, f64)> {
        if self.u_period().is_some() {
            return None;
        }
        match self {
            SurfaceGeom::Extrusion { curve, .. } => curve.domain(),
            SurfaceGeom::BSpline(b) => Some(b.u_domain()),
            _ => None,
        }
    }

    /// Parameter bounds in v, `None` when unbounded or periodic.
    pub fn v_bounds(&self) -> Option<(f64, f64)> {
        if self.v_period().is_some() {
            return None;
        }
        match self {
            SurfaceGeom::Sphere { .. } => Some((-FRAC_PI_2, FRAC_PI_2)),
            SurfaceGeom::Revolution { curve, .. } => curve.domain(),
            SurfaceGeom::BSpline(b) => Some(b.v_domain()),
            _ => None,
        }
    }

    /// Point and first partial derivatives.
    pub fn derivs(&self, u: f64, v: f64) -> SurfaceDerivs {
        match self {
            SurfaceGeom::Plane(f) => SurfaceDerivs {
                point: f.origin + f.x * u + f.y * v,
                du: f.x,
                dv: f.y,
            },
            SurfaceGeom::Cylinder { frame: f, radius } => {
                let (radial, tang) = f.radial(u);
                SurfaceDerivs {
                    point: f.origin + radial * *radius + f.z * v,
                    du: tang * *radius,
                    dv: f.z,
                }
            }
            SurfaceGeom::Cone { frame: f, radius, semi_angle } => {
                let (radial, tang) = f.radial(u);
                let t = tan(*semi_angle);
                let rho = radius + v * t;
                SurfaceDerivs {
                    point: f.origin + radial * rho + f.z * v,
                    du: tang * rho,
                    dv: radial * t + f.z,
                }
            }
            SurfaceGeom::Sphere { frame: f, radius } => {
                let (radial, tang) = f.radial(u);
                let (sv, cv) = (sin(v), cos(v));
                SurfaceDerivs {
                    point: f.origin + (radial * cv + f.z * sv) * *radius,
                    du: tang * (radius * cv),
                    dv: (f.z * cv - radial * sv) * *radius,
                }
            }
            SurfaceGeom::Torus { frame: f, major, minor } => {
                let (radial, tang) = f.radial(u);
                let (sv, cv) = (sin(v), cos(v));
                SurfaceDerivs {
                    point: f.origin + radial * (major + minor * cv) + f.z * (minor * sv),
                    du: tang * (major + minor * cv),
                    dv: (f.z * cv - radial * sv) * *minor,
                }
            }
            SurfaceGeom::Extrusion { curve, dir } => {
                let (c, dc) = curve.eval_d1(u);
                SurfaceDerivs {
                    point: c + *dir * v,
                    du: dc,
                    dv: *dir,
                }
            }
            SurfaceGeom::Revolution { curve, origin, axis } => {
                let (c, dc) = curve.eval_d1(v);
                let w = rotate(c - *origin, *axis, u);
                SurfaceDerivs {
                    point: *origin + w,
                    du: axis.cross(w),
                    dv: rotate(dc, *axis, u),
                }
            }
            SurfaceGeom::BSpline(b) => {
                let u = wrap_into(u, b.u_domain(), self.u_period());
                let v = wrap_into(v, b.v_domain(), self.v_period());
                b.derivs(u, v)
            }
            SurfaceGeom::Unsupported => SurfaceDerivs {
                point: Vec3::ZERO,
                du: Vec3::ZERO,
                dv: Vec3::ZERO,
            },
        }
    }

    /// Point and natural unit normal at `(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> SurfacePoint {
        let d = self.derivs(u, v);
        let scale = d.du.norm().max(d.dv.norm()).max(1e-300);
        let cross = d.du.cross(d.dv);
        let singular = cross.norm() <= 1e-12 * scale * scale;
        let closed_form = match self {
            SurfaceGeom::Plane(f) => Some(f.z),
            SurfaceGeom::Cylinder { frame, .. } => Some(frame.radial(u).0),
            SurfaceGeom::Cone { frame, radius, semi_angle } => {
                let rho = radius + v * tan(*semi_angle);
                let n = frame.radial(u).0 * cos(*semi_angle) - frame.z * sin(*semi_angle);
                Some(if rho < 0.0 { -n } else { n })
            }
            SurfaceGeom::Sphere { frame, .. } | SurfaceGeom::Torus { frame, .. } => {
                Some(frame.radial(u).0 * cos(v) + frame.z * sin(v))
            }
            _ => None,
        };
        let normal = match closed_form {
            Some(n) => n,
            None if !singular => cross / cross.norm(),
            None => self.limit_normal(u, v),
        };
        SurfacePoint {
            point: d.point,
            normal,
            singular,
        }
    }

    /// Normal at a degenerate point taken from a nearby regular point.
    fn limit_normal(&self, u: f64, v: f64) -> Vec3 {
        let du = self.u_bounds().map_or(1e-7, |(a, b)| 1e-7 * (b - a));
        let dv = self.v_bounds().map_or(1e-7, |(a, b)| 1e-7 * (b - a));
        let (uc, vc) = self.param_center();
        let su = if uc >= u { 1.0 } else { -1.0 };
        let sv = if vc >= v { 1.0 } else { -1.0 };
        for (ou, ov) in [(0.0, sv * dv), (su * du, 0.0), (su * du, sv * dv)] {
            let d = self.derivs(u + ou, v + ov);
            if let Some(n) = d.du.cross(d.dv).normalized() {
                return n;
            }
        }
        Vec3::Z
    }

    fn param_center(&self) -> (f64, f64) {
        let uc = self.u_bounds().map_or(0.0, |(a, b)| 0.5 * (a + b));
        let vc = self.v_bounds().map_or(0.0, |(a, b)| 0.5 * (a + b));
        (uc, vc)
    }

    /// Parameters of the surface point nearest `p`.
    ///
    /// Closed form for planes, cylinders, cones, spheres and tori; the swept
    /// surfaces reduce to a one-dimensional Gauss-Newton search on their
    /// profile curve; B-spline patches use a 16×16 seed grid followed by at
    /// most 50 damped Gauss-Newton steps, converged once the parameter step
    /// drops below 1e-10. Periodic parameters are returned in `[0, period)`.
    pub fn invert_point(&self, p: Vec3) -> Result<(f64, f64), InversionError> {
        match self {
            SurfaceGeom::Plane(f) => {
                let d = p - f.origin;
                Ok((d.dot(f.x), d.dot(f.y)))
            }
            SurfaceGeom::Cylinder { frame: f, .. } => {
                let (x, y, z) = f.local(p);
                Ok((wrap_angle(atan2(y, x)), z))
            }
            SurfaceGeom::Cone { frame: f, radius, semi_angle } => {
                // nearest point on the generator line in the (ρ, z) half plane
                let (x, y, z) = f.local(p);
                let rho = sqrt(x * x + y * y);
                let (s, c) = (sin(*semi_angle), cos(*semi_angle));
                // generator: (radius + v tanα, v) = (radius, 0) + w (s, c) with w = v / c
                let w = (rho - radius) * s + z * c;
                Ok((wrap_angle(atan2(y, x)), w * c))
            }
            SurfaceGeom::Sphere { frame: f, .. } => {
                let (x, y, z) = f.local(p);
                let rho = sqrt(x * x + y * y);
                Ok((wrap_angle(atan2(y, x)), atan2(z, rho)))
            }
            SurfaceGeom::Torus { frame: f, major, .. } => {
                let (x, y, z) = f.local(p);
                let rho = sqrt(x * x + y * y);
                Ok((wrap_angle(atan2(y, x)), wrap_angle(atan2(z, rho - major))))
            }
            SurfaceGeom::Extrusion { curve, dir } => invert_extrusion(curve, *dir, p),
            SurfaceGeom::Revolution { curve, origin, axis } => invert_revolution(curve, *origin, *axis, p),
            SurfaceGeom::BSpline(b) => self.invert_bspline(b, p),
            SurfaceGeom::Unsupported => Err(InversionError::Unsupported),
        }
    }

    fn invert_bspline(&self, b: &BSplineSurface, p: Vec3) -> Result<(f64, f64), InversionError> {
        let (u0, u1) = b.u_domain();
        let (v0, v1) = b.v_domain();
        let mut best = (f64::INFINITY, u0, v0);
        for i in 0..=SEED_GRID {
            let u = u0 + (u1 - u0) * i as f64 / SEED_GRID as f64;
            for j in 0..=SEED_GRID {
                let v = v0 + (v1 - v0) * j as f64 / SEED_GRID as f64;
                let d = b.derivs(u, v).point.dist_sq(p);
                if d < best.0 {
                    best = (d, u, v);
                }
            }
        }
        let (mut u, mut v) = (best.1, best.2);
        let mut dist = best.0;
        let (uper, vper) = (self.u_period(), self.v_period());
        for _ in 0..MAX_ITERS {
            let d = b.derivs(u, v);
            let r = p - d.point;
            let a11 = d.du.dot(d.du);
            let a12 = d.du.dot(d.dv);
            let a22 = d.dv.dot(d.dv);
            let b1 = d.du.dot(r);
            let b2 = d.dv.dot(r);
            let det = a11 * a22 - a12 * a12;
            let (mut su, mut sv) = if det.abs() > 1e-300 {
                ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det)
            } else if a11 > a22 && a11 > 0.0 {
                (b1 / a11, 0.0)
            } else if a22 > 0.0 {
                (0.0, b2 / a22)
            } else {
                (0.0, 0.0)
            };
            // damping: halve until the residual does not grow
            let mut accepted = false;
            for _ in 0..30 {
                let nu = clamp_or_wrap(u + su, (u0, u1), uper);
                let nv = clamp_or_wrap(v + sv, (v0, v1), vper);
                let nd = b.derivs(nu, nv).point.dist_sq(p);
                if nd <= dist * (1.0 + 1e-12) || nd == 0.0 {
                    let step = ((nu - u).abs()).max((nv - v).abs());
                    u = nu;
                    v = nv;
                    dist = nd;
                    accepted = true;
                    if step < STEP_TOL {
                        return Ok(self.normalize_uv(u, v));
                    }
                    break;
                }
                su *= 0.5;
                sv *= 0.5;
            }
            if !accepted {
                // no descent direction left: stationary point
                return Ok(self.normalize_uv(u, v));
            }
        }
        Err(InversionError::NoConvergence { residual: sqrt(dist) })
    }

    fn normalize_uv(&self, u: f64, v: f64) -> (f64, f64) {
        let u = match (self, self.u_period()) {
            (SurfaceGeom::BSpline(b), Some(per)) => wrap_into(u, b.u_domain(), Some(per)),
            _ => u,
        };
        let v = match (self, self.v_period()) {
            (SurfaceGeom::BSpline(b), Some(per)) => wrap_into(v, b.v_domain(), Some(per)),
            _ => v,
        };
        (u, v)
    }

    /// Parameter value (in v) of a degenerate iso-line lying beyond `v_ref`
    /// in the direction `up`, such as a sphere pole or cone apex.
    pub fn pole_v(&self, v_ref: f64, up: bool, scale: f64) -> Option<f64> {
        let beyond = |v: f64| if up { v > v_ref } else { v < v_ref };
        match self {
            SurfaceGeom::Sphere { .. } => Some(if up { FRAC_PI_2 } else { -FRAC_PI_2 }),
            SurfaceGeom::Cone { radius, semi_angle, .. } => {
                let apex = -radius / tan(*semi_angle);
                beyond(apex).then_some(apex)
            }
            SurfaceGeom::Revolution { .. } | SurfaceGeom::BSpline(_) => {
                let (a, b) = self.v_bounds()?;
                let cand = if up { b } else { a };
                if !beyond(cand) {
                    return None;
                }
                // degenerate when the whole u iso-line collapses to a point
                let p0 = self.derivs(0.0, cand).point;
                let (ua, ub) = self.u_bounds().unwrap_or((0.0, self.u_period().unwrap_or(1.0)));
                let collapsed = (1..=8).all(|k| {
                    let u = ua + (ub - ua) * k as f64 / 8.0;
                    self.derivs(u, cand).point.dist(p0) <= 1e-9 * scale
                });
                collapsed.then_some(cand)
            }
            _ => None,
        }
    }

    pub fn transformed(&self, m: &RigidMotion) -> SurfaceGeom {
        match self {
            SurfaceGeom::Plane(f) => SurfaceGeom::Plane(f.transformed(m)),
            SurfaceGeom::Cylinder { frame, radius } => SurfaceGeom::Cylinder {
                frame: frame.transformed(m),
                radius: *radius,
            },
            SurfaceGeom::Cone { frame, radius, semi_angle } => SurfaceGeom::Cone {
                frame: frame.transformed(m),
                radius: *radius,
                semi_angle: *semi_angle,
            },
            SurfaceGeom::Sphere { frame, radius } => SurfaceGeom::Sphere {
                frame: frame.transformed(m),
                radius: *radius,
            },
            SurfaceGeom::Torus { frame, major, minor } => SurfaceGeom::Torus {
                frame: frame.transformed(m),
                major: *major,
                minor: *minor,
            },
            SurfaceGeom::Extrusion { curve, dir } => SurfaceGeom::Extrusion {
                curve: Box::new(curve.transformed(m)),
                dir: m.apply_vector(*dir),
            },
            SurfaceGeom::Revolution { curve, origin, axis } => SurfaceGeom::Revolution {
                curve: Box::new(curve.transformed(m)),
                origin: m.apply_point(*origin),
                axis: m.apply_vector(*axis),
            },
            SurfaceGeom::BSpline(b) => {
                let mut b = b.clone();
                b.ctrl.iter_mut().flatten().for_each(|c| *c = m.apply_point(*c));
                SurfaceGeom::BSpline(b)
            }
            SurfaceGeom::Unsupported => SurfaceGeom::Unsupported,
        }
    }
}

/// Rodrigues rotation of `w` about unit `k` by angle `a`.
fn rotate(w: Vec3, k: Vec3, a: f64) -> Vec3 {
    let (s, c) = (sin(a), cos(a));
    w * c + k.cross(w) * s + k * (k.dot(w) * (1.0 - c))
}

fn wrap_into(t: f64, (a, b): (f64, f64), period: Option<f64>) -> f64 {
    match period {
        Some(p) if p > 0.0 && (t < a || t > b) => {
            let w = a + (t - a) - p * floor((t - a) / p);
            w.clamp(a, b)
        }
        _ => t,
    }
}

fn clamp_or_wrap(t: f64, bounds: (f64, f64), period: Option<f64>) -> f64 {
    match period {
        Some(_) => t,
        None => t.clamp(bounds.0, bounds.1),
    }
}

fn bspline_closed_u(b: &BSplineSurface) -> bool {
    let last = b.ctrl.len() - 1;
    let scale = ctrl_scale(b);
    (0..b.ctrl[0].len()).all(|j| b.ctrl[0][j].dist(b.ctrl[last][j]) <= 1e-9 * scale)
}

fn bspline_closed_v(b: &BSplineSurface) -> bool {
    let last = b.ctrl[0].len() - 1;
    let scale = ctrl_scale(b);
    b.ctrl.iter().all(|row| row[0].dist(row[last]) <= 1e-9 * scale)
}

fn ctrl_scale(b: &BSplineSurface) -> f64 {
    crate::geom::Aabb::from_points(b.ctrl.iter().flatten().copied())
        .diagonal()
        .max(1e-300)
}

/// Gauss-Newton on a scalar parameter minimizing `|r(t)|²` where `r` and its
/// derivative come from `f`. `bounds` clamps non-periodic parameters.
fn gauss_newton_1d(
    mut t: f64,
    bounds: Option<(f64, f64)>,
    f: impl Fn(f64) -> (f64, f64, f64, f64),
) -> Result<f64, InversionError> {
    // f returns (r1, r2, dr1, dr2) for a 2-component residual
    let cost = |t: f64| {
        let (a, b, _, _) = f(t);
        a * a + b * b
    };
    let mut c = cost(t);
    for _ in 0..MAX_ITERS {
        let (r1, r2, d1, d2) = f(t);
        let jj = d1 * d1 + d2 * d2;
        if jj <= 1e-300 {
            return Ok(t);
        }
        let mut step = -(r1 * d1 + r2 * d2) / jj;
        let mut accepted = false;
        for _ in 0..30 {
            let mut nt = t + step;
            if let Some((a, b)) = bounds {
                nt = nt.clamp(a, b);
            }
            let nc = cost(nt);
            if nc <= c * (1.0 + 1e-12) || nc == 0.0 {
                let moved = (nt - t).abs();
                t = nt;
                c = nc;
                accepted = true;
                if moved < STEP_TOL {
                    return Ok(t);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Ok(t);
        }
    }
    Err(InversionError::NoConvergence { residual: sqrt(c) })
}

/// Seed for a 1D search: best of `n` samples over the curve's domain, or a
/// window around the line's own closest parameter.
fn seed_param(curve: &CurveGeom, p: Vec3, window: f64, score: impl Fn(f64) -> f64) -> (f64, Option<(f64, f64)>) {
    let (a, b, bounds) = match curve.domain() {
        Some((a, b)) => (a, b, if curve.period().is_some() { None } else { Some((a, b)) }),
        None => {
            let t = curve.closest_param(p);
            (t - window, t + window, None)
        }
    };
    let n = 64;
    let mut best = (f64::INFINITY, a);
    for k in 0..=n {
        let t = a + (b - a) * k as f64 / n as f64;
        let s = score(t);
        if s < best.0 {
            best = (s, t);
        }
    }
    (best.1, bounds)
}

fn invert_extrusion(curve: &CurveGeom, dir: Vec3, p: Vec3) -> Result<(f64, f64), InversionError> {
    // residual is the component of p - C(u) orthogonal to dir
    let perp = |w: Vec3| w - dir * w.dot(dir);
    let u = match curve {
        CurveGeom::Line { origin, dir: ld } => {
            let a = perp(*ld);
            let l2 = a.norm_sq();
            if l2 <= 1e-300 {
                0.0
            } else {
                perp(p - *origin).dot(a) / l2
            }
        }
        _ => {
            let window = 1.0;
            let (seed, bounds) = seed_param(curve, p, window, |t| perp(p - curve.eval(t)).norm_sq());
            // use two orthonormal axes spanning the plane normal to dir
            let e1 = dir.any_perpendicular();
            let e2 = dir.cross(e1);
            gauss_newton_1d(seed, bounds, |t| {
                let (c, dc) = curve.eval_d1(t);
                let r = c - p;
                (r.dot(e1), r.dot(e2), dc.dot(e1), dc.dot(e2))
            })?
        }
    };
    let u = match curve.period() {
        Some(_) => wrap_angle(u),
        None => u,
    };
    let v = (p - curve.eval(u)).dot(dir);
    Ok((u, v))
}

fn invert_revolution(curve: &CurveGeom, origin: Vec3, axis: Vec3, p: Vec3) -> Result<(f64, f64), InversionError> {
    let local = |w: Vec3| {
        let h = w.dot(axis);
        let rho = (w - axis * h).norm();
        (rho, h)
    };
    let (rho_p, h_p) = local(p - origin);
    let window = (p - origin).norm() + 1.0;
    let (seed, bounds) = seed_param(curve, p, window, |t| {
        let (r, h) = local(curve.eval(t) - origin);
        (r - rho_p) * (r - rho_p) + (h - h_p) * (h - h_p)
    });
    let v = gauss_newton_1d(seed, bounds, |t| {
        let (c, dc) = curve.eval_d1(t);
        let w = c - origin;
        let h = w.dot(axis);
        let radial = w - axis * h;
        let rho = radial.norm();
        let drho = if rho > 1e-300 { radial.dot(dc) / rho } else { 0.0 };
        (rho - rho_p, h - h_p, drho, dc.dot(axis))
    })?;
    let v = match curve.period() {
        Some(_) => wrap_angle(v),
        None => v,
    };
    let x = axis.any_perpendicular();
    let y = axis.cross(x);
    let ang = |w: Vec3| atan2(w.dot(y), w.dot(x));
    let wc = curve.eval(v) - origin;
    let wp = p - origin;
    let rc = wc - axis * wc.dot(axis);
    let rp = wp - axis * wp.dot(axis);
    let u = if rc.norm() <= 1e-300 || rp.norm() <= 1e-300 {
        0.0
    } else {
        wrap_angle(ang(rp) - ang(rc))
    };
    Ok((u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PI;
    use alloc::vec;
    use alloc::vec::Vec;

    fn world() -> Frame {
        Frame::world()
    }

    #[test]
    fn plane_identity() {
        let s = SurfaceGeom::Plane(world());
        let e = s.eval(1.0, 2.0);
        assert_eq!(e.point, Vec3::new(1.0, 2.0, 0.0));
        assert_eq!(e.normal, Vec3::Z);
        assert_eq!(s.invert_point(Vec3::new(3.0, 4.0, 0.0)).unwrap(), (3.0, 4.0));
    }

    #[test]
    fn cylinder_closed_form() {
        let s = SurfaceGeom::Cylinder { frame: world(), radius: 2.0 };
        let e = s.eval(0.0, 3.0);
        assert_eq!(e.point, Vec3::new(2.0, 0.0, 3.0));
        assert_eq!(e.normal, Vec3::X);
        let (u, v) = s.invert_point(Vec3::new(0.0, 2.0, 5.0)).unwrap();
        assert!((u - PI / 2.0).abs() < 1e-15);
        assert_eq!(v, 5.0);
    }

    #[test]
    fn sphere_normal_is_position() {
        let s = SurfaceGeom::Sphere { frame: world(), radius: 1.0 };
        for &(u, v) in &[(0.3, 0.2), (2.0, -1.0), (5.5, 1.4), (1.0, FRAC_PI_2)] {
            let e = s.eval(u, v);
            assert!((e.point.norm() - 1.0).abs() < 1e-15);
            assert!((e.point - e.normal).norm() < 1e-15);
        }
        assert!(s.eval(0.5, FRAC_PI_2).singular);
        assert!(!s.eval(0.5, 0.1).singular);
    }

    #[test]
    fn cone_inversion_round_trip_and_normal() {
        let s = SurfaceGeom::Cone { frame: world(), radius: 1.0, semi_angle: 0.4 };
        for &(u, v) in &[(0.1, 0.0), (3.0, 1.5), (6.0, -0.5)] {
            let e = s.eval(u, v);
            let (bu, bv) = s.invert_point(e.point).unwrap();
            assert!((bu - u).abs() < 1e-12 && (bv - v).abs() < 1e-12);
            let d = s.derivs(u, v);
            assert!(e.normal.dot(d.du).abs() < 1e-12 && e.normal.dot(d.dv).abs() < 1e-12);
            assert!(e.normal.dot(d.du.cross(d.dv)) > 0.0);
        }
    }

    #[test]
    fn torus_round_trip() {
        let s = SurfaceGeom::Torus { frame: world(), major: 3.0, minor: 1.0 };
        for &(u, v) in &[(0.1, 0.2), (3.0, 4.0), (6.0, 2.5)] {
            let (bu, bv) = s.invert_point(s.eval(u, v).point).unwrap();
            assert!((bu - u).abs() < 1e-12 && (bv - v).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_normals_match_cross_product_direction() {
        let f = Frame::from_axis_ref(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.3, -0.2, 1.0), Vec3::new(1.0, 0.5, 0.0)).unwrap();
        let surfaces = [
            SurfaceGeom::Plane(f),
            SurfaceGeom::Cylinder { frame: f, radius: 1.5 },
            SurfaceGeom::Cone { frame: f, radius: 1.5, semi_angle: 0.3 },
            SurfaceGeom::Sphere { frame: f, radius: 2.0 },
            SurfaceGeom::Torus { frame: f, major: 4.0, minor: 1.0 },
        ];
        for s in &surfaces {
            for &(u, v) in &[(0.2, 0.3), (2.5, -0.7), (4.0, 1.1)] {
                let e = s.eval(u, v);
                let d = s.derivs(u, v);
                let n = d.du.cross(d.dv).normalized().unwrap();
                assert!((e.normal - n).norm() < 1e-12, "{s:?}");
            }
        }
    }

    #[test]
    fn extrusion_and_revolution_round_trip() {
        let circle = CurveGeom::Circle { frame: world(), radius: 2.0 };
        let ext = SurfaceGeom::Extrusion { curve: Box::new(circle.clone()), dir: Vec3::Z };
        for &(u, v) in &[(0.5, 1.0), (4.0, -2.0)] {
            let (bu, bv) = ext.invert_point(ext.eval(u, v).point).unwrap();
            assert!((bu - u).abs() < 1e-9 && (bv - v).abs() < 1e-9);
        }
        // profile: a slanted line segment as a degree-1 b-spline
        let prof = CurveGeom::BSpline(
            super::super::bspline::BSplineCurve::new(
                1,
                vec![0.0, 0.0, 1.0, 1.0],
                vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 3.0)],
                None,
            )
            .unwrap(),
        );
        let rev = SurfaceGeom::Revolution { curve: Box::new(prof), origin: Vec3::ZERO, axis: Vec3::Z };
        for &(u, v) in &[(0.5, 0.25), (5.0, 0.8)] {
            let (bu, bv) = rev.invert_point(rev.eval(u, v).point).unwrap();
            assert!((bu - u).abs() < 1e-9 && (bv - v).abs() < 1e-9, "{bu} {bv}");
        }
    }

    pub(crate) fn bump_patch() -> SurfaceGeom {
        let mut ctrl = Vec::new();
        for i in 0..5 {
            let mut row = Vec::new();
            for j in 0..4 {
                let z = if (1..4).contains(&i) && (1..3).contains(&j) { 0.8 } else { 0.0 };
                row.push(Vec3::new(i as f64, j as f64 * 1.2, z + 0.1 * i as f64));
            }
            ctrl.push(row);
        }
        let uk = vec![0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0];
        let vk = vec![0.0, 0.0, 0.0, 1.0, 2.0, 2.0, 2.0];
        SurfaceGeom::BSpline(BSplineSurface::new(3, 2, uk, vk, ctrl, None).unwrap())
    }

    #[test]
    fn bspline_inversion_round_trip() {
        // deterministic LCG so the oracle needs no RNG dependency
        let s = bump_patch();
        let mut state: u64 = 0x9E3779B97F4A7C15;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let u = next();
            let v = 2.0 * next();
            let p = s.eval(u, v).point;
            let (bu, bv) = s.invert_point(p).unwrap();
            assert!((bu - u).abs() < 1e-6 && (bv - v).abs() < 1e-6, "({u},{v}) -> ({bu},{bv})");
        }
    }
}
