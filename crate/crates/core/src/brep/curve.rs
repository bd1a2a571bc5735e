use alloc::vec::Vec;

use super::bspline::BSplineCurve;
use super::Frame;
use crate::geom::{atan2, cos, sin, wrap_angle, Vec3, TAU};

/// 3D curve geometry carried by an edge.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveGeom {
    /// `origin + t * dir`, `dir` unit length (t is arc length).
    Line { origin: Vec3, dir: Vec3 },
    /// `center + r (cos t x + sin t y)`.
    Circle { frame: Frame, radius: f64 },
    /// `center + a cos t x + b sin t y`.
    Ellipse { frame: Frame, semi1: f64, semi2: f64 },
    BSpline(BSplineCurve),
    /// Piecewise-linear stand-in for curve types without an evaluator;
    /// parameter `t` in `[0, n-1]`.
    Polyline(Vec<Vec3>),
}

impl CurveGeom {
    pub fn eval(&self, t: f64) -> Vec3 {
        self.eval_d1(t).0
    }

    /// Point and first derivative with respect to the curve parameter.
    pub fn eval_d1(&self, t: f64) -> (Vec3, Vec3) {
        match self {
            CurveGeom::Line { origin, dir } => (*origin + *dir * t, *dir),
            CurveGeom::Circle { frame, radius } => {
                let (s, c) = (sin(t), cos(t));
                (
                    frame.origin + (frame.x * c + frame.y * s) * *radius,
                    (frame.y * c - frame.x * s) * *radius,
                )
            }
            CurveGeom::Ellipse { frame, semi1, semi2 } => {
                let (s, c) = (sin(t), cos(t));
                (
                    frame.origin + frame.x * (semi1 * c) + frame.y * (semi2 * s),
                    frame.y * (semi2 * c) - frame.x * (semi1 * s),
                )
            }
            CurveGeom::BSpline(b) => b.eval_d1(t),
            CurveGeom::Polyline(pts) => {
                let n = pts.len();
                if n == 1 {
                    return (pts[0], Vec3::ZERO);
                }
                let t = t.clamp(0.0, (n - 1) as f64);
                let i = (libm::floor(t) as usize).min(n - 2);
                let f = t - i as f64;
                (pts[i].lerp(pts[i + 1], f), pts[i + 1] - pts[i])
            }
        }
    }

    /// Period for closed analytic curves.
    pub fn period(&self) -> Option<f64> {
        match self {
            CurveGeom::Circle { .. } | CurveGeom::Ellipse { .. } => Some(TAU),
            _ => None,
        }
    }

    /// Natural parameter bounds, `None` when unbounded.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            CurveGeom::Line { .. } => None,
            CurveGeom::Circle { .. } | CurveGeom::Ellipse { .. } => Some((0.0, TAU)),
            CurveGeom::BSpline(b) => Some(b.domain()),
            CurveGeom::Polyline(p) => Some((0.0, (p.len().max(1) - 1) as f64)),
        }
    }

    /// Parameter of the curve point closest to `p`.
    ///
    /// Closed form for lines, circles and ellipses (the ellipse value is the
    /// eccentric anomaly of the projected point, refined by Newton).
    /// Periodic results are in `[0, 2π)`.
    pub fn closest_param(&self, p: Vec3) -> f64 {
        match self {
            CurveGeom::Line { origin, dir } => (p - *origin).dot(*dir),
            CurveGeom::Circle { frame, .. } => {
                let d = p - frame.origin;
                wrap_angle(atan2(d.dot(frame.y), d.dot(frame.x)))
            }
            CurveGeom::Ellipse { frame, semi1, semi2 } => {
                let d = p - frame.origin;
                let t0 = atan2(d.dot(frame.y) / semi2, d.dot(frame.x) / semi1);
                wrap_angle(self.refine_param(p, t0, None))
            }
            CurveGeom::BSpline(b) => {
                let (a, e) = b.domain();
                let t0 = self.coarse_param(p, a, e, 64);
                self.refine_param(p, t0, Some((a, e)))
            }
            CurveGeom::Polyline(pts) => {
                let mut best = (f64::INFINITY, 0.0);
                for i in 0..pts.len().saturating_sub(1) {
                    let (a, b) = (pts[i], pts[i + 1]);
                    let ab = b - a;
                    let l2 = ab.norm_sq();
                    let f = if l2 > 0.0 { ((p - a).dot(ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
                    let d = p.dist_sq(a + ab * f);
                    if d < best.0 {
                        best = (d, i as f64 + f);
                    }
                }
                best.1
            }
        }
    }

    fn coarse_param(&self, p: Vec3, a: f64, b: f64, n: usize) -> f64 {
        let mut best = (f64::INFINITY, a);
        for k in 0..=n {
            let t = a + (b - a) * k as f64 / n as f64;
            let d = self.eval(t).dist_sq(p);
            if d < best.0 {
                best = (d, t);
            }
        }
        best.1
    }

    /// Newton on `(C(t) - p) · C'(t) = 0` using a finite-difference second derivative.
    fn refine_param(&self, p: Vec3, mut t: f64, bounds: Option<(f64, f64)>) -> f64 {
        let span = bounds.map_or(1.0, |(a, b)| (b - a).abs().max(1e-12));
        let h = 1e-6 * span;
        for _ in 0..30 {
            let (c, d1) = self.eval_d1(t);
            let (_, d1b) = self.eval_d1(t + h);
            let d2 = (d1b - d1) / h;
            let r = c - p;
            let f = r.dot(d1);
            let df = d1.norm_sq() + r.dot(d2);
            if df.abs() < 1e-300 {
                break;
            }
            let mut step = f / df;
            let lim = 0.25 * span;
            step = step.clamp(-lim, lim);
            let mut nt = t - step;
            if let Some((a, b)) = bounds {
                nt = nt.clamp(a, b);
            }
            if (nt - t).abs() < 1e-14 * span {
                t = nt;
                break;
            }
            t = nt;
        }
        t
    }

    pub(crate) fn transformed(&self, m: &crate::geom::RigidMotion) -> CurveGeom {
        match self {
            CurveGeom::Line { origin, dir } => CurveGeom::Line {
                origin: m.apply_point(*origin),
                dir: m.apply_vector(*dir),
            },
            CurveGeom::Circle { frame, radius } => CurveGeom::Circle {
                frame: frame.transformed(m),
                radius: *radius,
            },
            CurveGeom::Ellipse { frame, semi1, semi2 } => CurveGeom::Ellipse {
                frame: frame.transformed(m),
                semi1: *semi1,
                semi2: *semi2,
            },
            CurveGeom::BSpline(b) => {
                let mut b = b.clone();
                b.ctrl.iter_mut().for_each(|c| *c = m.apply_point(*c));
                CurveGeom::BSpline(b)
            }
            CurveGeom::Polyline(p) => CurveGeom::Polyline(p.iter().map(|q| m.apply_point(*q)).collect()),
        }
    }
}
