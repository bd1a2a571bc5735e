use alloc::vec;
use alloc::vec::Vec;

use super::Tolerances;
use crate::brep::{CurveGeom, TopoEdge};
use crate::geom::{acos, angle_between, asin_clamped, ceil, Vec3, FRAC_PI_2};

/// Maximum bisection depth for adaptively sampled curves.
const MAX_DEPTH: u32 = 16;

/// Increasing curve parameters covering `[t0, t1]` densely enough for the
/// chordal, angular and length bounds. The first and last entries are
/// exactly `t0` and `t1`.
pub fn edge_params(edge: &TopoEdge, tol: &Tolerances) -> Vec<f64> {
    let (t0, t1) = (edge.t0, edge.t1);
    if !(t1 > t0) {
        return vec![t0, t1];
    }
    match &edge.curve {
        CurveGeom::Line { .. } => {
            let len = edge.curve.eval(t0).dist(edge.curve.eval(t1));
            uniform(t0, t1, segments_for_length(len, tol))
        }
        CurveGeom::Circle { radius, .. } => {
            let step = circle_step(*radius, tol);
            let n = ceil((t1 - t0) / step).max(1.0) as usize;
            let n = if edge.closed { n.max(3) } else { n };
            uniform(t0, t1, n)
        }
        CurveGeom::Polyline(pts) => {
            let mut out = vec![t0];
            let mut k = libm::floor(t0) as usize;
            while (k as f64) < t1 {
                let a = (k as f64).max(t0);
                let b = ((k + 1) as f64).min(t1);
                if b > a {
                    let i = k.min(pts.len().saturating_sub(2));
                    let len = pts[i].dist(pts[i + 1]) * (b - a);
                    let n = segments_for_length(len, tol);
                    for j in 1..=n {
                        out.push(a + (b - a) * j as f64 / n as f64);
                    }
                }
                k += 1;
            }
            *out.last_mut().unwrap() = t1;
            out
        }
        curve => {
            let mut seeds = match curve {
                CurveGeom::BSpline(b) => b.breakpoints().into_iter().filter(|&k| k > t0 && k < t1).collect(),
                _ => Vec::new(),
            };
            seeds.insert(0, t0);
            seeds.push(t1);
            // quarter-turn seeding for periodic curves
            let mut base = Vec::new();
            for w in seeds.windows(2) {
                let n = if curve.period().is_some() { ceil((w[1] - w[0]) / FRAC_PI_2).max(1.0) as usize } else { 2 };
                for j in 0..n {
                    base.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
                }
            }
            base.push(t1);
            let mut out = vec![t0];
            for w in base.windows(2) {
                bisect(curve, w[0], w[1], tol, 0, &mut out);
            }
            *out.last_mut().unwrap() = t1;
            out
        }
    }
}

fn segments_for_length(len: f64, tol: &Tolerances) -> usize {
    match tol.max_edge {
        Some(m) if m > 0.0 => ceil(len / m).max(1.0) as usize,
        _ => 1,
    }
}

/// Largest angular step on a circle of radius `r` meeting all bounds.
pub(crate) fn circle_step(r: f64, tol: &Tolerances) -> f64 {
    let mut step = tol.angle.min(FRAC_PI_2);
    if tol.chord < r {
        step = step.min(2.0 * acos(1.0 - tol.chord / r));
    }
    if let Some(m) = tol.max_edge {
        step = step.min(2.0 * asin_clamped(m / (2.0 * r)));
    }
    step.max(1e-4)
}

fn uniform(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..=n).map(|j| t0 + (t1 - t0) * j as f64 / n as f64).collect();
    out[n] = t1;
    out
}

fn bisect(curve: &CurveGeom, a: f64, b: f64, tol: &Tolerances, depth: u32, out: &mut Vec<f64>) {
    let (pa, da) = curve.eval_d1(a);
    let (pb, db) = curve.eval_d1(b);
    let m = 0.5 * (a + b);
    let (pm, dm) = curve.eval_d1(m);
    let split = depth < MAX_DEPTH
        && (segment_distance(pm, pa, pb) > tol.chord
            || turning(da, dm) > tol.angle
            || turning(dm, db) > tol.angle
            || tol.max_edge.is_some_and(|e| pa.dist(pb) > e));
    if split {
        bisect(curve, a, m, tol, depth + 1, out);
        bisect(curve, m, b, tol, depth + 1, out);
    } else {
        out.push(b);
    }
}

fn turning(a: Vec3, b: Vec3) -> f64 {
    if a.norm_sq() == 0.0 || b.norm_sq() == 0.0 {
        return 0.0;
    }
    angle_between(a, b)
}

/// Distance from `p` to the segment `ab`.
pub(crate) fn segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sq();
    let t = if l2 > 0.0 { ((p - a).dot(ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    p.dist(a + ab * t)
}

/// Points along the edge from `start` to `end` (vertex positions exactly at
/// the ends).
pub fn edge_points(edge: &TopoEdge, params: &[f64]) -> Vec<Vec3> {
    let n = params.len();
    let mut pts: Vec<Vec3> = params.iter().map(|&t| edge.curve.eval(t)).collect();
    if !edge.curve_forward {
        pts.reverse();
    }
    pts[0] = edge.start;
    pts[n - 1] = edge.end;
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brep::build_brep;
    use crate::geom::TAU;
    use crate::synth;

    fn tol(chord: f64, angle_deg: f64, max_edge: Option<f64>) -> Tolerances {
        Tolerances { chord, angle: angle_deg.to_radians(), max_edge, degenerate_area: 0.0 }
    }

    #[test]
    fn circle_sampling_meets_sagitta_bound() {
        let s = build_brep(&synth::full_cylinder(5.0, 10.0)).unwrap();
        let circle = s.edges.iter().find(|e| e.closed).unwrap();
        let t = tol(0.01, 45.0, None);
        let p = edge_params(circle, &t);
        assert!((p[p.len() - 1] - p[0] - TAU).abs() < 1e-12);
        for w in p.windows(2) {
            let sag = 5.0 * (1.0 - libm::cos(0.5 * (w[1] - w[0])));
            assert!(sag <= 0.01 + 1e-12);
        }
    }

    #[test]
    fn line_split_by_max_edge() {
        let s = build_brep(&synth::cube(10.0)).unwrap();
        let p = edge_params(&s.edges[0], &tol(0.1, 20.0, Some(3.0)));
        assert_eq!(p.len(), 5);
        assert_eq!(edge_params(&s.edges[0], &tol(0.1, 20.0, None)).len(), 2);
    }

    #[test]
    fn bspline_edges_meet_chord_bound() {
        let s = build_brep(&synth::bspline_sheet(10.0, 3.0)).unwrap();
        let t = tol(0.01, 20.0, None);
        for e in &s.edges {
            let p = edge_params(e, &t);
            for w in p.windows(2) {
                for k in 1..4 {
                    let tm = w[0] + (w[1] - w[0]) * k as f64 / 4.0;
                    let d = segment_distance(e.curve.eval(tm), e.curve.eval(w[0]), e.curve.eval(w[1]));
                    assert!(d <= 0.02, "{d}");
                }
            }
        }
    }
}
