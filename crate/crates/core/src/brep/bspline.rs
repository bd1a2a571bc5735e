//! Non-uniform (rational) B-spline curves and tensor-product surfaces.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::Vec3;

/// Index `i` of the knot span with `knots[i] <= t < knots[i + 1]`,
/// clamped to the valid range `[degree, n_ctrl - 1]`.
pub fn find_span(knots: &[f64], degree: usize, n_ctrl: usize, t: f64) -> usize {
    let hi = n_ctrl - 1;
    if t >= knots[hi + 1] {
        return hi;
    }
    if t <= knots[degree] {
        return degree;
    }
    let (mut lo, mut up) = (degree, hi + 1);
    while up - lo > 1 {
        let mid = (lo + up) / 2;
        if t < knots[mid] {
            up = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Basis functions and their first derivatives on `span` at `t`.
/// Returns `(values, first_derivatives)`, each of length `degree + 1`.
pub fn basis_with_derivative(knots: &[f64], degree: usize, span: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let p = degree;
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let tmp = if ndu[j][r] != 0.0 { ndu[r][j - 1] / ndu[j][r] } else { 0.0 };
            ndu[r][j] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        ndu[j][j] = saved;
    }
    let values: Vec<f64> = (0..=p).map(|j| ndu[j][p]).collect();
    let mut ders = vec![0.0; p + 1];
    if p >= 1 {
        for r in 0..=p {
            let mut d = 0.0;
            if r >= 1 {
                let denom = ndu[p][r - 1];
                if denom != 0.0 {
                    d += ndu[r - 1][p - 1] / denom;
                }
            }
            if r < p {
                let denom = ndu[p][r];
                if denom != 0.0 {
                    d -= ndu[r][p - 1] / denom;
                }
            }
            ders[r] = d * p as f64;
        }
    }
    (values, ders)
}

/// Expand `(multiplicities, distinct knots)` into a full knot vector.
pub fn expand_knots(mults: &[i64], knots: &[f64]) -> Option<Vec<f64>> {
    if mults.len() != knots.len() {
        return None;
    }
    let mut out = Vec::new();
    for (&m, &k) in mults.iter().zip(knots) {
        if m < 0 {
            return None;
        }
        out.extend(core::iter::repeat_n(k, m as usize));
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineCurve {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub ctrl: Vec<Vec3>,
    pub weights: Option<Vec<f64>>,
}

impl BSplineCurve {
    pub fn new(degree: usize, knots: Vec<f64>, ctrl: Vec<Vec3>, weights: Option<Vec<f64>>) -> Option<Self> {
        if degree == 0 || ctrl.len() <= degree || knots.len() != ctrl.len() + degree + 1 {
            return None;
        }
        if weights.as_ref().is_some_and(|w| w.len() != ctrl.len() || w.iter().any(|&x| !(x > 0.0))) {
            return None;
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return None;
        }
        Some(BSplineCurve { degree, knots, ctrl, weights })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.ctrl.len()])
    }

    /// Point and first derivative.
    pub fn eval_d1(&self, t: f64) -> (Vec3, Vec3) {
        let (a, b) = self.domain();
        let t = t.clamp(a, b);
        let span = find_span(&self.knots, self.degree, self.ctrl.len(), t);
        let (n, dn) = basis_with_derivative(&self.knots, self.degree, span, t);
        let mut pt = Vec3::ZERO;
        let mut dpt = Vec3::ZERO;
        let mut w = 0.0;
        let mut dw = 0.0;
        for j in 0..=self.degree {
            let i = span - self.degree + j;
            let wi = self.weights.as_ref().map_or(1.0, |ws| ws[i]);
            pt += self.ctrl[i] * (n[j] * wi);
            dpt += self.ctrl[i] * (dn[j] * wi);
            w += n[j] * wi;
            dw += dn[j] * wi;
        }
        let p = pt / w;
        (p, (dpt - p * dw) / w)
    }

    pub fn eval(&self, t: f64) -> Vec3 {
        self.eval_d1(t).0
    }

    /// Distinct knot values inside the domain (span boundaries).
    pub fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.domain();
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots[self.degree..=self.ctrl.len()] {
            if k >= a && k <= b && out.last().is_none_or(|&l| k > l) {
                out.push(k);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineSurface {
    pub udeg: usize,
    pub vdeg: usize,
    pub uknots: Vec<f64>,
    pub vknots: Vec<f64>,
    /// `ctrl[i][j]`, `i` along u.
    pub ctrl: Vec<Vec<Vec3>>,
    pub weights: Option<Vec<Vec<f64>>>,
}

/// Surface point with first partial derivatives.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceDerivs {
    pub point: Vec3,
    pub du: Vec3,
    pub dv: Vec3,
}

impl BSplineSurface {
    pub fn new(
        udeg: usize,
        vdeg: usize,
        uknots: Vec<f64>,
        vknots: Vec<f64>,
        ctrl: Vec<Vec<Vec3>>,
        weights: Option<Vec<Vec<f64>>>,
    ) -> Option<Self> {
        let nu = ctrl.len();
        let nv = ctrl.first()?.len();
        if udeg == 0 || vdeg == 0 || nu <= udeg || nv <= vdeg || ctrl.iter().any(|r| r.len() != nv) {
            return None;
        }
        if uknots.len() != nu + udeg + 1 || vknots.len() != nv + vdeg + 1 {
            return None;
        }
        if let Some(w) = &weights {
            if w.len() != nu || w.iter().any(|r| r.len() != nv || r.iter().any(|&x| !(x > 0.0))) {
                return None;
            }
        }
        if uknots.windows(2).any(|w| w[1] < w[0]) || vknots.windows(2).any(|w| w[1] < w[0]) {
            return None;
        }
        Some(BSplineSurface { udeg, vdeg, uknots, vknots, ctrl, weights })
    }

    pub fn u_domain(&self) -> (f64, f64) {
        (self.uknots[self.udeg], self.uknots[self.ctrl.len()])
    }

    pub fn v_domain(&self) -> (f64, f64) {
        (self.vknots[self.vdeg], self.vknots[self.ctrl[0].len()])
    }

    pub fn derivs(&self, u: f64, v: f64) -> SurfaceDerivs {
        let (u0, u1) = self.u_domain();
        let (v0, v1) = self.v_domain();
        let u = u.clamp(u0, u1);
        let v = v.clamp(v0, v1);
        let nu = self.ctrl.len();
        let nv = self.ctrl[0].len();
        let su = find_span(&self.uknots, self.udeg, nu, u);
        let sv = find_span(&self.vknots, self.vdeg, nv, v);
        let (bu, dbu) = basis_with_derivative(&self.uknots, self.udeg, su, u);
        let (bv, dbv) = basis_with_derivative(&self.vknots, self.vdeg, sv, v);
        let (mut a, mut au, mut av) = (Vec3::ZERO, Vec3::ZERO, Vec3::ZERO);
        let (mut w, mut wu, mut wv) = (0.0, 0.0, 0.0);
        for (k, (&nk, &dnk)) in bu.iter().zip(&dbu).enumerate() {
            let i = su - self.udeg + k;
            for (l, (&ml, &dml)) in bv.iter().zip(&dbv).enumerate() {
                let j = sv - self.vdeg + l;
                let wij = self.weights.as_ref().map_or(1.0, |ws| ws[i][j]);
                let c = self.ctrl[i][j] * wij;
                a += c * (nk * ml);
                au += c * (dnk * ml);
                av += c * (nk * dml);
                w += nk * ml * wij;
                wu += dnk * ml * wij;
                wv += nk * dml * wij;
            }
        }
        let p = a / w;
        SurfaceDerivs {
            point: p,
            du: (au - p * wu) / w,
            dv: (av - p * wv) / w,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_derivative_sum() {
        let knots = [0.0, 0.0, 0.0, 0.0, 0.3, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0];
        let n_ctrl = knots.len() - 4;
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            let span = find_span(&knots, 3, n_ctrl, t);
            let (n, d) = basis_with_derivative(&knots, 3, span, t);
            let s: f64 = n.iter().sum();
            let ds: f64 = d.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(ds.abs() < 1e-9);
        }
    }

    #[test]
    fn curve_derivative_matches_finite_difference() {
        let c = BSplineCurve::new(
            3,
            vec![0.0, 0.0, 0.0, 0.0, 0.4, 1.0, 1.0, 1.0, 1.0],
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 2.0, 0.0),
                Vec3::new(2.0, -1.0, 1.0),
                Vec3::new(3.0, 0.5, 0.0),
                Vec3::new(4.0, 0.0, 2.0),
            ],
            Some(vec![1.0, 0.7, 1.3, 1.0, 2.0]),
        )
        .unwrap();
        for &t in &[0.1, 0.35, 0.6, 0.9] {
            let h = 1e-6;
            let fd = (c.eval(t + h) - c.eval(t - h)) / (2.0 * h);
            let (_, d) = c.eval_d1(t);
            assert!((fd - d).norm() < 1e-5, "t={t}");
        }
    }

    #[test]
    fn rational_quarter_circle_is_exact() {
        let w = core::f64::consts::FRAC_1_SQRT_2;
        let c = BSplineCurve::new(
            2,
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            Some(vec![1.0, w, 1.0]),
        )
        .unwrap();
        for k in 0..=10 {
            let p = c.eval(k as f64 / 10.0);
            assert!((p.norm() - 1.0).abs() < 1e-14);
        }
    }
}
