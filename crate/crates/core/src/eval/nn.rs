//! Exact nearest-neighbour queries over points and triangles using a
//! uniform grid. Ties resolve to the smaller item index.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{floor, Aabb, Vec3};

struct Grid {
    origin: Vec3,
    cell: f64,
    dims: [usize; 3],
    start: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    fn build(boxes: &[(Vec3, Vec3)]) -> Grid {
        let bb = Aabb::from_points(boxes.iter().flat_map(|b| [b.0, b.1]));
        let n = boxes.len().max(1) as f64;
        let ext = bb.max - bb.min;
        let diag = ext.norm();
        let mut cell = if diag > 0.0 { diag / (2.0 * libm::cbrt(n)).max(1.0) } else { 1.0 };
        let dims_for = |cell: f64| [ext.x, ext.y, ext.z].map(|e| (floor(e / cell) as usize + 1).max(1));
        let mut dims = dims_for(cell);
        while dims[0] * dims[1] * dims[2] > 8 * boxes.len() + 64 {
            cell *= 1.5;
            dims = dims_for(cell);
        }
        let mut g = Grid { origin: bb.min, cell, dims, start: Vec::new(), items: Vec::new() };
        let ranges: Vec<[[usize; 2]; 3]> = boxes.iter().map(|b| g.cell_range(b.0, b.1)).collect();
        let ncell = dims[0] * dims[1] * dims[2];
        let mut count = vec![0u32; ncell + 1];
        for r in &ranges {
            g.for_cells(r, |c| count[c + 1] += 1);
        }
        for i in 0..ncell {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut items = vec![0u32; count[ncell] as usize];
        for (i, r) in ranges.iter().enumerate() {
            g.for_cells(r, |c| {
                items[fill[c] as usize] = i as u32;
                fill[c] += 1;
            });
        }
        g.start = count;
        g.items = items;
        g
    }

    fn coord(&self, p: Vec3) -> [usize; 3] {
        let rel = [p.x - self.origin.x, p.y - self.origin.y, p.z - self.origin.z];
        core::array::from_fn(|a| {
            let c = floor(rel[a] / self.cell);
            if c.is_nan() || c < 0.0 {
                0
            } else {
                (c as usize).min(self.dims[a] - 1)
            }
        })
    }

    fn cell_range(&self, lo: Vec3, hi: Vec3) -> [[usize; 2]; 3] {
        let (a, b) = (self.coord(lo), self.coord(hi));
        core::array::from_fn(|k| [a[k], b[k]])
    }

    fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    fn for_cells(&self, r: &[[usize; 2]; 3], mut f: impl FnMut(usize)) {
        for z in r[2][0]..=r[2][1] {
            for y in r[1][0]..=r[1][1] {
                for x in r[0][0]..=r[0][1] {
                    f(self.index([x, y, z]));
                }
            }
        }
    }

    /// Item minimizing `(dist2(item), item)`.
    fn nearest(&self, q: Vec3, dist2: impl Fn(u32) -> f64) -> Option<u32> {
        if self.items.is_empty() {
            return None;
        }
        let c = self.coord(q);
        let qc = [q.x, q.y, q.z];
        let mut best: Option<(f64, u32)> = None;
        let max_r = self.dims.iter().copied().max().unwrap();
        for r in 0..=max_r {
            let lo: [isize; 3] = core::array::from_fn(|a| c[a] as isize - r as isize);
            let hi: [isize; 3] = core::array::from_fn(|a| c[a] as isize + r as isize);
            for z in lo[2].max(0)..=hi[2].min(self.dims[2] as isize - 1) {
                for y in lo[1].max(0)..=hi[1].min(self.dims[1] as isize - 1) {
                    for x in lo[0].max(0)..=hi[0].min(self.dims[0] as isize - 1) {
                        let on_shell = x == lo[0] || x == hi[0] || y == lo[1] || y == hi[1] || z == lo[2] || z == hi[2];
                        if !on_shell {
                            continue;
                        }
                        let ci = self.index([x as usize, y as usize, z as usize]);
                        for &it in &self.items[self.start[ci] as usize..self.start[ci + 1] as usize] {
                            let d = dist2(it);
                            let better = match best {
                                None => true,
                                Some((bd, bi)) => d < bd || (d == bd && it < bi),
                            };
                            if better {
                                best = Some((d, it));
                            }
                        }
                    }
                }
            }
            // distance from q to the unexplored part of the grid
            let mut bound = f64::INFINITY;
            for a in 0..3 {
                if lo[a] > 0 {
                    let face = self.origin_axis(a) + lo[a] as f64 * self.cell;
                    bound = bound.min((qc[a] - face).max(0.0));
                }
                if hi[a] < self.dims[a] as isize - 1 {
                    let face = self.origin_axis(a) + (hi[a] + 1) as f64 * self.cell;
                    bound = bound.min((face - qc[a]).max(0.0));
                }
            }
            if let Some((bd, _)) = best {
                if bound.is_infinite() || bd < bound * bound {
                    break;
                }
            } else if bound.is_infinite() {
                break;
            }
        }
        best.map(|b| b.1)
    }

    fn origin_axis(&self, a: usize) -> f64 {
        [self.origin.x, self.origin.y, self.origin.z][a]
    }
}

pub struct PointIndex<'a> {
    points: &'a [Vec3],
    grid: Grid,
}

impl<'a> PointIndex<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        let boxes: Vec<(Vec3, Vec3)> = points.iter().map(|&p| (p, p)).collect();
        PointIndex { points, grid: Grid::build(&boxes) }
    }

    pub fn nearest(&self, q: Vec3) -> Option<usize> {
        self.grid.nearest(q, |i| self.points[i as usize].dist_sq(q)).map(|i| i as usize)
    }
}

pub struct TriangleIndex<'a> {
    tris: &'a [[Vec3; 3]],
    grid: Grid,
}

impl<'a> TriangleIndex<'a> {
    pub fn new(tris: &'a [[Vec3; 3]]) -> Self {
        let boxes: Vec<(Vec3, Vec3)> = tris.iter().map(|t| (t[0].min(t[1]).min(t[2]), t[0].max(t[1]).max(t[2]))).collect();
        TriangleIndex { tris, grid: Grid::build(&boxes) }
    }

    pub fn nearest(&self, q: Vec3) -> Option<usize> {
        self.grid.nearest(q, |i| closest_on_triangle(q, self.tris[i as usize]).dist_sq(q)).map(|i| i as usize)
    }
}

/// Closest point to `p` on triangle `abc`.
pub fn closest_on_triangle(p: Vec3, [a, b, c]: [Vec3; 3]) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_point(pts: &[Vec3], q: Vec3) -> usize {
        let mut best = 0;
        for i in 1..pts.len() {
            if pts[i].dist_sq(q) < pts[best].dist_sq(q) {
                best = i;
            }
        }
        best
    }

    fn brute_tri(tris: &[[Vec3; 3]], q: Vec3) -> usize {
        let d = |i: usize| closest_on_triangle(q, tris[i]).dist_sq(q);
        let mut best = 0;
        for i in 1..tris.len() {
            if d(i) < d(best) {
                best = i;
            }
        }
        best
    }

    fn v() -> impl Strategy<Value = Vec3> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn point_index_matches_linear_scan(
            pts in proptest::collection::vec(v(), 1..200),
            qs in proptest::collection::vec((-15.0..15.0f64, -15.0..15.0f64, -15.0..15.0f64), 1..40),
        ) {
            let idx = PointIndex::new(&pts);
            for (x, y, z) in qs {
                let q = Vec3::new(x, y, z);
                prop_assert_eq!(idx.nearest(q), Some(brute_point(&pts, q)));
            }
        }

        #[test]
        fn triangle_index_matches_linear_scan(
            tris in proptest::collection::vec((v(), v(), v()), 1..80),
            qs in proptest::collection::vec(v(), 1..40),
        ) {
            let tris: Vec<[Vec3; 3]> = tris.into_iter().map(|(a, b, c)| [a, b, c]).collect();
            let idx = TriangleIndex::new(&tris);
            for q in qs {
                let got = idx.nearest(q).unwrap();
                let want = brute_tri(&tris, q);
                let d = |i: usize| closest_on_triangle(q, tris[i]).dist_sq(q);
                prop_assert!(got == want || d(got) == d(want));
            }
        }

        #[test]
        fn closest_point_is_no_farther_than_vertices_and_samples(
            a in v(), b in v(), c in v(), p in v(), s in 0.0..1.0f64, t in 0.0..1.0f64,
        ) {
            let cp = closest_on_triangle(p, [a, b, c]);
            let d = cp.dist(p);
            let (s, t) = if s + t > 1.0 { (1.0 - s, 1.0 - t) } else { (s, t) };
            let inner = a + (b - a) * s + (c - a) * t;
            prop_assert!(d <= inner.dist(p) + 1e-9);
            prop_assert!(d <= a.dist(p) + 1e-9 && d <= b.dist(p) + 1e-9 && d <= c.dist(p) + 1e-9);
        }
    }

    #[test]
    fn ties_resolve_to_smaller_index() {
        let pts = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
        let idx = PointIndex::new(&pts);
        assert_eq!(idx.nearest(Vec3::ZERO), Some(0));
        assert_eq!(idx.nearest(Vec3::new(2.0, 0.0, 0.0)), Some(0));
    }

    #[test]
    fn degenerate_flat_and_single_inputs() {
        let pts = [Vec3::new(3.0, 3.0, 3.0)];
        assert_eq!(PointIndex::new(&pts).nearest(Vec3::ZERO), Some(0));
        assert_eq!(PointIndex::new(&[]).nearest(Vec3::ZERO), None);
        let flat: Vec<Vec3> = (0..50).map(|i| Vec3::new(i as f64, (i * 7 % 13) as f64, 0.0)).collect();
        let idx = PointIndex::new(&flat);
        for i in 0..50 {
            let q = Vec3::new(i as f64 + 0.2, 1.0, 0.3);
            assert_eq!(idx.nearest(q), Some(brute_point(&flat, q)));
        }
    }
}
