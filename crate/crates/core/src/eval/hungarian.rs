//! Maximum-weight bipartite matching on a rectangular count matrix.

use alloc::vec;
use alloc::vec::Vec;

/// Assignment maximizing the total weight. `weights[r][c]` is the overlap of
/// row `r` and column `c`; the matrix is padded to square with zeros.
/// Returns, per row, the matched column or `None` when the row was paired
/// with padding.
pub fn max_weight_matching(weights: &[Vec<u64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| -> i128 {
        if i < rows && j < cols {
            -(weights[i][j] as i128)
        } else {
            0
        }
    };
    // potentials formulation, 1-based with a sentinel column 0
    let mut u = vec![0i128; n + 1];
    let mut v = vec![0i128; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i128::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i128::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; rows];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols {
            out[i - 1] = Some(j - 1);
        }
    }
    out
}

/// Total weight of an assignment.
pub fn matching_weight(weights: &[Vec<u64>], m: &[Option<usize>]) -> u64 {
    m.iter().enumerate().filter_map(|(r, c)| c.map(|c| weights[r][c])).sum()
}

#[cfg(test)]
pub(crate) fn brute_force_best(weights: &[Vec<u64>]) -> u64 {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    let w = |i: usize, j: usize| if i < rows && j < cols { weights[i][j] } else { 0 };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = 0;
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let score = |perm: &[usize]| (0..n).map(|i| w(i, perm[i])).sum::<u64>();
    best = best.max(score(&perm));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.max(score(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}
