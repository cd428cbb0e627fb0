//! Maximum-weight bipartite assignment (Hungarian method).
//!
//! Weights are a dense row-major `rows x cols` table. The solver runs the
//! shortest-augmenting-path form with potentials, transposing so the smaller
//! side is the one fully assigned.

use alloc::vec;
use alloc::vec::Vec;

/// Assignment maximizing the total weight over all complete matchings of the
/// smaller side. Returns `(row, col)` pairs sorted by row.
///
/// Deterministic for a given table. Weights must be finite.
pub fn max_weight_assignment(weights: &[f64], rows: usize, cols: usize) -> Vec<(usize, usize)> {
    assert_eq!(weights.len(), rows * cols, "weight table shape");
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let transpose = rows > cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    let cost = |i: usize, j: usize| {
        let w = if transpose { weights[j * cols + i] } else { weights[i * cols + j] };
        -w
    };
    // 1-based potentials; column 0 is the virtual start.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
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
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| owner[j] != 0)
        .map(|j| if transpose { (j - 1, owner[j] - 1) } else { (owner[j] - 1, j - 1) })
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Maximum-weight matching restricted to pairs accepted by `admit`.
///
/// Rejected pairs are given weight zero before solving and removed from the
/// result, so with non-negative weights this is the optimal matching over
/// admissible pairs.
pub fn gated_assignment(
    weights: &[f64],
    rows: usize,
    cols: usize,
    admit: impl Fn(f64) -> bool,
) -> Vec<(usize, usize)> {
    let gated: Vec<f64> = weights.iter().map(|&w| if admit(w) { w } else { 0.0 }).collect();
    max_weight_assignment(&gated, rows, cols)
        .into_iter()
        .filter(|&(i, j)| admit(weights[i * cols + j]))
        .collect()
}
