//! Low-rank + sparse + residual decomposition of a video matrix.
//!
//! The Casorati matrix `D` of a frame stack is split as `D = L + X + N` with
//! `L` low-rank background, `X` sparse shadow term and `N` the residual
//! clutter/noise. The split minimizes
//!
//! ```text
//! tau * ||L||_* + lambda * ||X||_1 + 0.5 * ||D - L - X||_F^2
//! ```
//!
//! by exact block-coordinate steps: `L <- svt(D - X, tau)` then
//! `X <- shrink(D - L, lambda)`. Each step is the exact minimizer over its
//! block, so the objective never increases.

use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::frames::FrameStack;

/// Which sign of the sparse term carries the shadows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Polarity {
    /// Shadows are darker than the background (negative `X`).
    #[default]
    DarkShadows,
    /// Shadows are brighter than the background (positive `X`).
    BrightShadows,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DecomposeParams {
    /// Singular value threshold. `None` derives it from each block, see [`default_tau`].
    pub tau: Option<f64>,
    /// Entrywise shrinkage threshold. `None` uses `3 / sqrt(max(rows, cols))` per block.
    pub lambda: Option<f64>,
    /// Relative change `(||dL|| + ||dX||) / ||D||` below which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Frames per independently decomposed block. `None` means the whole video.
    pub window: Option<usize>,
    pub polarity: Polarity,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        DecomposeParams {
            tau: None,
            lambda: None,
            tol: 1e-4,
            max_iter: 200,
            window: None,
            polarity: Polarity::DarkShadows,
        }
    }
}

impl DecomposeParams {
    pub fn validate(&self, frames: usize) -> Result<()> {
        if let Some(tau) = self.tau {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::param("tau", "must be positive"));
            }
        }
        if let Some(lambda) = self.lambda {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::param("lambda", "must be positive"));
            }
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::param("tol", "must lie in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be at least 1"));
        }
        if let Some(window) = self.window {
            if window == 0 || window > frames {
                return Err(Error::param("window", alloc::format!("must lie in [1, {frames}]")));
            }
        }
        Ok(())
    }
}

/// Convergence record of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    /// First frame index (0-based) of the block.
    pub start: usize,
    pub frames: usize,
    pub tau: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each iteration.
    pub objective: Vec<f64>,
}

/// One block's share of a decomposition.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub low_rank: DMatrix<f64>,
    pub sparse: DMatrix<f64>,
    pub residual: DMatrix<f64>,
    pub stats: BlockStats,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub low_rank: DMatrix<f64>,
    pub sparse: DMatrix<f64>,
    pub residual: DMatrix<f64>,
    /// Largest iteration count over all blocks.
    pub iterations: usize,
    /// All blocks met the tolerance.
    pub converged: bool,
    pub blocks: Vec<BlockStats>,
}

impl Decomposition {
    /// Reassembles blocks given in frame order.
    pub fn assemble(parts: Vec<BlockDecomposition>) -> Result<Self> {
        let rows = parts.first().map(|p| p.low_rank.nrows()).unwrap_or(0);
        let cols: usize = parts.iter().map(|p| p.low_rank.ncols()).sum();
        let mut low_rank = DMatrix::zeros(rows, cols);
        let mut sparse = DMatrix::zeros(rows, cols);
        let mut residual = DMatrix::zeros(rows, cols);
        let mut blocks = Vec::with_capacity(parts.len());
        let mut col = 0;
        for part in parts {
            if part.low_rank.nrows() != rows || part.stats.start != col {
                return Err(Error::ShapeMismatch {
                    expected: (rows, col),
                    found: (part.low_rank.nrows(), part.stats.start),
                });
            }
            let n = part.low_rank.ncols();
            low_rank.columns_mut(col, n).copy_from(&part.low_rank);
            sparse.columns_mut(col, n).copy_from(&part.sparse);
            residual.columns_mut(col, n).copy_from(&part.residual);
            col += n;
            blocks.push(part.stats);
        }
        Ok(Decomposition {
            low_rank,
            sparse,
            residual,
            iterations: blocks.iter().map(|b| b.iterations).max().unwrap_or(0),
            converged: blocks.iter().all(|b| b.converged),
            blocks,
        })
    }
}

/// Elementwise soft threshold `sign(m) * max(|m| - lambda, 0)`.
pub fn shrink(m: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    m.map(|v| soft(v, lambda))
}

#[inline]
fn soft(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

/// Singular value thresholding: every singular value `s` becomes `max(s - tau, 0)`.
pub fn svt(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    svt_with_spectrum(m, tau).0
}

/// [`svt`] plus the thresholded singular values in descending order.
///
/// Works on the eigendecomposition of the smaller Gram matrix, so the cost is
/// `O(m n min(m, n))` for an `m x n` input.
pub fn svt_with_spectrum(m: &DMatrix<f64>, tau: f64) -> (DMatrix<f64>, Vec<f64>) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (m.clone(), Vec::new());
    }
    let tall = rows >= cols;
    let gram = if tall { m.tr_mul(m) } else { m * m.transpose() };
    let eig = SymmetricEigen::new(gram);
    let mut weights = DVector::zeros(eig.eigenvalues.len());
    let mut spectrum = Vec::with_capacity(weights.len());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = libm::sqrt(lambda.max(0.0));
        let kept = (s - tau).max(0.0);
        if kept > 0.0 {
            weights[i] = kept / s;
        }
        spectrum.push(kept);
    }
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let basis = &eig.eigenvectors;
    let mut scaled = basis.clone();
    for (j, mut column) in scaled.column_iter_mut().enumerate() {
        column *= weights[j];
    }
    let projector = scaled * basis.transpose();
    let out = if tall { m * projector } else { projector * m };
    (out, spectrum)
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let gram = if rows >= cols { m.tr_mul(m) } else { m * m.transpose() };
    let mut s: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|l| libm::sqrt(l.max(0.0)))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Robust noise level of a Casorati block.
///
/// Median absolute second difference along the pixel axis, scaled to a
/// Gaussian standard deviation. Smooth background and sparse shadow edges
/// barely move the median.
pub fn estimate_noise_sigma(d: &DMatrix<f64>) -> f64 {
    let rows = d.nrows();
    if rows < 3 {
        return 0.0;
    }
    let mut diffs = Vec::with_capacity((rows - 2) * d.ncols());
    for column in d.column_iter() {
        for i in 1..rows - 1 {
            diffs.push((column[i + 1] - 2.0 * column[i] + column[i - 1]).abs());
        }
    }
    let mid = diffs.len() / 2;
    let (_, median, _) = diffs.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    // second difference of iid noise has std sqrt(6) sigma; MAD -> std is 1/0.6745
    *median / (0.674_489_750_196_081_7 * libm::sqrt(6.0))
}

/// Default singular value threshold for a block: the expected spectral norm
/// of its noise, `sigma * (sqrt(m) + sqrt(n))`, floored at `1e-3 * sigma_max(D)`.
pub fn default_tau(d: &DMatrix<f64>) -> f64 {
    let sigma = estimate_noise_sigma(d);
    let edge = 2.0 * sigma * (libm::sqrt(d.nrows() as f64) + libm::sqrt(d.ncols() as f64));
    let top = singular_values(d).first().copied().unwrap_or(0.0);
    edge.max(1e-3 * top)
}

/// Default shrinkage threshold `3 / sqrt(max(rows, cols))`.
pub fn default_lambda(d: &DMatrix<f64>) -> f64 {
    3.0 / libm::sqrt(d.nrows().max(d.ncols()) as f64)
}

/// Objective `tau ||L||_* + lambda ||X||_1 + 0.5 ||D - L - X||_F^2` given the
/// singular values of `L`.
pub fn objective(
    d: &DMatrix<f64>,
    low_rank: &DMatrix<f64>,
    low_rank_spectrum: &[f64],
    sparse: &DMatrix<f64>,
    tau: f64,
    lambda: f64,
) -> f64 {
    let nuclear: f64 = low_rank_spectrum.iter().sum();
    let l1: f64 = sparse.iter().map(|v| v.abs()).sum();
    let residual = d - low_rank - sparse;
    tau * nuclear + lambda * l1 + 0.5 * residual.norm_squared()
}

/// Decomposes one Casorati block. `start` is recorded in the stats only.
pub fn decompose_matrix(d: &DMatrix<f64>, params: &DecomposeParams, start: usize) -> Result<BlockDecomposition> {
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let tau = params.tau.unwrap_or_else(|| default_tau(d));
    let lambda = params.lambda.unwrap_or_else(|| default_lambda(d));
    let (rows, cols) = d.shape();
    let d_norm = d.norm();
    let mut stats = BlockStats {
        start,
        frames: cols,
        tau,
        lambda,
        iterations: 0,
        converged: true,
        objective: Vec::new(),
    };
    if d_norm == 0.0 {
        let zeros = DMatrix::zeros(rows, cols);
        return Ok(BlockDecomposition {
            low_rank: zeros.clone(),
            sparse: zeros.clone(),
            residual: zeros,
            stats,
        });
    }

    let mut low_rank = DMatrix::zeros(rows, cols);
    let mut sparse = DMatrix::<f64>::zeros(rows, cols);
    stats.converged = false;
    for it in 1..=params.max_iter {
        let (next_low, spectrum) = svt_with_spectrum(&(d - &sparse), tau);
        let next_sparse = shrink(&(d - &next_low), lambda);
        let change = ((&next_low - &low_rank).norm() + (&next_sparse - &sparse).norm()) / d_norm;
        low_rank = next_low;
        sparse = next_sparse;
        stats.objective.push(objective(d, &low_rank, &spectrum, &sparse, tau, lambda));
        stats.iterations = it;
        if change < params.tol {
            stats.converged = true;
            break;
        }
    }
    let residual = d - &low_rank - &sparse;
    Ok(BlockDecomposition { low_rank, sparse, residual, stats })
}

/// Frame ranges of the independent blocks.
pub fn block_ranges(frames: usize, window: Option<usize>) -> Vec<Range<usize>> {
    let window = window.unwrap_or(frames).max(1);
    (0..frames)
        .step_by(window)
        .map(|s| s..(s + window).min(frames))
        .collect()
}

/// Decomposes one block of a stack.
pub fn decompose_block(stack: &FrameStack, range: Range<usize>, params: &DecomposeParams) -> Result<BlockDecomposition> {
    let d = stack.casorati_range(range.start, range.len());
    decompose_matrix(&d, params, range.start)
}

/// Decomposes a whole stack, block by block.
pub fn decompose(stack: &FrameStack, params: &DecomposeParams) -> Result<Decomposition> {
    params.validate(stack.frames())?;
    let parts = block_ranges(stack.frames(), params.window)
        .into_iter()
        .map(|r| decompose_block(stack, r, params))
        .collect::<Result<Vec<_>>>()?;
    Decomposition::assemble(parts)
}

/// Shadow-enhanced frames: the shadow-signed part of `X`, scaled per block
/// by the block's maximum. Blocks with no shadow energy stay zero.
pub fn enhance(decomposition: &Decomposition, rows: usize, cols: usize, polarity: Polarity) -> Result<FrameStack> {
    let x = &decomposition.sparse;
    if x.nrows() != rows * cols {
        return Err(Error::ShapeMismatch {
            expected: (rows * cols, x.ncols()),
            found: x.shape(),
        });
    }
    let sign = match polarity {
        Polarity::DarkShadows => -1.0,
        Polarity::BrightShadows => 1.0,
    };
    let mut enhanced = x.map(|v| (sign * v).max(0.0));
    for block in &decomposition.blocks {
        let mut view = enhanced.columns_mut(block.start, block.frames);
        let peak = view.iter().fold(0.0f64, |a, &b| a.max(b));
        if peak > 0.0 {
            view /= peak;
        }
    }
    enhanced.apply(|v| *v = v.clamp(0.0, 1.0));
    FrameStack::from_casorati(&enhanced, rows, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    // Independent route: nalgebra's bidiagonal SVD.
    fn svt_oracle(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
        let mut svd = m.clone().svd(true, true);
        svd.singular_values.apply(|s| *s = (*s - tau).max(0.0));
        svd.recompose().unwrap()
    }

    #[test]
    fn svt_examples() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let out = svt(&m, 2.0);
        assert!((out - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-12);

        let m = random_matrix(7, 4, 1);
        assert!((svt(&m, 0.0) - &m).norm() < 1e-12);
        let top = singular_values(&m)[0];
        assert!(svt(&m, top).norm() < 1e-12);
        assert!(svt(&m, top * 2.0).norm() == 0.0);
    }

    #[test]
    fn svt_matches_direct_svd() {
        for (seed, (r, c)) in [(3, 6), (6, 3), (20, 5), (5, 20), (9, 9)].into_iter().enumerate() {
            let m = random_matrix(r, c, seed as u64 + 10);
            for tau in [0.1, 0.5, 1.0] {
                let diff = (svt(&m, tau) - svt_oracle(&m, tau)).norm();
                assert!(diff < 1e-10, "{r}x{c} tau {tau}: {diff}");
            }
        }
    }

    #[test]
    fn shrink_examples() {
        let m = DMatrix::from_row_slice(1, 3, &[0.5, -0.5, 0.1]);
        let s = shrink(&m, 0.2);
        assert!((s[(0, 0)] - 0.3).abs() < 1e-15);
        assert!((s[(0, 1)] + 0.3).abs() < 1e-15);
        assert_eq!(s[(0, 2)], 0.0);
        assert_eq!(shrink(&m, 0.0), m);
        assert_eq!(shrink(&m, 0.5), DMatrix::zeros(1, 3));
    }

    #[test]
    fn zero_input_gives_zero_terms() {
        let stack = FrameStack::zeros(4, 3, 3).unwrap();
        let dec = decompose(&stack, &DecomposeParams::default()).unwrap();
        assert_eq!(dec.low_rank.norm(), 0.0);
        assert_eq!(dec.sparse.norm(), 0.0);
        assert_eq!(dec.residual.norm(), 0.0);
        assert!(dec.converged);
    }

    #[test]
    fn rank_one_background_is_recovered() {
        let u: Vec<f64> = (0..64).map(|i| 0.4 + 0.3 * libm::sin((i as f64) * 0.2).abs()).collect();
        let v = [1.0, 0.9, 1.1, 0.95, 1.05, 1.0];
        let data: Vec<f32> = (0..6).flat_map(|j| u.iter().map(move |x| (x * v[j]) as f32)).collect();
        let stack = FrameStack::new(6, 8, 8, data).unwrap();
        let d = stack.casorati();
        let params = DecomposeParams { tau: Some(1e-3), lambda: Some(1.0), tol: 1e-10, ..Default::default() };
        let dec = decompose(&stack, &params).unwrap();
        assert_eq!(dec.sparse.norm(), 0.0);
        assert!((&dec.low_rank - &d).norm() / d.norm() < 1e-3);
        let recon = &dec.low_rank + &dec.sparse + &dec.residual;
        assert!((recon - &d).norm() / d.norm() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_and_bad_params() {
        let mut d = DMatrix::zeros(3, 3);
        d[(1, 1)] = f64::NAN;
        assert_eq!(decompose_matrix(&d, &DecomposeParams::default(), 0).unwrap_err(), Error::NonFinite);
        let stack = FrameStack::zeros(4, 2, 2).unwrap();
        for bad in [
            DecomposeParams { tau: Some(0.0), ..Default::default() },
            DecomposeParams { lambda: Some(-1.0), ..Default::default() },
            DecomposeParams { tol: 1.0, ..Default::default() },
            DecomposeParams { max_iter: 0, ..Default::default() },
            DecomposeParams { window: Some(5), ..Default::default() },
        ] {
            assert!(decompose(&stack, &bad).is_err());
        }
    }

    #[test]
    fn blocks_cover_the_video() {
        assert_eq!(block_ranges(10, None), vec![0..10]);
        assert_eq!(block_ranges(10, Some(4)), vec![0..4, 4..8, 8..10]);
        assert_eq!(block_ranges(3, Some(1)), vec![0..1, 1..2, 2..3]);
    }

    #[test]
    fn windowed_blocks_are_independent() {
        let data: Vec<f32> = (0..6 * 16).map(|i| ((i * 37 % 101) as f32) / 100.0).collect();
        let stack = FrameStack::new(6, 4, 4, data).unwrap();
        let params = DecomposeParams { window: Some(3), tau: Some(0.5), lambda: Some(0.2), ..Default::default() };
        let whole = decompose(&stack, &params).unwrap();
        let second = decompose_block(&stack, 3..6, &params).unwrap();
        assert_eq!(whole.blocks.len(), 2);
        assert_eq!(whole.low_rank.columns(3, 3), second.low_rank);
        assert_eq!(whole.sparse.columns(3, 3), second.sparse);
    }

    #[test]
    fn enhance_examples() {
        let rows = 2;
        let cols = 2;
        let mut x = DMatrix::zeros(4, 2);
        let stats = BlockStats { start: 0, frames: 2, tau: 1.0, lambda: 1.0, iterations: 1, converged: true, objective: vec![] };
        let mut dec = Decomposition {
            low_rank: DMatrix::zeros(4, 2),
            sparse: x.clone(),
            residual: DMatrix::zeros(4, 2),
            iterations: 1,
            converged: true,
            blocks: vec![stats],
        };
        let e = enhance(&dec, rows, cols, Polarity::DarkShadows).unwrap();
        assert!(e.data().iter().all(|&v| v == 0.0));

        x[(2, 1)] = -0.4;
        x[(0, 0)] = 0.3;
        dec.sparse = x.clone();
        let e = enhance(&dec, rows, cols, Polarity::DarkShadows).unwrap();
        let mut expected = [0.0f32; 8];
        expected[4 + 2] = 1.0;
        assert_eq!(e.data(), &expected[..]);

        let dark = e;
        dec.sparse = -x;
        let bright = enhance(&dec, rows, cols, Polarity::BrightShadows).unwrap();
        assert_eq!(dark, bright);
    }

    proptest! {
        #[test]
        fn shrink_is_a_contraction(seed in any::<u64>(), lambda in 0.0..1.0f64) {
            let a = random_matrix(5, 4, seed);
            let b = random_matrix(5, 4, seed ^ 0x9e37_79b9);
            let lhs = (shrink(&a, lambda) - shrink(&b, lambda)).norm();
            prop_assert!(lhs <= (a - b).norm() + 1e-12);
        }

        #[test]
        fn svt_reduces_nuclear_norm_and_rank(seed in any::<u64>(), tau in 0.0..2.0f64) {
            let m = random_matrix(6, 4, seed);
            let out = svt(&m, tau);
            let before = singular_values(&m);
            let after = singular_values(&out);
            prop_assert!(after.iter().sum::<f64>() <= before.iter().sum::<f64>() + 1e-10);
            let rank = |s: &[f64]| s.iter().filter(|v| **v > 1e-9).count();
            prop_assert!(rank(&after) <= rank(&before));
        }
    }
}
