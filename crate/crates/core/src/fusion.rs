//! Adaptive spatial fusion of three pyramid levels.
//!
//! Level 1 is the finest map; every step up halves both spatial
//! dimensions. Maps from every level are resampled to a target level and
//! combined per position with softmax weights over three logit planes:
//! `Y = alpha * X1 + beta * X2 + gamma * X3`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `channels x rows x cols` feature map, channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || rows == 0 || cols == 0 {
            return Err(Error::param("feature map", "dimensions must be positive"));
        }
        if data.len() != channels * rows * cols {
            return Err(Error::ShapeMismatch {
                expected: (channels * rows, cols),
                found: (data.len() / cols.max(1), cols),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(FeatureMap { channels, rows, cols, data })
    }

    pub fn from_fn(channels: usize, rows: usize, cols: usize, f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(channels * rows * cols);
        for c in 0..channels {
            for r in 0..rows {
                for k in 0..cols {
                    data.push(f(c, r, k));
                }
            }
        }
        Self::new(channels, rows, cols, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, c: usize, r: usize, k: usize) -> f64 {
        self.data[(c * self.rows + r) * self.cols + k]
    }

    pub fn scaled(&self, s: f64) -> Self {
        FeatureMap { data: self.data.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    fn upsample2(&self) -> Self {
        let (rows, cols) = (self.rows * 2, self.cols * 2);
        let mut data = Vec::with_capacity(self.channels * rows * cols);
        for c in 0..self.channels {
            for r in 0..rows {
                for k in 0..cols {
                    data.push(self.at(c, r / 2, k / 2));
                }
            }
        }
        FeatureMap { channels: self.channels, rows, cols, data }
    }

    fn downsample2(&self) -> Result<Self> {
        if !self.rows.is_multiple_of(2) || !self.cols.is_multiple_of(2) {
            return Err(Error::NotDivisible { rows: self.rows, cols: self.cols, factor: 2 });
        }
        let (rows, cols) = (self.rows / 2, self.cols / 2);
        let mut data = Vec::with_capacity(self.channels * rows * cols);
        for c in 0..self.channels {
            for r in 0..rows {
                for k in 0..cols {
                    let sum = self.at(c, 2 * r, 2 * k)
                        + self.at(c, 2 * r, 2 * k + 1)
                        + self.at(c, 2 * r + 1, 2 * k)
                        + self.at(c, 2 * r + 1, 2 * k + 1);
                    data.push(sum / 4.0);
                }
            }
        }
        Ok(FeatureMap { channels: self.channels, rows, cols, data })
    }
}

fn check_level(level: u8) -> Result<()> {
    if (1..=3).contains(&level) {
        Ok(())
    } else {
        Err(Error::param("level", "levels are 1, 2 or 3"))
    }
}

/// Moves `map` from `from_level` to `to_level`: nearest-neighbour replication
/// going down the pyramid, 2x2 mean pooling going up, one factor of 2 per step.
pub fn resample_level(map: &FeatureMap, from_level: u8, to_level: u8) -> Result<FeatureMap> {
    check_level(from_level)?;
    check_level(to_level)?;
    if to_level > from_level {
        let factor = 1usize << (to_level - from_level);
        if !map.rows.is_multiple_of(factor) || !map.cols.is_multiple_of(factor) {
            return Err(Error::NotDivisible { rows: map.rows, cols: map.cols, factor });
        }
    }
    let mut out = map.clone();
    let mut level = from_level;
    while level < to_level {
        out = out.downsample2()?;
        level += 1;
    }
    while level > to_level {
        out = out.upsample2();
        level -= 1;
    }
    Ok(out)
}

/// Per-position fusion weights; each triple sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights {
    pub rows: usize,
    pub cols: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Softmax over three single-channel logit planes of equal shape.
pub fn fusion_weights(logits: [&FeatureMap; 3]) -> Result<FusionWeights> {
    let (rows, cols) = (logits[0].rows, logits[0].cols);
    for plane in logits {
        if plane.channels != 1 || plane.rows != rows || plane.cols != cols {
            return Err(Error::ShapeMismatch {
                expected: (rows, cols),
                found: (plane.channels * plane.rows, plane.cols),
            });
        }
    }
    let n = rows * cols;
    let mut weights = FusionWeights {
        rows,
        cols,
        alpha: Vec::with_capacity(n),
        beta: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
    };
    for i in 0..n {
        let l = [logits[0].data[i], logits[1].data[i], logits[2].data[i]];
        let top = l[0].max(l[1]).max(l[2]);
        let e = l.map(|v| libm::exp(v - top));
        let sum = e[0] + e[1] + e[2];
        weights.alpha.push(e[0] / sum);
        weights.beta.push(e[1] / sum);
        weights.gamma.push(e[2] / sum);
    }
    Ok(weights)
}

/// Fuses the level-1, level-2 and level-3 maps at `target_level`.
///
/// `logits` are single-channel planes shaped like the target level.
pub fn fuse(maps: [&FeatureMap; 3], logits: [&FeatureMap; 3], target_level: u8) -> Result<FeatureMap> {
    check_level(target_level)?;
    let resampled = [
        resample_level(maps[0], 1, target_level)?,
        resample_level(maps[1], 2, target_level)?,
        resample_level(maps[2], 3, target_level)?,
    ];
    let weights = fusion_weights(logits)?;
    let (rows, cols) = (weights.rows, weights.cols);
    let channels = resampled[0].channels;
    for m in &resampled {
        if m.rows != rows || m.cols != cols || m.channels != channels {
            return Err(Error::ShapeMismatch { expected: (rows, cols), found: (m.rows, m.cols) });
        }
    }
    let plane = rows * cols;
    let mut data = Vec::with_capacity(channels * plane);
    for c in 0..channels {
        for i in 0..plane {
            let j = c * plane + i;
            data.push(
                weights.alpha[i] * resampled[0].data[j]
                    + weights.beta[i] * resampled[1].data[j]
                    + weights.gamma[i] * resampled[2].data[j],
            );
        }
    }
    FeatureMap::new(channels, rows, cols, data)
}
