//! Connected-component blob detector for enhanced shadow frames.
//!
//! A frame is binarized (Otsu or `mean + k * std`), foreground pixels are
//! grouped into connected components, and each component of admissible size
//! becomes a [`Detection`] with its tight box. Confidence is the mean
//! intensity inside the component over the frame maximum.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frames::{FrameRef, FrameStack};
use crate::geometry::{BBox, Detection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ThresholdMode {
    #[default]
    Otsu,
    MeanKSigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "u8", into = "u8"))]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(Error::param("connectivity", "must be 4 or 8")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BlobParams {
    pub threshold_mode: ThresholdMode,
    /// Standard deviations above the mean for [`ThresholdMode::MeanKSigma`].
    pub k: f64,
    /// Smallest component kept, in pixels.
    pub min_area: usize,
    /// Largest component kept, in pixels. `None` means 5% of the frame.
    pub max_area: Option<usize>,
    pub connectivity: Connectivity,
}

impl Default for BlobParams {
    fn default() -> Self {
        BlobParams {
            threshold_mode: ThresholdMode::Otsu,
            k: 3.0,
            min_area: 4,
            max_area: None,
            connectivity: Connectivity::Eight,
        }
    }
}

impl BlobParams {
    pub fn max_area_for(&self, rows: usize, cols: usize) -> usize {
        self.max_area.unwrap_or((rows * cols) / 20)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::param("k", "must be positive"));
        }
        if let Some(max) = self.max_area {
            if self.min_area > max {
                return Err(Error::param("min_area", "must not exceed max_area"));
            }
        }
        Ok(())
    }
}

const BINS: usize = 256;

#[inline]
fn bin(v: f32) -> usize {
    ((v * BINS as f32) as usize).min(BINS - 1)
}

/// Otsu split over a 256-bin histogram of `[0, 1]` samples.
///
/// Returns the last background bin, or `None` when fewer than two bins are
/// populated. Among equally good splits the middle of the first tied run
/// is taken.
pub fn otsu_bin(data: &[f32]) -> Option<usize> {
    let mut hist = [0u64; BINS];
    for &v in data {
        hist[bin(v)] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let total = data.len() as f64;
    let weighted: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut run = (0, 0);
    let mut in_run = false;
    for (k, &count) in hist.iter().enumerate().take(BINS - 1) {
        w0 += count as f64;
        sum0 += k as f64 * count as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            in_run = false;
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (weighted - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best * (1.0 + 1e-12) {
            best = between;
            run = (k, k);
            in_run = true;
        } else if in_run && between >= best * (1.0 - 1e-12) {
            run.1 = k;
        } else {
            in_run = false;
        }
    }
    Some((run.0 + run.1) / 2)
}

fn foreground_mask(frame: &FrameRef<'_>, params: &BlobParams) -> Vec<bool> {
    match params.threshold_mode {
        ThresholdMode::Otsu => match otsu_bin(frame.data) {
            Some(k) => frame.data.iter().map(|&v| bin(v) > k).collect(),
            None => alloc::vec![false; frame.data.len()],
        },
        ThresholdMode::MeanKSigma => {
            let n = frame.data.len() as f64;
            let mean = frame.data.iter().map(|&v| v as f64).sum::<f64>() / n;
            let var = frame.data.iter().map(|&v| (v as f64 - mean) * (v as f64 - mean)).sum::<f64>() / n;
            let threshold = mean + params.k * libm::sqrt(var);
            frame.data.iter().map(|&v| v as f64 > threshold).collect()
        }
    }
}

struct Component {
    area: usize,
    sum: f64,
    top: usize,
    left: usize,
    bottom: usize,
    right: usize,
}

fn components(frame: &FrameRef<'_>, mask: &[bool], connectivity: Connectivity) -> Vec<Component> {
    let (rows, cols) = (frame.rows, frame.cols);
    let mut seen = alloc::vec![false; mask.len()];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let four: &[(isize, isize)] = &[(-1, 0), (1, 0), (0, -1), (0, 1)];
    let eight: &[(isize, isize)] = &[(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
    let offsets = match connectivity {
        Connectivity::Four => four,
        Connectivity::Eight => eight,
    };
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut c = Component {
            area: 0,
            sum: 0.0,
            top: usize::MAX,
            left: usize::MAX,
            bottom: 0,
            right: 0,
        };
        while let Some(i) = stack.pop() {
            let (r, k) = (i / cols, i % cols);
            c.area += 1;
            c.sum += frame.data[i] as f64;
            c.top = c.top.min(r);
            c.bottom = c.bottom.max(r);
            c.left = c.left.min(k);
            c.right = c.right.max(k);
            for &(dr, dk) in offsets {
                let nr = r as isize + dr;
                let nk = k as isize + dk;
                if nr < 0 || nk < 0 || nr >= rows as isize || nk >= cols as isize {
                    continue;
                }
                let j = nr as usize * cols + nk as usize;
                if mask[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        out.push(c);
    }
    out
}

/// Detects blobs in one enhanced frame. `frame_number` is 1-based.
///
/// Output is sorted by descending confidence, ties by box `y` then `x`.
pub fn detect_blobs(frame: &FrameRef<'_>, frame_number: u32, params: &BlobParams) -> Result<Vec<Detection>> {
    params.validate()?;
    if frame_number == 0 {
        return Err(Error::InvalidFrame(0));
    }
    let peak = frame.data.iter().fold(0.0f32, |a, &b| a.max(b)) as f64;
    if peak <= 0.0 {
        return Ok(Vec::new());
    }
    let mask = foreground_mask(frame, params);
    let max_area = params.max_area_for(frame.rows, frame.cols);
    let mut dets: Vec<Detection> = components(frame, &mask, params.connectivity)
        .into_iter()
        .filter(|c| c.area >= params.min_area && c.area <= max_area)
        .map(|c| Detection {
            frame: frame_number,
            bbox: BBox {
                x: c.left as f64,
                y: c.top as f64,
                w: (c.right - c.left + 1) as f64,
                h: (c.bottom - c.top + 1) as f64,
            },
            confidence: (c.sum / c.area as f64 / peak).clamp(0.0, 1.0),
        })
        .collect();
    dets.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.bbox.y.total_cmp(&b.bbox.y))
            .then(a.bbox.x.total_cmp(&b.bbox.x))
    });
    Ok(dets)
}

/// Runs [`detect_blobs`] on every frame; frame index `k` becomes frame `k + 1`.
pub fn detect_stack(stack: &FrameStack, params: &BlobParams) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for k in 0..stack.frames() {
        out.extend(detect_blobs(&stack.frame(k), k as u32 + 1, params)?);
    }
    Ok(out)
}
