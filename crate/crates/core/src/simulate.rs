//! Synthetic Video-SAR scenes with known background, shadow support and
//! ground-truth trajectories.
//!
//! All randomness comes from ChaCha8 seeded with [`SceneConfig::seed`].
//! Stream 0 draws the background patterns and static patch positions; the
//! noise of frame index `k` uses stream `k + 1`, so frames can be produced
//! independently and the output never depends on generation order.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::frames::FrameStack;
use crate::geometry::{BBox, Trajectory};

/// Parametric path of a shadow center, in pixels (x right, y down).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields))]
pub enum Path {
    /// `start + velocity * k` at frame index `k`.
    Linear { start: (f64, f64), velocity: (f64, f64) },
    /// `center + radius * (cos, sin)(start_angle + angular_velocity * k)`.
    #[cfg_attr(feature = "serde", serde(rename = "circular-arc"))]
    Arc {
        center: (f64, f64),
        radius: f64,
        start_angle: f64,
        angular_velocity: f64,
    },
}

impl Path {
    pub fn center_at(&self, k: usize) -> (f64, f64) {
        let k = k as f64;
        match *self {
            Path::Linear { start, velocity } => (start.0 + velocity.0 * k, start.1 + velocity.1 * k),
            Path::Arc { center, radius, start_angle, angular_velocity } => {
                let a = start_angle + angular_velocity * k;
                (center.0 + radius * libm::cos(a), center.1 + radius * libm::sin(a))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SceneConfig {
    pub height: usize,
    pub width: usize,
    pub frames: usize,
    /// Rank of the background.
    pub rank: usize,
    /// One path per moving shadow.
    pub targets: Vec<Path>,
    /// Intensity removed inside a shadow.
    pub shadow_depth: f64,
    /// Shadow extent `(w, h)` in pixels.
    pub shadow_size: (usize, usize),
    pub noise_sigma: f64,
    /// Static dark patches (distractors), excluded from ground truth.
    pub n_static: usize,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            height: 64,
            width: 64,
            frames: 40,
            rank: 3,
            targets: Vec::new(),
            shadow_depth: 0.4,
            shadow_size: (6, 6),
            noise_sigma: 0.01,
            n_static: 0,
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.height < 16 || self.width < 16 {
            return Err(Error::param("height/width", "frames must be at least 16x16"));
        }
        if self.frames < 2 {
            return Err(Error::param("frames", "need at least 2 frames"));
        }
        if self.rank == 0 {
            return Err(Error::param("rank", "must be at least 1"));
        }
        if !(self.shadow_depth > 0.0 && self.shadow_depth <= 1.0) {
            return Err(Error::param("shadow_depth", "must lie in (0, 1]"));
        }
        let (sw, sh) = self.shadow_size;
        if sw == 0 || sh == 0 || sw > self.width || sh > self.height {
            return Err(Error::param("shadow_size", "must be non-empty and fit in the frame"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::param("noise_sigma", "must be non-negative"));
        }
        for target in 0..self.targets.len() {
            for k in 0..self.frames {
                self.target_box(target, k)?;
            }
        }
        Ok(())
    }

    /// Integer-aligned shadow box of `target` at frame index `k`.
    pub fn target_box(&self, target: usize, k: usize) -> Result<PixelBox> {
        let (cx, cy) = self.targets[target].center_at(k);
        let (w, h) = self.shadow_size;
        let x = libm::round(cx - w as f64 / 2.0);
        let y = libm::round(cy - h as f64 / 2.0);
        let fits = x.is_finite()
            && y.is_finite()
            && x >= 0.0
            && y >= 0.0
            && x + w as f64 <= self.width as f64
            && y + h as f64 <= self.height as f64;
        if !fits {
            return Err(Error::PathLeavesFrame { target, frame: k });
        }
        Ok(PixelBox { x: x as usize, y: y as usize, w, h })
    }
}

/// Box on the pixel grid covering columns `x..x + w` and rows `y..y + h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl PixelBox {
    pub fn to_bbox(self) -> BBox {
        BBox { x: self.x as f64, y: self.y as f64, w: self.w as f64, h: self.h as f64 }
    }

    fn overlaps(&self, other: &PixelBox, margin: usize) -> bool {
        self.x < other.x + other.w + margin
            && other.x < self.x + self.w + margin
            && self.y < other.y + other.h + margin
            && other.y < self.y + self.h + margin
    }

    fn contains(&self, row: usize, col: usize) -> bool {
        col >= self.x && col < self.x + self.w && row >= self.y && row < self.y + self.h
    }
}

/// A generated scene plus its oracles.
#[derive(Debug, Clone)]
pub struct Scene {
    pub stack: FrameStack,
    /// One trajectory per moving shadow, ids from 1, frames 1-based.
    pub ground_truth: Vec<Trajectory>,
    /// Noise-free background including static patches, as a Casorati matrix.
    pub background: DMatrix<f64>,
    /// Pixels covered by a moving shadow, same layout as `background`.
    pub shadow_support: DMatrix<bool>,
    pub statics: Vec<PixelBox>,
}

struct Component {
    rows: Vec<f64>,
    cols: Vec<f64>,
    temporal: Vec<f64>,
}

fn background_components(cfg: &SceneConfig, rng: &mut ChaCha8Rng) -> Vec<Component> {
    let (h, w, t) = (cfg.height, cfg.width, cfg.frames);
    let wave = |n: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let freq = rng.random_range(0.5..2.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        (0..n).map(|i| libm::cos(PI * freq * (i as f64 + 0.5) / n as f64 + phase)).collect()
    };
    let mut out = Vec::with_capacity(cfg.rank);
    // The first component is static in time; it also absorbs the constant
    // offset of the final normalization, which keeps the rank unchanged.
    let rows = wave(h, rng).into_iter().map(|v| 1.0 + 0.5 * v).collect();
    let cols = wave(w, rng).into_iter().map(|v| 1.0 + 0.5 * v).collect();
    out.push(Component { rows, cols, temporal: alloc::vec![1.0; t] });
    for _ in 1..cfg.rank {
        let rows = wave(h, rng);
        let cols = wave(w, rng);
        let amp = rng.random_range(0.3..0.6);
        let omega = rng.random_range(0.25..1.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        let temporal = (0..t)
            .map(|k| amp * libm::sin(2.0 * PI * omega * k as f64 / t as f64 + phase))
            .collect();
        out.push(Component { rows, cols, temporal });
    }
    out
}

fn place_statics(cfg: &SceneConfig, rng: &mut ChaCha8Rng) -> Result<Vec<PixelBox>> {
    let (w, h) = cfg.shadow_size;
    let mut occupied = Vec::new();
    for target in 0..cfg.targets.len() {
        for k in 0..cfg.frames {
            occupied.push(cfg.target_box(target, k)?);
        }
    }
    let mut statics: Vec<PixelBox> = Vec::with_capacity(cfg.n_static);
    for _ in 0..cfg.n_static {
        let mut placed = None;
        for _ in 0..1000 {
            let candidate = PixelBox {
                x: rng.random_range(0..=cfg.width - w),
                y: rng.random_range(0..=cfg.height - h),
                w,
                h,
            };
            let clear = occupied.iter().all(|b| !candidate.overlaps(b, 2))
                && statics.iter().all(|b| !candidate.overlaps(b, 2));
            if clear {
                placed = Some(candidate);
                break;
            }
        }
        statics.push(placed.ok_or(Error::PlacementFailed(cfg.n_static))?);
    }
    Ok(statics)
}

/// Builds the scene described by `cfg`. Deterministic in `cfg.seed`.
pub fn generate(cfg: &SceneConfig) -> Result<Scene> {
    cfg.validate()?;
    let (h, w, t) = (cfg.height, cfg.width, cfg.frames);
    let n = h * w;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let components = background_components(cfg, &mut rng);
    let statics = place_statics(cfg, &mut rng)?;

    let mut raw = DMatrix::zeros(n, t);
    for c in &components {
        for k in 0..t {
            let a = c.temporal[k];
            for row in 0..h {
                let ar = a * c.rows[row];
                for col in 0..w {
                    raw[(row * w + col, k)] += ar * c.cols[col];
                }
            }
        }
    }
    let lo = raw.min();
    let hi = raw.max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut background: DMatrix<f64> = raw.map(|v: f64| 0.3 + 0.6 * (v - lo) / span);
    for s in &statics {
        for k in 0..t {
            for row in s.y..s.y + s.h {
                for col in s.x..s.x + s.w {
                    let v = &mut background[(row * w + col, k)];
                    *v = (*v - cfg.shadow_depth).max(0.0);
                }
            }
        }
    }

    let mut boxes = Vec::with_capacity(cfg.targets.len());
    for target in 0..cfg.targets.len() {
        boxes.push((0..t).map(|k| cfg.target_box(target, k)).collect::<Result<Vec<_>>>()?);
    }

    let mut shadow_support = DMatrix::from_element(n, t, false);
    let mut data = alloc::vec![0.0f32; t * n];
    for k in 0..t {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        noise_rng.set_stream(k as u64 + 1);
        for row in 0..h {
            for col in 0..w {
                let i = row * w + col;
                let covering = boxes.iter().filter(|b| b[k].contains(row, col)).count();
                let mut v = background[(i, k)];
                if covering > 0 {
                    shadow_support[(i, k)] = true;
                    v = (v - cfg.shadow_depth * covering as f64).max(0.0);
                }
                let z: f64 = StandardNormal.sample(&mut noise_rng);
                data[k * n + i] = (v + cfg.noise_sigma * z).clamp(0.0, 1.0) as f32;
            }
        }
    }

    let ground_truth = boxes
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let samples = b.iter().enumerate().map(|(k, pb)| (k as u32 + 1, pb.to_bbox())).collect();
            Trajectory::new(i as u32 + 1, samples)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Scene {
        stack: FrameStack::new(t, h, w, data)?,
        ground_truth,
        background,
        shadow_support,
        statics,
    })
}
