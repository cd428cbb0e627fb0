//! Gaussian-process gap filling and smoothing of trajectories.
//!
//! Each box coordinate is regressed independently with a squared-exponential
//! kernel over frame numbers, after removing its mean.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::geometry::{BBox, CenterBox, Trajectory};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GsiParams {
    /// Kernel length scale in frames.
    pub length_scale: f64,
    /// Observation noise variance added to the kernel diagonal.
    pub noise_var: f64,
    /// Longest run of missing frames that is filled.
    pub max_gap: u32,
    /// Keep observed samples as they are and only fill gaps.
    pub fill_only: bool,
}

impl Default for GsiParams {
    fn default() -> Self {
        GsiParams {
            length_scale: 10.0,
            noise_var: 1e-2,
            max_gap: 20,
            fill_only: false,
        }
    }
}

impl GsiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale > 0.0 && self.length_scale.is_finite()) {
            return Err(Error::param("length_scale", "must be positive"));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::param("noise_var", "must be non-negative"));
        }
        if self.max_gap < 1 {
            return Err(Error::param("max_gap", "must be at least 1"));
        }
        Ok(())
    }
}

pub fn rbf(a: f64, b: f64, length_scale: f64) -> f64 {
    let d = a - b;
    libm::exp(-d * d / (2.0 * length_scale * length_scale))
}

/// Factorizes `K + noise_var I`, adding diagonal jitter when the matrix is
/// numerically singular.
fn factorize(mut k: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(k.clone()) {
        return Ok(c);
    }
    let mut jitter = 1e-12;
    while jitter <= 1e-6 {
        for i in 0..k.nrows() {
            k[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(k.clone()) {
            return Ok(c);
        }
        jitter *= 10.0;
    }
    Err(Error::NotPositiveDefinite("kernel matrix"))
}

/// Posterior mean of a zero-mean GP on the centered `values`, plus the mean.
///
/// `times` must be strictly increasing, with at least two entries, and every
/// query must lie in `[times[0], times[n - 1]]`.
pub fn gp_regress(times: &[f64], values: &[f64], queries: &[f64], params: &GsiParams) -> Result<Vec<f64>> {
    params.validate()?;
    let n = times.len();
    if values.len() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, 1),
            found: (values.len(), 1),
        });
    }
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    if times.iter().chain(values).chain(queries).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonIncreasingTimes);
    }
    if let Some(&q) = queries.iter().find(|&&q| q < times[0] || q > times[n - 1]) {
        return Err(Error::QueryOutOfRange(q));
    }
    let ell = params.length_scale;
    let mean = values.iter().sum::<f64>() / n as f64;
    let y = DVector::from_iterator(n, values.iter().map(|v| v - mean));
    let k = DMatrix::from_fn(n, n, |i, j| rbf(times[i], times[j], ell) + if i == j { params.noise_var } else { 0.0 });
    let alpha = factorize(k)?.solve(&y);
    Ok(queries
        .iter()
        .map(|&q| mean + times.iter().zip(alpha.iter()).map(|(&t, a)| rbf(q, t, ell) * a).sum::<f64>())
        .collect())
}

/// Smooths observed samples and fills interior gaps of at most
/// `max_gap` missing frames. Nothing is extrapolated past the first or last
/// observed frame. Trajectories with fewer than two samples are returned as is.
pub fn interpolate_trajectory(traj: &Trajectory, params: &GsiParams) -> Result<Trajectory> {
    params.validate()?;
    let samples = traj.samples();
    if samples.len() < 2 {
        return Ok(traj.clone());
    }
    let times: Vec<f64> = samples.iter().map(|s| s.0 as f64).collect();
    let mut frames: Vec<u32> = Vec::new();
    for w in samples.windows(2) {
        frames.push(w[0].0);
        let missing = w[1].0 - w[0].0 - 1;
        if missing >= 1 && missing <= params.max_gap {
            frames.extend(w[0].0 + 1..w[1].0);
        }
    }
    frames.push(samples[samples.len() - 1].0);
    let queries: Vec<f64> = frames.iter().map(|&f| f as f64).collect();

    let centers: Vec<CenterBox> = samples.iter().map(|s| s.1.to_center()).collect();
    let coord = |f: fn(&CenterBox) -> f64| -> Result<Vec<f64>> {
        let values: Vec<f64> = centers.iter().map(f).collect();
        gp_regress(&times, &values, &queries, params)
    };
    let cx = coord(|c| c.cx)?;
    let cy = coord(|c| c.cy)?;
    let w = coord(|c| c.w)?;
    let h = coord(|c| c.h)?;

    let out = frames
        .iter()
        .enumerate()
        .map(|(i, &frame)| {
            let observed = if params.fill_only { traj.box_at(frame) } else { None };
            let b = observed.unwrap_or_else(|| {
                BBox::from_center(CenterBox {
                    cx: cx[i],
                    cy: cy[i],
                    w: w[i].max(1.0),
                    h: h[i].max(1.0),
                })
            });
            (frame, b)
        })
        .collect();
    Trajectory::new(traj.id(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Dense LU solve of the same system.
    fn lu_oracle(times: &[f64], values: &[f64], queries: &[f64], p: &GsiParams) -> Vec<f64> {
        let n = times.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = times[i] - times[j];
                k[(i, j)] = (-d * d / (2.0 * p.length_scale * p.length_scale)).exp();
            }
            k[(i, i)] += p.noise_var;
        }
        let y = DVector::from_iterator(n, values.iter().map(|v| v - mean));
        let alpha = k.lu().solve(&y).unwrap();
        queries
            .iter()
            .map(|q| {
                let ks = DVector::from_iterator(n, times.iter().map(|t| (-(q - t) * (q - t) / (2.0 * p.length_scale * p.length_scale)).exp()));
                ks.dot(&alpha) + mean
            })
            .collect()
    }

    fn traj(frames: &[u32], f: impl Fn(u32) -> BBox) -> Trajectory {
        Trajectory::new(1, frames.iter().map(|&k| (k, f(k))).collect()).unwrap()
    }

    #[test]
    fn constant_values_are_fixed() {
        let t = [0.0, 1.0, 2.0, 5.0, 9.0];
        let out = gp_regress(&t, &[3.5; 5], &[0.0, 4.0, 7.5], &GsiParams::default()).unwrap();
        assert!(out.iter().all(|v| (v - 3.5).abs() < 1e-9));
    }

    #[test]
    fn noiseless_interpolates_observations() {
        let t = [0.0, 4.0, 9.0, 15.0];
        let y = [1.0, -2.0, 0.5, 3.0];
        let p = GsiParams { noise_var: 0.0, ..Default::default() };
        let out = gp_regress(&t, &y, &t, &p).unwrap();
        for (a, b) in out.iter().zip(&y) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn linear_gap() {
        let t: Vec<f64> = (0..=4).chain(8..=12).map(|v| v as f64).collect();
        let y: Vec<f64> = t.iter().map(|v| 2.0 * v).collect();
        let q = [5.0, 6.0, 7.0];
        let p = GsiParams::default();
        let out = gp_regress(&t, &y, &q, &p).unwrap();
        let oracle = lu_oracle(&t, &y, &q, &p);
        for i in 0..3 {
            assert!((out[i] - oracle[i]).abs() < 1e-8);
            assert!((out[i] - 2.0 * q[i]).abs() <= 0.5, "{out:?}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = GsiParams::default();
        assert_eq!(gp_regress(&[1.0], &[1.0], &[1.0], &p), Err(Error::TooFewObservations(1)));
        assert_eq!(gp_regress(&[1.0, 1.0], &[1.0, 2.0], &[1.0], &p), Err(Error::NonIncreasingTimes));
        assert_eq!(gp_regress(&[1.0, 2.0], &[1.0, 2.0], &[3.0], &p), Err(Error::QueryOutOfRange(3.0)));
        assert!(GsiParams { length_scale: 0.0, ..p.clone() }.validate().is_err());
        assert!(GsiParams { max_gap: 0, ..p }.validate().is_err());
    }

    #[test]
    fn gap_filling() {
        let b = |_| BBox::new(10.0, 20.0, 6.0, 7.0).unwrap();
        let frames: Vec<u32> = (1..=10).chain(14..=20).collect();
        let out = interpolate_trajectory(&traj(&frames, b), &GsiParams::default()).unwrap();
        assert_eq!(out.len(), 20);
        assert_eq!(out.segments(), 1);
        for (_, x) in out.samples() {
            assert!((x.x - 10.0).abs() < 1e-6 && (x.y - 20.0).abs() < 1e-6);
            assert!((x.w - 6.0).abs() < 1e-6 && (x.h - 7.0).abs() < 1e-6);
        }

        let frames: Vec<u32> = (1..=10).chain(36..=45).collect();
        let out = interpolate_trajectory(&traj(&frames, b), &GsiParams::default()).unwrap();
        assert_eq!(out.len(), 20);
        assert_eq!(out.segments(), 2);
        assert_eq!(out.box_at(11), None);
    }

    #[test]
    fn short_trajectories_unchanged() {
        let t = traj(&[4], |_| BBox::new(1.0, 2.0, 3.0, 4.0).unwrap());
        assert_eq!(interpolate_trajectory(&t, &GsiParams::default()).unwrap(), t);
    }

    #[test]
    fn fill_only_keeps_observations() {
        let frames = [1, 2, 3, 6, 7];
        let t = traj(&frames, |k| BBox::new(k as f64 * 1.5 + (k % 2) as f64, 2.0, 3.0, 4.0).unwrap());
        let p = GsiParams { fill_only: true, ..Default::default() };
        let out = interpolate_trajectory(&t, &p).unwrap();
        assert_eq!(out.len(), 7);
        for &k in &frames {
            assert_eq!(out.box_at(k), t.box_at(k));
        }
    }

    proptest! {
        #[test]
        fn matches_dense_oracle(
            steps in proptest::collection::vec(1u32..5, 2..50),
            values in proptest::collection::vec(-50.0f64..50.0, 50),
            ell in 2.0f64..20.0,
            noise in 1e-3f64..1.0,
        ) {
            let mut t = Vec::new();
            let mut acc = 0;
            for s in &steps {
                acc += s;
                t.push(acc as f64);
            }
            let y = &values[..t.len()];
            let q: Vec<f64> = (t[0] as u32..=acc).map(|v| v as f64 + 0.25).filter(|&v| v <= acc as f64).collect();
            let p = GsiParams { length_scale: ell, noise_var: noise, ..Default::default() };
            let out = gp_regress(&t, y, &q, &p).unwrap();
            let oracle = lu_oracle(&t, y, &q, &p);
            for (a, b) in out.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
            }
        }

        #[test]
        fn frames_cover_input_and_boxes_valid(
            frames in proptest::collection::btree_set(1u32..80, 2..30),
            jitter in proptest::collection::vec(-3.0f64..3.0, 30),
        ) {
            let frames: Vec<u32> = frames.into_iter().collect();
            let t = Trajectory::new(2, frames.iter().enumerate().map(|(i, &k)| (k, BBox::new(k as f64 + jitter[i], 5.0, 1.0 + jitter[i].abs(), 2.0).unwrap())).collect()).unwrap();
            let out = interpolate_trajectory(&t, &GsiParams::default()).unwrap();
            prop_assert_eq!(out.first_frame(), t.first_frame());
            prop_assert_eq!(out.last_frame(), t.last_frame());
            for k in &frames {
                prop_assert!(out.box_at(*k).is_some());
            }
            for (_, b) in out.samples() {
                prop_assert!(b.w >= 1.0 && b.h >= 1.0);
            }
        }

        #[test]
        fn constant_smoothing_is_idempotent(start in 1u32..20, len in 2u32..40, x in -10.0f64..100.0, w in 1.0f64..20.0) {
            let t = Trajectory::new(1, (start..start + len).map(|k| (k, BBox::new(x, 2.0 * x, w, w + 1.0).unwrap())).collect()).unwrap();
            let p = GsiParams::default();
            let once = interpolate_trajectory(&t, &p).unwrap();
            let twice = interpolate_trajectory(&once, &p).unwrap();
            for ((_, a), (_, b)) in once.samples().iter().zip(twice.samples()) {
                prop_assert!((a.x - b.x).abs() < 1e-6 && (a.w - b.w).abs() < 1e-6);
            }
            for ((_, a), (_, b)) in t.samples().iter().zip(once.samples()) {
                prop_assert!((a.x - b.x).abs() < 1e-6 && (a.y - b.y).abs() < 1e-6 && (a.h - b.h).abs() < 1e-6);
            }
        }
    }
}
