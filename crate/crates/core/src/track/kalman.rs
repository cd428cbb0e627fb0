//! Constant-velocity Kalman filter over `(cx, cy, w, h)` with a
//! confidence-weighted measurement noise.
//!
//! The state is `(cx, cy, w, h, vcx, vcy, vw, vh)`. An update with
//! confidence `c` uses the innovation covariance `H P̄ Hᵀ + (1 - c) R`, so a
//! confident detection pulls the state harder toward the measurement.

use nalgebra::{Cholesky, SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::{BBox, CenterBox};

pub type State = SVector<f64, 8>;
pub type StateCov = SMatrix<f64, 8, 8>;
pub type Measurement = SVector<f64, 4>;
pub type MeasurementCov = SMatrix<f64, 4, 4>;
pub type Observation = SMatrix<f64, 4, 8>;

/// Process and measurement noise.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum NoiseModel {
    /// Diagonal noise whose standard deviations scale with the box height:
    /// `position * h` for `(cx, cy, w, h)` and `velocity * h` for their rates.
    /// `R` uses `position * h`.
    HeightScaled { position: f64, velocity: f64 },
    /// Constant `Q` and `R`.
    Fixed { q: StateCov, r: MeasurementCov },
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::HeightScaled {
            position: 1.0 / 20.0,
            velocity: 1.0 / 160.0,
        }
    }
}

/// Gaussian state estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub mean: State,
    pub cov: StateCov,
}

impl Gaussian {
    /// Box of the position/size part, with `w` and `h` floored at 1.
    pub fn bbox(&self) -> BBox {
        BBox::from_center(CenterBox {
            cx: self.mean[0],
            cy: self.mean[1],
            w: self.mean[2].max(1.0),
            h: self.mean[3].max(1.0),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanModel {
    pub a: StateCov,
    pub h: Observation,
    pub noise: NoiseModel,
}

impl Default for KalmanModel {
    fn default() -> Self {
        Self::constant_velocity(NoiseModel::default())
    }
}

pub fn measurement_of(b: &BBox) -> Measurement {
    let c = b.to_center();
    Measurement::new(c.cx, c.cy, c.w, c.h)
}

fn diag_sq<const N: usize>(std: [f64; N]) -> SMatrix<f64, N, N> {
    SMatrix::from_diagonal(&SVector::from_iterator(std.iter().map(|s| s * s)))
}

impl KalmanModel {
    /// Unit-step constant-velocity transition with `H = [I 0]`.
    pub fn constant_velocity(noise: NoiseModel) -> Self {
        let mut a = StateCov::identity();
        for i in 0..4 {
            a[(i, i + 4)] = 1.0;
        }
        let mut h = Observation::zeros();
        for i in 0..4 {
            h[(i, i)] = 1.0;
        }
        KalmanModel { a, h, noise }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.noise {
            NoiseModel::HeightScaled { position, velocity } => {
                if !(*position > 0.0 && position.is_finite()) {
                    return Err(Error::param("position", "noise scale must be positive"));
                }
                if !(*velocity >= 0.0 && velocity.is_finite()) {
                    return Err(Error::param("velocity", "noise scale must be non-negative"));
                }
            }
            NoiseModel::Fixed { q, r } => {
                if q.iter().chain(r.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite);
                }
                if (q - q.transpose()).amax() > 1e-12 || (r - r.transpose()).amax() > 1e-12 {
                    return Err(Error::param("noise", "Q and R must be symmetric"));
                }
                if Cholesky::new(*r).is_none() {
                    return Err(Error::NotPositiveDefinite("R"));
                }
            }
        }
        Ok(())
    }

    fn height(x: &State) -> f64 {
        x[3].max(1.0)
    }

    pub fn process_noise(&self, x: &State) -> StateCov {
        match &self.noise {
            NoiseModel::HeightScaled { position, velocity } => {
                let p = position * Self::height(x);
                let v = velocity * Self::height(x);
                diag_sq([p, p, p, p, v, v, v, v])
            }
            NoiseModel::Fixed { q, .. } => *q,
        }
    }

    pub fn measurement_noise(&self, x: &State) -> MeasurementCov {
        match &self.noise {
            NoiseModel::HeightScaled { position, .. } => {
                let p = position * Self::height(x);
                diag_sq([p, p, p, p])
            }
            NoiseModel::Fixed { r, .. } => *r,
        }
    }

    /// New track estimate from a first measurement, at rest.
    pub fn initiate(&self, z: &Measurement) -> Gaussian {
        let mut mean = State::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from(z);
        let cov = match &self.noise {
            NoiseModel::HeightScaled { position, velocity } => {
                let h = z[3].max(1.0);
                let p = 2.0 * position * h;
                let v = 10.0 * velocity * h;
                diag_sq([p, p, p, p, v, v, v, v])
            }
            NoiseModel::Fixed { q, r } => {
                let mut cov = *q;
                let mut block = cov.fixed_view_mut::<4, 4>(0, 0);
                block += r;
                cov
            }
        };
        Gaussian { mean, cov }
    }

    /// Prior `x̄ = A x`, `P̄ = A P Aᵀ + Q`.
    pub fn predict(&self, g: &Gaussian) -> Gaussian {
        let mean = self.a * g.mean;
        let cov = self.a * g.cov * self.a.transpose() + self.process_noise(&g.mean);
        Gaussian {
            mean,
            cov: symmetrize(cov),
        }
    }

    /// Posterior after measuring `z` with confidence `c`, clamped to `[0, c_max]`.
    ///
    /// `w` and `h` of the posterior mean are floored at 1.
    pub fn update(&self, prior: &Gaussian, z: &Measurement, c: f64, c_max: f64) -> Result<Gaussian> {
        if !c.is_finite() {
            return Err(Error::InvalidConfidence(c));
        }
        let c = c.clamp(0.0, c_max);
        let r = self.measurement_noise(&prior.mean);
        let hp = self.h * prior.cov;
        let s = hp * self.h.transpose() + r * (1.0 - c);
        let chol = Cholesky::new(symmetrize(s)).ok_or(Error::NotPositiveDefinite("innovation covariance"))?;
        let gain = chol.solve(&hp).transpose();
        let innovation = z - self.h * prior.mean;
        let mut mean = prior.mean + gain * innovation;
        mean[2] = mean[2].max(1.0);
        mean[3] = mean[3].max(1.0);
        let cov = (StateCov::identity() - gain * self.h) * prior.cov;
        Ok(Gaussian {
            mean,
            cov: symmetrize(cov),
        })
    }
}

fn symmetrize<const N: usize>(m: SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}
