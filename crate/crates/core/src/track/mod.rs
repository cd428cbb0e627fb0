//! Confidence-weighted Kalman tracking with low-confidence recall.

pub mod assign;
pub mod kalman;
pub mod tracker;

pub use assign::{gated_assignment, max_weight_assignment};
pub use kalman::{Gaussian, KalmanModel, NoiseModel};
pub use tracker::{track_video, AssocConfig, FrameAssociation, Track, TrackStatus, Tracker, IOU_MIN};
