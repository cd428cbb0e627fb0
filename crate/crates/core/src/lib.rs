//! Shadow-based multi-target tracking for Video-SAR.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the numerical pipeline:
//!
//! - [`decompose`]: low-rank background / sparse shadow / residual split and
//!   shadow enhancement.
//! - [`fusion`]: per-position softmax fusion of multi-level feature maps.
//! - [`detect`]: connected-component blob detector over enhanced frames.
//! - [`track`]: confidence-weighted Kalman filtering with two-phase
//!   association that recalls low-confidence detections.
//! - [`interp`]: Gaussian-process gap filling and smoothing of trajectories.
//! - [`metrics`]: CLEAR-MOT counts and MOTA.
//! - [`simulate`]: synthetic scenes with ground truth.
//!
//! File formats, the CLI and parallel drivers live in the `shadowtrack` crate.
//! Enable the `std` feature for faster dense matrix products.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod decompose;
pub mod detect;
pub mod error;
pub mod frames;
pub mod fusion;
pub mod geometry;
pub mod interp;
pub mod metrics;
pub mod simulate;
pub mod track;

pub use error::{Error, Result};
pub use frames::{FrameRef, FrameStack};
pub use geometry::{iou, BBox, CenterBox, Detection, Trajectory};
