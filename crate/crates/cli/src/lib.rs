//! File formats, configuration, parallel pipeline drivers and the command
//! line for [`shadowtrack_core`].
//!
//! - Frame stacks: `VSR1` binary files or directories of 8-bit PGM frames.
//! - Detections, tracks and ground truth: MOT CSV.
//! - Reports: `MOTA,FP,FN,IDSW,FM,GT` CSV plus a text table.
//! - Rendering: SVG polylines over the first frame.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod render;
pub mod report;

pub use error::{CliError, Result};
