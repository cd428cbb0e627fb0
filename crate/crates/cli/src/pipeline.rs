//! Pipeline stages with rayon parallelism over independent units
//! (decomposition windows, frames, trajectories). Each unit is computed the
//! same way regardless of the thread count, so results are identical for
//! any pool size.

use rayon::prelude::*;
use shadowtrack_core::decompose::{block_ranges, decompose_block, enhance, DecomposeParams, Decomposition, Polarity};
use shadowtrack_core::detect::{detect_blobs, BlobParams};
use shadowtrack_core::interp::{interpolate_trajectory, GsiParams};
use shadowtrack_core::metrics::{evaluate, MotReport};
use shadowtrack_core::track::track_video;
use shadowtrack_core::{Detection, FrameStack, Trajectory};

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::formats::mot;

pub fn decompose_parallel(stack: &FrameStack, params: &DecomposeParams) -> Result<Decomposition> {
    params.validate(stack.frames())?;
    let parts = block_ranges(stack.frames(), params.window)
        .into_par_iter()
        .map(|range| decompose_block(stack, range, params))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Decomposition::assemble(parts)?)
}

/// Shadow-enhanced frames, bright where shadows are.
pub fn run_enhance(stack: &FrameStack, params: &DecomposeParams) -> Result<FrameStack> {
    let d = decompose_parallel(stack, params)?;
    Ok(enhance(&d, stack.rows(), stack.cols(), params.polarity)?)
}

/// Raw frames turned so shadows are bright, as the detector expects.
pub fn raw_detector_input(stack: &FrameStack, polarity: Polarity) -> FrameStack {
    match polarity {
        Polarity::DarkShadows => stack.inverted(),
        Polarity::BrightShadows => stack.clone(),
    }
}

pub fn run_detect(stack: &FrameStack, params: &BlobParams) -> Result<Vec<Detection>> {
    let per_frame = (0..stack.frames())
        .into_par_iter()
        .map(|k| detect_blobs(&stack.frame(k), k as u32 + 1, params))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(per_frame.into_iter().flatten().collect())
}

pub fn run_track(dets: &[Detection], frames: u32, cfg: &PipelineConfig) -> Result<Vec<Trajectory>> {
    Ok(track_video(dets, frames, &cfg.effective_assoc(), &cfg.kalman.model())?)
}

pub fn run_interp(trajs: &[Trajectory], params: &GsiParams) -> Result<Vec<Trajectory>> {
    Ok(trajs
        .par_iter()
        .map(|t| interpolate_trajectory(t, params))
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Frames handed to the detector.
    pub detector_input: FrameStack,
    pub detections: Vec<Detection>,
    pub tracks: Vec<Trajectory>,
    pub report: Option<MotReport>,
}

/// enhance → detect → track → interp → eval, following the switches.
pub fn run_pipeline(stack: &FrameStack, gt: Option<&[Trajectory]>, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let detector_input = if cfg.switches.mtsd_on {
        run_enhance(stack, &cfg.decompose)?
    } else {
        raw_detector_input(stack, cfg.decompose.polarity)
    };
    // Stage boundaries go through file precision so that chaining the
    // single-stage commands gives the same bytes.
    let detections = mot::quantize_detections(&run_detect(&detector_input, &cfg.blob)?)?;
    let coarse = mot::quantize_trajectories(&run_track(&detections, stack.frames() as u32, cfg)?)?;
    let tracks = if cfg.switches.gsi_on { run_interp(&coarse, &cfg.gsi)? } else { coarse };
    let report = gt.map(|gt| evaluate(gt, &tracks, &cfg.eval)).transpose()?;
    Ok(PipelineOutput { detector_input, detections, tracks, report })
}
