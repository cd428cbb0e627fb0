//! Command-line surface. Flags override values from `--config`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use shadowtrack_core::metrics::evaluate;
use shadowtrack_core::simulate::{generate, SceneConfig};
use shadowtrack_core::Trajectory;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::formats::{mot, read_frames, write_frames};
use crate::pipeline::{raw_detector_input, run_detect, run_enhance, run_interp, run_pipeline, run_track};
use crate::{render, report};

#[derive(Debug, Parser)]
#[command(name = "shadowtrack", version, about = "Shadow-based multi-target tracking for Video-SAR frame stacks")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; 1 gives a fully sequential run.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene and its ground truth.
    Simulate {
        /// Scene description (JSON); replaces the `scene` block of the config.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output frames: a `.vsr` file, or a directory for PGM frames.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ground-truth MOT CSV.
        #[arg(long)]
        gt: Option<PathBuf>,
    },
    /// Decompose frames and write the shadow-enhanced stack.
    Enhance {
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect blobs in enhanced frames.
    Detect {
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat input as raw frames with dark shadows and invert them first.
        #[arg(long)]
        invert: bool,
    },
    /// Associate detections into trajectories.
    Track {
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of frames; defaults to the last detection frame.
        #[arg(long)]
        num_frames: Option<u32>,
        #[arg(long, value_enum)]
        recall: Option<Switch>,
    },
    /// Fill gaps and smooth trajectories.
    Interp {
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score trajectories against ground truth.
    Eval {
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        hyp: Option<PathBuf>,
        /// Report CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// enhance → detect → track → interp → eval.
    Pipeline {
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        detections_out: Option<PathBuf>,
        #[arg(long)]
        tracks_out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        render: Option<PathBuf>,
        #[arg(long, value_enum)]
        mtsd: Option<Switch>,
        #[arg(long, value_enum)]
        recall: Option<Switch>,
        #[arg(long, value_enum)]
        gsi: Option<Switch>,
    },
    /// Draw trajectories as SVG polylines.
    Render {
        #[arg(long)]
        tracks: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Frames whose first frame is drawn underneath.
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
    },
}

fn need(flag: Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| config.clone()).ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn canvas_for(trajs: &[Trajectory]) -> (usize, usize) {
    let mut w: f64 = 1.0;
    let mut h: f64 = 1.0;
    for t in trajs {
        for (_, b) in t.samples() {
            w = w.max(b.right());
            h = h.max(b.bottom());
        }
    }
    (w.ceil() as usize, h.ceil() as usize)
}

/// Runs one command, printing human-readable output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let threads = cli.threads.unwrap_or(0);
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let mut printed = String::new();
    let outcome = pool.install(|| execute(cli.command, cfg, &mut printed));
    stdout
        .write_all(printed.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    outcome
}

fn execute(command: Command, mut cfg: PipelineConfig, stdout: &mut String) -> Result<()> {
    let paths = cfg.paths.clone();
    match command {
        Command::Simulate { scene, seed, out, gt } => {
            let mut scene_cfg = match scene {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                    serde_json::from_str::<SceneConfig>(&text).map_err(|e| CliError::format(&p, Some(format!("line {}", e.line())), e.to_string()))?
                }
                None => cfg.scene.clone(),
            };
            if let Some(s) = seed {
                scene_cfg.seed = s;
            }
            let out = need(out, &paths.frames, "out")?;
            let scene = generate(&scene_cfg)?;
            write_frames(&out, &scene.stack)?;
            if let Some(gt) = gt.or(paths.gt) {
                mot::write_trajectories(&gt, &scene.ground_truth)?;
            }
        }
        Command::Enhance { frames, out } => {
            let stack = read_frames(&need(frames, &paths.frames, "frames")?)?;
            write_frames(&out, &run_enhance(&stack, &cfg.decompose)?)?;
        }
        Command::Detect { frames, out, invert } => {
            cfg.blob.validate()?;
            let mut stack = read_frames(&need(frames, &paths.frames, "frames")?)?;
            if invert {
                stack = raw_detector_input(&stack, cfg.decompose.polarity);
            }
            let out = need(out, &paths.detections_out, "out")?;
            mot::write_detections(&out, &run_detect(&stack, &cfg.blob)?)?;
        }
        Command::Track { detections, out, num_frames, recall } => {
            if let Some(r) = recall {
                cfg.switches.recall_on = r.on();
            }
            cfg.validate()?;
            let dets = mot::read_detections(&need(detections, &paths.detections_in, "detections")?)?;
            let frames = num_frames.unwrap_or_else(|| dets.iter().map(|d| d.frame).max().unwrap_or(0));
            let out = need(out, &paths.tracks_out, "out")?;
            mot::write_trajectories(&out, &run_track(&dets, frames, &cfg)?)?;
        }
        Command::Interp { tracks, out } => {
            cfg.gsi.validate()?;
            let trajs = mot::read_trajectories(&tracks)?;
            mot::write_trajectories(&out, &run_interp(&trajs, &cfg.gsi)?)?;
        }
        Command::Eval { gt, hyp, report: report_path } => {
            let gt = mot::read_trajectories(&need(gt, &paths.gt, "gt")?)?;
            let hyp = mot::read_trajectories(&need(hyp, &paths.tracks_out, "hyp")?)?;
            let r = evaluate(&gt, &hyp, &cfg.eval)?;
            if let Some(p) = report_path.or(paths.report_out) {
                write_text(&p, &report::csv(&r))?;
            }
            stdout.push_str(&report::csv(&r));
            stdout.push_str(&report::table(&r));
        }
        Command::Pipeline { frames, gt, detections_out, tracks_out, report: report_path, render: render_path, mtsd, recall, gsi } => {
            for (flag, slot) in [(mtsd, &mut cfg.switches.mtsd_on), (recall, &mut cfg.switches.recall_on), (gsi, &mut cfg.switches.gsi_on)] {
                if let Some(s) = flag {
                    *slot = s.on();
                }
            }
            let stack = read_frames(&need(frames, &paths.frames, "frames")?)?;
            let tracks_out = need(tracks_out, &paths.tracks_out, "tracks-out")?;
            let gt = gt.or(paths.gt).map(|p| mot::read_trajectories(&p)).transpose()?;
            let out = run_pipeline(&stack, gt.as_deref(), &cfg)?;
            if let Some(p) = detections_out.or(paths.detections_out) {
                mot::write_detections(&p, &out.detections)?;
            }
            mot::write_trajectories(&tracks_out, &out.tracks)?;
            if let Some(p) = render_path.or(paths.render_out) {
                write_text(&p, &render::svg(&out.tracks, stack.cols(), stack.rows(), Some(&stack.frame(0))))?;
            }
            if let Some(r) = &out.report {
                if let Some(p) = report_path.or(paths.report_out) {
                    write_text(&p, &report::csv(r))?;
                }
                stdout.push_str(&report::table(r));
            }
        }
        Command::Render { tracks, out, background, width, height } => {
            let trajs = mot::read_trajectories(&need(tracks, &paths.tracks_out, "tracks")?)?;
            let out = need(out, &paths.render_out, "out")?;
            let (cw, ch) = canvas_for(&trajs);
            let svg = match background {
                Some(p) => {
                    let stack = read_frames(&p)?;
                    render::svg(&trajs, 0, 0, Some(&stack.frame(0)))
                }
                None => render::svg(&trajs, width.unwrap_or(cw), height.unwrap_or(ch), None),
            };
            write_text(&out, &svg)?;
        }
    }
    Ok(())
}
