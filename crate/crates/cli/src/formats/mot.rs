//! MOT CSV: `frame,id,x,y,w,h,conf,-1,-1,-1`, one record per line.
//!
//! Detection files use id -1; track and ground-truth files use positive ids
//! and confidence 1. Floats are written with 6 decimals and records sorted
//! by `(frame, id)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use shadowtrack_core::{BBox, Detection, Trajectory};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRecord {
    pub frame: u32,
    pub id: i64,
    pub bbox: BBox,
    pub confidence: f64,
}

fn push_record(out: &mut String, frame: u32, id: i64, b: &BBox, conf: f64) {
    writeln!(out, "{frame},{id},{:.6},{:.6},{:.6},{:.6},{conf:.6},-1,-1,-1", b.x, b.y, b.w, b.h).unwrap();
}

fn parse_line(line: &str) -> std::result::Result<MotRecord, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if !(7..=10).contains(&fields.len()) {
        return Err(format!("expected 10 comma-separated fields, found {}", fields.len()));
    }
    let num = |i: usize, name: &str| -> std::result::Result<f64, String> {
        let v: f64 = fields[i].parse().map_err(|_| format!("{name} {:?} is not a number", fields[i]))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{name} is not finite"))
        }
    };
    let frame: u32 = fields[0].parse().map_err(|_| format!("frame {:?} is not a positive integer", fields[0]))?;
    if frame == 0 {
        return Err("frame numbers start at 1".into());
    }
    let id: i64 = fields[1].parse().map_err(|_| format!("id {:?} is not an integer", fields[1]))?;
    let bbox = BBox::new(num(2, "x")?, num(3, "y")?, num(4, "w")?, num(5, "h")?).map_err(|e| e.to_string())?;
    let confidence = num(6, "confidence")?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(format!("confidence {confidence} outside [0, 1]"));
    }
    Ok(MotRecord { frame, id, bbox, confidence })
}

fn line_error(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::format(path, Some(format!("line {line}")), message)
}

/// Parses every non-blank line into `(line number, record)`, 1-based.
pub fn parse(text: &str, path: &Path) -> Result<Vec<(usize, MotRecord)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_line(line).map_err(|m| line_error(path, i + 1, m))?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

pub fn format_detections(dets: &[Detection]) -> String {
    let mut sorted: Vec<&Detection> = dets.iter().collect();
    sorted.sort_by_key(|d| d.frame);
    let mut out = String::new();
    for d in sorted {
        push_record(&mut out, d.frame, -1, &d.bbox, d.confidence);
    }
    out
}

pub fn format_trajectories(trajs: &[Trajectory]) -> String {
    let mut rows: Vec<(u32, u32, BBox)> = trajs
        .iter()
        .flat_map(|t| t.samples().iter().map(move |&(f, b)| (f, t.id(), b)))
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = String::new();
    for (frame, id, b) in rows {
        push_record(&mut out, frame, id as i64, &b, 1.0);
    }
    out
}

pub fn parse_detections(text: &str, path: &Path) -> Result<Vec<Detection>> {
    parse(text, path)?
        .into_iter()
        .map(|(line, rec)| {
            if rec.id != -1 {
                return Err(line_error(path, line, "detection records need id -1"));
            }
            Ok(Detection { frame: rec.frame, bbox: rec.bbox, confidence: rec.confidence })
        })
        .collect()
}

/// Groups records by id into trajectories sorted by id.
pub fn parse_trajectories(text: &str, path: &Path) -> Result<Vec<Trajectory>> {
    let mut by_id: std::collections::BTreeMap<u32, Vec<(u32, BBox, usize)>> = Default::default();
    for (line, rec) in parse(text, path)? {
        let id = u32::try_from(rec.id)
            .ok()
            .filter(|&id| id > 0)
            .ok_or_else(|| line_error(path, line, "track records need a positive id"))?;
        by_id.entry(id).or_default().push((rec.frame, rec.bbox, line));
    }
    let mut out = Vec::with_capacity(by_id.len());
    for (id, mut samples) in by_id {
        samples.sort_by_key(|s| s.0);
        if let Some(w) = samples.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(line_error(path, w[1].2, format!("id {id} has two boxes in frame {}", w[0].0)));
        }
        out.push(Trajectory::new(id, samples.into_iter().map(|s| (s.0, s.1)).collect())?);
    }
    Ok(out)
}

/// Rounds detections to what a detection file can hold.
pub fn quantize_detections(dets: &[Detection]) -> Result<Vec<Detection>> {
    parse_detections(&format_detections(dets), Path::new("<memory>"))
}

/// Rounds trajectories to what a track file can hold.
pub fn quantize_trajectories(trajs: &[Trajectory]) -> Result<Vec<Trajectory>> {
    parse_trajectories(&format_trajectories(trajs), Path::new("<memory>"))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    parse_detections(&read_text(path)?, path)
}

pub fn write_detections(path: &Path, dets: &[Detection]) -> Result<()> {
    write_text(path, &format_detections(dets))
}

pub fn read_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    parse_trajectories(&read_text(path)?, path)
}

pub fn write_trajectories(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    write_text(path, &format_trajectories(trajs))
}
