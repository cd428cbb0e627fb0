//! Two-phase association and track lifecycle.
//!
//! Per frame: predict every live track; match confirmed (and lost) tracks to
//! high-confidence detections; match tentative tracks to what is left; then,
//! with recall on, match every still-unmatched track to the low-confidence
//! detections. Matching maximizes total IoU and accepts pairs with
//! IoU > [`IOU_MIN`]. Matched tracks are updated with the detection's
//! confidence as Kalman weight.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{iou, BBox, Detection, Trajectory};
use crate::track::assign::gated_assignment;
use crate::track::kalman::{measurement_of, Gaussian, KalmanModel};

/// IoU a pair must exceed to be matched.
pub const IOU_MIN: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct AssocConfig {
    /// Detections at or above this confidence take part in the first phase.
    pub tau_high: f64,
    /// Detections below this confidence are discarded.
    pub tau_low: f64,
    /// Consecutive matched frames before a tentative track is confirmed.
    pub n_init: u32,
    /// Frames a lost track survives without a match.
    pub max_age: u32,
    /// Upper clamp on the confidence used as Kalman weight.
    pub c_max: f64,
    /// Second phase over low-confidence detections.
    pub recall: bool,
    /// Weight updates by detection confidence. When off every update uses 0.
    pub confidence_gain: bool,
    /// Lost tracks compete for high-confidence detections in the first phase.
    /// When off they are only matched in the second phase.
    pub lost_in_phase1: bool,
}

impl Default for AssocConfig {
    fn default() -> Self {
        AssocConfig {
            tau_high: 0.6,
            tau_low: 0.1,
            n_init: 2,
            max_age: 30,
            c_max: 0.99,
            recall: true,
            confidence_gain: true,
            lost_in_phase1: true,
        }
    }
}

impl AssocConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.tau_low && self.tau_low < self.tau_high && self.tau_high <= 1.0) {
            return Err(Error::param("tau_low", "need 0 <= tau_low < tau_high <= 1"));
        }
        if self.n_init < 1 {
            return Err(Error::param("n_init", "must be at least 1"));
        }
        if self.max_age < 1 {
            return Err(Error::param("max_age", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.c_max) {
            return Err(Error::param("c_max", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Active,
    Lost,
    Removed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    key: u64,
    id: Option<u32>,
    state: Gaussian,
    status: TrackStatus,
    age_since_update: u32,
    hits: u32,
    history: Vec<(u32, BBox, f64)>,
    samples: Vec<(u32, BBox)>,
}

impl Track {
    /// Creation-order key; unique per tracker and never reused.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Public id, assigned on confirmation.
    pub fn id(&self) -> Option<u32> {
        self.id
    }

    pub fn state(&self) -> &Gaussian {
        &self.state
    }

    pub fn status(&self) -> TrackStatus {
        self.status
    }

    pub fn age_since_update(&self) -> u32 {
        self.age_since_update
    }

    pub fn hits(&self) -> u32 {
        self.hits
    }

    /// Posterior box and detection confidence at every matched frame.
    pub fn history(&self) -> &[(u32, BBox, f64)] {
        &self.history
    }

    fn trajectory(&self) -> Option<Trajectory> {
        let id = self.id?;
        Some(Trajectory::new(id, self.samples.clone()).expect("track samples are ordered"))
    }
}

/// Bookkeeping of one [`Tracker::step`]. Tracks are named by key,
/// detections by their index in the input slice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameAssociation {
    pub frame: u32,
    /// High-confidence matches.
    pub matches: Vec<(u64, usize)>,
    /// Low-confidence matches from the second phase.
    pub recalled_matches: Vec<(u64, usize)>,
    pub new_tentatives: Vec<u64>,
    /// Tracks that went from active to lost in this frame.
    pub lost_tracks: Vec<u64>,
    pub removed_tracks: Vec<u64>,
    /// Detections below `tau_low` and unmatched low-confidence detections.
    pub dropped_dets: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: AssocConfig,
    model: KalmanModel,
    tracks: Vec<Track>,
    finished: Vec<Trajectory>,
    next_key: u64,
    next_id: u32,
    last_frame: Option<u32>,
}

fn match_phase(tracks: &[Track], rows: &[usize], dets: &[Detection], cols: &[usize]) -> Vec<(usize, usize)> {
    let boxes: Vec<BBox> = rows.iter().map(|&t| tracks[t].state.bbox()).collect();
    let mut weights = Vec::with_capacity(rows.len() * cols.len());
    for b in &boxes {
        weights.extend(cols.iter().map(|&d| iou(b, &dets[d].bbox)));
    }
    gated_assignment(&weights, rows.len(), cols.len(), |w| w > IOU_MIN)
        .into_iter()
        .map(|(i, j)| (rows[i], cols[j]))
        .collect()
}

impl Tracker {
    pub fn new(cfg: AssocConfig, model: KalmanModel) -> Result<Self> {
        cfg.validate()?;
        model.validate()?;
        Ok(Tracker {
            cfg,
            model,
            tracks: Vec::new(),
            finished: Vec::new(),
            next_key: 0,
            next_id: 1,
            last_frame: None,
        })
    }

    /// Live tracks in creation order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Advances one frame. Frames must increase; every detection must carry
    /// `frame`.
    pub fn step(&mut self, frame: u32, dets: &[Detection]) -> Result<FrameAssociation> {
        if frame == 0 {
            return Err(Error::InvalidFrame(0));
        }
        if let Some(previous) = self.last_frame {
            if frame <= previous {
                return Err(Error::NonIncreasingFrames { previous, next: frame });
            }
        }
        for d in dets {
            if d.frame != frame {
                return Err(Error::InvalidFrame(d.frame));
            }
            d.bbox.validate()?;
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(Error::InvalidConfidence(d.confidence));
            }
        }
        self.last_frame = Some(frame);
        let mut out = FrameAssociation {
            frame,
            ..Default::default()
        };

        let mut priors = Vec::with_capacity(self.tracks.len());
        for t in &mut self.tracks {
            t.state = self.model.predict(&t.state);
            priors.push(t.state.clone());
        }

        let mut high = Vec::new();
        let mut low = Vec::new();
        for (i, d) in dets.iter().enumerate() {
            if d.confidence >= self.cfg.tau_high {
                high.push(i);
            } else if d.confidence >= self.cfg.tau_low {
                low.push(i);
            } else {
                out.dropped_dets.push(i);
            }
        }

        let mut track_matched = alloc::vec![false; self.tracks.len()];
        let mut det_matched = alloc::vec![false; dets.len()];
        let mut pairs: Vec<(usize, usize, bool)> = Vec::new();

        let confirmed: Vec<usize> = (0..self.tracks.len())
            .filter(|&t| match self.tracks[t].status {
                TrackStatus::Active => true,
                TrackStatus::Lost => self.cfg.lost_in_phase1,
                _ => false,
            })
            .collect();
        for (t, d) in match_phase(&self.tracks, &confirmed, dets, &high) {
            track_matched[t] = true;
            det_matched[d] = true;
            pairs.push((t, d, false));
        }

        let tentative: Vec<usize> = (0..self.tracks.len())
            .filter(|&t| self.tracks[t].status == TrackStatus::Tentative)
            .collect();
        let remaining_high: Vec<usize> = high.iter().copied().filter(|&d| !det_matched[d]).collect();
        for (t, d) in match_phase(&self.tracks, &tentative, dets, &remaining_high) {
            track_matched[t] = true;
            det_matched[d] = true;
            pairs.push((t, d, false));
        }

        if self.cfg.recall {
            let unmatched: Vec<usize> = (0..self.tracks.len()).filter(|&t| !track_matched[t]).collect();
            for (t, d) in match_phase(&self.tracks, &unmatched, dets, &low) {
                track_matched[t] = true;
                det_matched[d] = true;
                pairs.push((t, d, true));
            }
        }
        out.dropped_dets.extend(low.iter().copied().filter(|&d| !det_matched[d]));
        out.dropped_dets.sort_unstable();

        pairs.sort_unstable_by_key(|&(t, _, _)| t);
        for (t, d, recalled) in pairs {
            let det = &dets[d];
            let c = if self.cfg.confidence_gain { det.confidence } else { 0.0 };
            let posterior = self.model.update(&priors[t], &measurement_of(&det.bbox), c, self.cfg.c_max)?;
            let track = &mut self.tracks[t];
            track.state = posterior;
            track.hits += 1;
            track.age_since_update = 0;
            match track.status {
                TrackStatus::Tentative if track.hits >= self.cfg.n_init => {
                    track.status = TrackStatus::Active;
                    track.id = Some(self.next_id);
                    self.next_id += 1;
                }
                TrackStatus::Lost => track.status = TrackStatus::Active,
                _ => {}
            }
            let b = track.state.bbox();
            track.history.push((frame, b, det.confidence));
            if track.id.is_some() {
                track.samples.push((frame, b));
            }
            if recalled {
                out.recalled_matches.push((track.key, d));
            } else {
                out.matches.push((track.key, d));
            }
        }

        for (t, track) in self.tracks.iter_mut().enumerate() {
            if track_matched[t] {
                continue;
            }
            track.hits = 0;
            track.age_since_update += 1;
            match track.status {
                TrackStatus::Tentative => track.status = TrackStatus::Removed,
                TrackStatus::Active => {
                    track.status = TrackStatus::Lost;
                    out.lost_tracks.push(track.key);
                }
                TrackStatus::Lost if track.age_since_update > self.cfg.max_age => track.status = TrackStatus::Removed,
                _ => {}
            }
        }

        let mut kept = Vec::with_capacity(self.tracks.len());
        for track in self.tracks.drain(..) {
            if track.status == TrackStatus::Removed {
                out.removed_tracks.push(track.key);
                self.finished.extend(track.trajectory());
            } else {
                kept.push(track);
            }
        }
        self.tracks = kept;

        for d in high.into_iter().filter(|&d| !det_matched[d]) {
            let det = &dets[d];
            let state = self.model.initiate(&measurement_of(&det.bbox));
            let mut track = Track {
                key: self.next_key,
                id: None,
                status: TrackStatus::Tentative,
                age_since_update: 0,
                hits: 1,
                history: alloc::vec![(frame, state.bbox(), det.confidence)],
                samples: Vec::new(),
                state,
            };
            if self.cfg.n_init <= 1 {
                track.status = TrackStatus::Active;
                track.id = Some(self.next_id);
                self.next_id += 1;
                track.samples.push((frame, track.state.bbox()));
            }
            out.new_tentatives.push(self.next_key);
            self.next_key += 1;
            self.tracks.push(track);
        }
        Ok(out)
    }

    /// Trajectories of every track that was ever confirmed, sorted by id.
    pub fn finish(mut self) -> Vec<Trajectory> {
        let live: Vec<Trajectory> = self.tracks.iter().filter_map(Track::trajectory).collect();
        self.finished.extend(live);
        self.finished.sort_by_key(Trajectory::id);
        self.finished
    }
}

/// Tracks frames `1..=frames`. Detections may come in any frame order;
/// within a frame their relative order is kept.
pub fn track_video(dets: &[Detection], frames: u32, cfg: &AssocConfig, model: &KalmanModel) -> Result<Vec<Trajectory>> {
    let mut sorted: Vec<Detection> = dets.to_vec();
    sorted.sort_by_key(|d| d.frame);
    if let Some(bad) = sorted.iter().find(|d| d.frame == 0 || d.frame > frames) {
        return Err(Error::InvalidFrame(bad.frame));
    }
    let mut tracker = Tracker::new(cfg.clone(), model.clone())?;
    let mut start = 0;
    for frame in 1..=frames {
        let end = start + sorted[start..].iter().take_while(|d| d.frame == frame).count();
        tracker.step(frame, &sorted[start..end])?;
        start = end;
    }
    Ok(tracker.finish())
}
