//! Boxes, detections and trajectories.
//!
//! Boxes are stored top-left `(x, y, w, h)` in float pixels, the layout used
//! by MOT files. The center form is only a view for the motion model.
//! Frame numbers carried by [`Detection`] and [`Trajectory`] are 1-based;
//! frame `k` is index `k - 1` of a [`FrameStack`](crate::frames::FrameStack).

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Axis-aligned box, top-left corner plus extent.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Center form `(cx, cy, w, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let b = BBox { x, y, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite();
        if !finite || self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::InvalidBox { w: self.w, h: self.h });
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn to_center(&self) -> CenterBox {
        CenterBox {
            cx: self.x + self.w / 2.0,
            cy: self.y + self.h / 2.0,
            w: self.w,
            h: self.h,
        }
    }

    pub fn from_center(c: CenterBox) -> Self {
        BBox {
            x: c.cx - c.w / 2.0,
            y: c.cy - c.h / 2.0,
            w: c.w,
            h: c.h,
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        BBox { x: self.x + dx, y: self.y + dy, ..*self }
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let iw = self.right().min(other.right()) - self.x.max(other.x);
        let ih = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }
}

/// Intersection over union of two valid boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// A detected box in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// 1-based frame number.
    pub frame: u32,
    pub bbox: BBox,
    pub confidence: f64,
}

impl Detection {
    pub fn new(frame: u32, bbox: BBox, confidence: f64) -> Result<Self> {
        if frame == 0 {
            return Err(Error::InvalidFrame(frame));
        }
        bbox.validate()?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidConfidence(confidence));
        }
        Ok(Detection { frame, bbox, confidence })
    }
}

/// Identity-labelled sequence of boxes with strictly increasing frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: u32,
    samples: Vec<(u32, BBox)>,
}

impl Trajectory {
    pub fn new(id: u32, samples: Vec<(u32, BBox)>) -> Result<Self> {
        if id == 0 {
            return Err(Error::param("id", "trajectory ids are positive"));
        }
        for (i, (frame, b)) in samples.iter().enumerate() {
            if *frame == 0 {
                return Err(Error::InvalidFrame(*frame));
            }
            b.validate()?;
            if i > 0 {
                let previous = samples[i - 1].0;
                if *frame <= previous {
                    return Err(Error::NonIncreasingFrames { previous, next: *frame });
                }
            }
        }
        Ok(Trajectory { id, samples })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn samples(&self) -> &[(u32, BBox)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first_frame(&self) -> Option<u32> {
        self.samples.first().map(|s| s.0)
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.samples.last().map(|s| s.0)
    }

    pub fn box_at(&self, frame: u32) -> Option<BBox> {
        self.samples
            .binary_search_by_key(&frame, |s| s.0)
            .ok()
            .map(|i| self.samples[i].1)
    }

    /// Number of maximal runs of consecutive frames.
    pub fn segments(&self) -> usize {
        if self.samples.is_empty() {
            return 0;
        }
        1 + self.samples.windows(2).filter(|w| w[1].0 != w[0].0 + 1).count()
    }

    pub fn into_samples(self) -> Vec<(u32, BBox)> {
        self.samples
    }
}
