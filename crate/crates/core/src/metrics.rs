//! CLEAR-MOT evaluation: MOTA with FP, FN, ID switches and fragmentations.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{iou, BBox, Trajectory};
use crate::track::assign::gated_assignment;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EvalParams {
    /// Minimum IoU for a ground-truth/hypothesis pair to count as a match.
    pub iou_thresh: f64,
    /// Keep last frame's pairs when they still overlap enough, before
    /// assigning the rest. When off, every frame is matched from scratch.
    pub persistent: bool,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            iou_thresh: 0.5,
            persistent: true,
        }
    }
}

/// Matching outcome of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameMatches {
    pub frame: u32,
    /// `(gt id, hypothesis id)` pairs, sorted by gt id.
    pub pairs: Vec<(u32, u32)>,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub id_switches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotReport {
    /// `1 - (FN + FP + IDSW) / GT`; `None` when there are no ground-truth boxes.
    pub mota: Option<f64>,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub id_switches: usize,
    pub fragmentations: usize,
    pub gt_boxes: usize,
    pub per_frame: Vec<FrameMatches>,
}

pub fn mota_from_counts(fp: usize, fn_: usize, idsw: usize, gt_boxes: usize) -> Option<f64> {
    (gt_boxes > 0).then(|| 1.0 - (fn_ + fp + idsw) as f64 / gt_boxes as f64)
}

fn sorted_unique<'a>(set: &'a [Trajectory], name: &'static str) -> Result<Vec<&'a Trajectory>> {
    let mut v: Vec<&Trajectory> = set.iter().collect();
    v.sort_by_key(|t| t.id());
    if v.windows(2).any(|w| w[0].id() == w[1].id()) {
        return Err(Error::param(name, "trajectory ids must be unique"));
    }
    Ok(v)
}

/// Boxes of every trajectory present at `frame`, as `(id, box)`.
fn present(set: &[&Trajectory], cursor: &mut [usize], frame: u32) -> Vec<(u32, BBox)> {
    let mut out = Vec::new();
    for (t, c) in set.iter().zip(cursor.iter_mut()) {
        if let Some(&(f, b)) = t.samples().get(*c) {
            if f == frame {
                out.push((t.id(), b));
                *c += 1;
            }
        }
    }
    out
}

/// Scores hypothesis trajectories against ground truth.
///
/// The result does not depend on the order of either list. Ids must be
/// unique within each list.
pub fn evaluate(gt: &[Trajectory], hyp: &[Trajectory], params: &EvalParams) -> Result<MotReport> {
    if !(params.iou_thresh > 0.0 && params.iou_thresh <= 1.0) {
        return Err(Error::param("iou_thresh", "must lie in (0, 1]"));
    }
    let gt = sorted_unique(gt, "gt")?;
    let hyp = sorted_unique(hyp, "hyp")?;
    let mut frames: Vec<u32> = gt.iter().chain(&hyp).flat_map(|t| t.samples().iter().map(|s| s.0)).collect();
    frames.sort_unstable();
    frames.dedup();

    let mut gt_cursor = alloc::vec![0usize; gt.len()];
    let mut hyp_cursor = alloc::vec![0usize; hyp.len()];
    // Per gt trajectory: last matched hypothesis id and whether it was
    // matched when last present.
    let mut last_hyp: Vec<Option<u32>> = alloc::vec![None; gt.len()];
    let mut was_matched = alloc::vec![false; gt.len()];
    let gt_index = |id: u32| gt.binary_search_by_key(&id, |t| t.id()).expect("gt id");

    let mut report = MotReport {
        mota: None,
        false_positives: 0,
        false_negatives: 0,
        id_switches: 0,
        fragmentations: 0,
        gt_boxes: 0,
        per_frame: Vec::with_capacity(frames.len()),
    };
    let mut previous: Vec<(u32, u32)> = Vec::new();

    for frame in frames {
        let g = present(&gt, &mut gt_cursor, frame);
        let h = present(&hyp, &mut hyp_cursor, frame);
        let mut g_used = alloc::vec![false; g.len()];
        let mut h_used = alloc::vec![false; h.len()];
        let mut pairs: Vec<(usize, usize)> = Vec::new();

        if params.persistent {
            for &(gid, hid) in &previous {
                let gi = g.iter().position(|x| x.0 == gid);
                let hi = h.iter().position(|x| x.0 == hid);
                if let (Some(gi), Some(hi)) = (gi, hi) {
                    if iou(&g[gi].1, &h[hi].1) >= params.iou_thresh {
                        g_used[gi] = true;
                        h_used[hi] = true;
                        pairs.push((gi, hi));
                    }
                }
            }
        }

        let rows: Vec<usize> = (0..g.len()).filter(|&i| !g_used[i]).collect();
        let cols: Vec<usize> = (0..h.len()).filter(|&j| !h_used[j]).collect();
        let mut weights = Vec::with_capacity(rows.len() * cols.len());
        for &i in &rows {
            weights.extend(cols.iter().map(|&j| iou(&g[i].1, &h[j].1)));
        }
        for (r, c) in gated_assignment(&weights, rows.len(), cols.len(), |w| w >= params.iou_thresh) {
            g_used[rows[r]] = true;
            h_used[cols[c]] = true;
            pairs.push((rows[r], cols[c]));
        }
        pairs.sort_unstable();

        let mut stats = FrameMatches {
            frame,
            pairs: pairs.iter().map(|&(i, j)| (g[i].0, h[j].0)).collect(),
            false_positives: h_used.iter().filter(|u| !**u).count(),
            false_negatives: g_used.iter().filter(|u| !**u).count(),
            id_switches: 0,
        };
        for &(i, j) in &pairs {
            let k = gt_index(g[i].0);
            if matches!(last_hyp[k], Some(prev) if prev != h[j].0) {
                stats.id_switches += 1;
            }
            last_hyp[k] = Some(h[j].0);
        }
        for (i, &(gid, _)) in g.iter().enumerate() {
            let k = gt_index(gid);
            if was_matched[k] && !g_used[i] {
                report.fragmentations += 1;
            }
            was_matched[k] = g_used[i];
        }

        report.gt_boxes += g.len();
        report.false_positives += stats.false_positives;
        report.false_negatives += stats.false_negatives;
        report.id_switches += stats.id_switches;
        previous = stats.pairs.clone();
        report.per_frame.push(stats);
    }
    report.mota = mota_from_counts(report.false_positives, report.false_negatives, report.id_switches, report.gt_boxes);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn b(x: f64) -> BBox {
        BBox::new(x, 10.0, 5.0, 5.0).unwrap()
    }

    fn t(id: u32, samples: Vec<(u32, BBox)>) -> Trajectory {
        Trajectory::new(id, samples).unwrap()
    }

    fn line(id: u32, frames: impl Iterator<Item = u32>, x0: f64) -> Trajectory {
        t(id, frames.map(|f| (f, b(x0 + f as f64))).collect())
    }

    #[test]
    fn identity() {
        let gt = vec![line(1, 1..=10, 0.0), line(2, 3..=8, 40.0)];
        let r = evaluate(&gt, &gt, &EvalParams::default()).unwrap();
        assert_eq!(r.mota, Some(1.0));
        assert_eq!((r.false_positives, r.false_negatives, r.id_switches, r.fragmentations), (0, 0, 0, 0));
        assert_eq!(r.gt_boxes, 16);
    }

    #[test]
    fn empty_hypothesis() {
        let gt = vec![line(1, 1..=10, 0.0)];
        let r = evaluate(&gt, &[], &EvalParams::default()).unwrap();
        assert_eq!(r.mota, Some(0.0));
        assert_eq!((r.false_negatives, r.false_positives, r.fragmentations), (10, 0, 0));
    }

    #[test]
    fn no_ground_truth_is_undefined() {
        let hyp = vec![line(1, 1..=3, 0.0)];
        let r = evaluate(&[], &hyp, &EvalParams::default()).unwrap();
        assert_eq!(r.mota, None);
        assert_eq!(r.false_positives, 3);
    }

    #[test]
    fn hand_walked() {
        let gt = vec![line(1, 1..=10, 0.0)];
        let mut samples: Vec<(u32, BBox)> = (1..=4).chain(7..=10).map(|f| (f, b(f as f64))).collect();
        samples.insert(4, (5, b(200.0)));
        let hyp = vec![t(7, samples)];
        let r = evaluate(&gt, &hyp, &EvalParams::default()).unwrap();
        assert_eq!((r.false_negatives, r.false_positives, r.id_switches, r.fragmentations), (2, 1, 0, 1));
        assert_eq!(r.mota, Some(0.7));
    }

    #[test]
    fn id_switch_and_persistence() {
        // Two hypotheses overlap the target; the previous pairing is kept even
        // though the other one overlaps more.
        let gt = vec![t(1, vec![(1, b(0.0)), (2, b(0.0)), (3, b(0.0))])];
        let near = t(1, vec![(1, b(0.0)), (2, b(1.0)), (3, b(1.0))]);
        let exact = t(2, vec![(2, b(0.0)), (3, b(0.0))]);
        let r = evaluate(&gt, &[near.clone(), exact.clone()], &EvalParams::default()).unwrap();
        assert_eq!((r.id_switches, r.false_positives), (0, 2));
        let p = EvalParams { persistent: false, ..Default::default() };
        let r = evaluate(&gt, &[near, exact], &p).unwrap();
        assert_eq!((r.id_switches, r.false_positives), (1, 2));
    }

    #[test]
    fn rejects_duplicate_ids() {
        let gt = vec![line(1, 1..=3, 0.0), line(1, 5..=6, 0.0)];
        assert!(evaluate(&gt, &[], &EvalParams::default()).is_err());
        assert!(evaluate(&[], &[], &EvalParams { iou_thresh: 0.0, persistent: true }).is_err());
    }

    fn scene() -> impl Strategy<Value = (Vec<Trajectory>, Vec<Trajectory>)> {
        (1usize..5, any::<u64>()).prop_map(|(n, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut gt = Vec::new();
            let mut hyp = Vec::new();
            for k in 0..n {
                let start = rng.random_range(1..10);
                let len = rng.random_range(2..20);
                let x0 = 30.0 * k as f64;
                gt.push(line(k as u32 + 1, start..start + len, x0));
                let mut samples = Vec::new();
                for f in start..start + len {
                    if rng.random_bool(0.8) {
                        samples.push((f, b(x0 + f as f64 + rng.random_range(-1.0..1.0))));
                    }
                }
                if !samples.is_empty() {
                    hyp.push(t(k as u32 + 10, samples));
                }
            }
            (gt, hyp)
        })
    }

    proptest! {
        #[test]
        fn mota_recomputes((gt, hyp) in scene()) {
            let r = evaluate(&gt, &hyp, &EvalParams::default()).unwrap();
            let m = mota_from_counts(r.false_positives, r.false_negatives, r.id_switches, r.gt_boxes).unwrap();
            prop_assert!((r.mota.unwrap() - m).abs() < 1e-12);
            prop_assert!(r.mota.unwrap() <= 1.0);
        }

        #[test]
        fn permutation_invariant((mut gt, mut hyp) in scene()) {
            let r = evaluate(&gt, &hyp, &EvalParams::default()).unwrap();
            gt.reverse();
            hyp.reverse();
            prop_assert_eq!(r, evaluate(&gt, &hyp, &EvalParams::default()).unwrap());
        }

        #[test]
        fn disjoint_box_adds_one_fp((gt, mut hyp) in scene(), frame in 1u32..30) {
            let r = evaluate(&gt, &hyp, &EvalParams::default()).unwrap();
            hyp.push(t(999, vec![(frame, BBox::new(-500.0, -500.0, 3.0, 3.0).unwrap())]));
            let s = evaluate(&gt, &hyp, &EvalParams::default()).unwrap();
            prop_assert_eq!(s.false_positives, r.false_positives + 1);
            prop_assert_eq!((s.false_negatives, s.id_switches, s.fragmentations), (r.false_negatives, r.id_switches, r.fragmentations));
        }

        #[test]
        fn deleting_a_match_adds_one_fn((gt, hyp) in scene(), pick in any::<prop::sample::Index>()) {
            let r = evaluate(&gt, &hyp, &EvalParams::default()).unwrap();
            let matched: Vec<(u32, u32, u32)> = r.per_frame.iter().flat_map(|f| f.pairs.iter().map(move |p| (f.frame, p.0, p.1))).collect();
            prop_assume!(!matched.is_empty());
            let (frame, gid, hid) = matched[pick.index(matched.len())];
            let edited: Vec<Trajectory> = hyp
                .iter()
                .filter_map(|h| {
                    let s: Vec<(u32, BBox)> = h.samples().iter().copied().filter(|s| !(h.id() == hid && s.0 == frame)).collect();
                    (!s.is_empty()).then(|| t(h.id(), s))
                })
                .collect();
            let s = evaluate(&gt, &edited, &EvalParams::default()).unwrap();
            prop_assert_eq!(s.false_negatives, r.false_negatives + 1);
            // An isolated match carries the fragmentation that follows it, so
            // removing it can lower FM; otherwise FM grows by at most one.
            let matched_before = matched.iter().any(|&(f, g, _)| g == gid && f + 1 == frame);
            let delta = s.fragmentations as i64 - r.fragmentations as i64;
            if matched_before {
                prop_assert!(delta == 0 || delta == 1, "delta {}", delta);
            } else {
                prop_assert!(delta == 0 || delta == -1, "delta {}", delta);
            }
        }
    }
}
