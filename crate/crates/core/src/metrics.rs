//! Tracking evaluation: CLEAR (MOTA, ID switches, MT/ML), identity
//! (IDF1/IDP/IDR) and HOTA (DetA/AssA).
//!
//! All three families share one per-frame IoU matrix. Boxes are matched
//! one-to-one at `IoU ≥ threshold`; assignment maximizes the number of pairs
//! and then their total score.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{iou, BBox};
use crate::mac_sort::linear_assignment;

/// Tolerance on the threshold comparison so that an IoU of exactly the
/// threshold survives rounding.
const THRESHOLD_EPS: f64 = f64::EPSILON;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("prediction frame {frame} lies outside the ground-truth range (last frame {last})")]
    FrameMismatch { frame: u32, last: u32 },
    #[error("id {id} appears twice in frame {frame}")]
    DuplicateId { frame: u32, id: u64 },
    #[error("iou threshold must be in (0, 1), got {0}")]
    InvalidThreshold(f64),
}

/// Boxes with identities, grouped by frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackSequence {
    pub frames: BTreeMap<u32, Vec<(u64, BBox)>>,
}

impl TrackSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, frame: u32, id: u64, bbox: BBox) {
        self.frames.entry(frame).or_default().push((id, bbox));
    }

    pub fn from_records(records: impl IntoIterator<Item = (u32, u64, BBox)>) -> Self {
        let mut s = Self::new();
        for (frame, id, bbox) in records {
            s.push(frame, id, bbox);
        }
        s
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.frames.keys().next_back().copied()
    }

    pub fn num_boxes(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    fn check_unique_ids(&self) -> Result<(), MetricsError> {
        for (&frame, boxes) in &self.frames {
            let mut seen = BTreeSet::new();
            for &(id, _) in boxes {
                if !seen.insert(id) {
                    return Err(MetricsError::DuplicateId { frame, id });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsConfig {
    pub iou_threshold: f64,
    /// Average HOTA, DetA and AssA over thresholds 0.05, 0.10, …, 0.95
    /// instead of using `iou_threshold` alone.
    pub hota_sweep: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { iou_threshold: 0.5, hota_sweep: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hota: f64,
    pub deta: f64,
    pub assa: f64,
    pub mota: f64,
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    pub id_switches: u64,
    pub mostly_tracked: u64,
    pub partially_tracked: u64,
    pub mostly_lost: u64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub gt_dets: u64,
    pub pred_dets: u64,
    pub gt_ids: u64,
    pub pred_ids: u64,
    pub iou_threshold: f64,
    pub hota_sweep: bool,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |x: f64| 100.0 * x;
        writeln!(f, "HOTA  {:7.3}   DetA {:7.3}   AssA {:7.3}", pct(self.hota), pct(self.deta), pct(self.assa))?;
        writeln!(f, "MOTA  {:7.3}   IDF1 {:7.3}   IDP  {:7.3}   IDR {:7.3}", pct(self.mota), pct(self.idf1), pct(self.idp), pct(self.idr))?;
        writeln!(f, "TP {}  FP {}  FN {}  IDSW {}", self.tp, self.fp, self.fn_, self.id_switches)?;
        write!(
            f,
            "MT {}  PT {}  ML {}  (gt ids {}, pred ids {})",
            self.mostly_tracked, self.partially_tracked, self.mostly_lost, self.gt_ids, self.pred_ids
        )
    }
}

/// `num/den`, or 1 when there is nothing to measure.
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// Dense numbering of ids in order of first appearance.
#[derive(Default)]
struct IdIndex {
    map: HashMap<u64, usize>,
}

impl IdIndex {
    fn get(&mut self, id: u64) -> usize {
        let n = self.map.len();
        *self.map.entry(id).or_insert(n)
    }

    fn len(&self) -> usize {
        self.map.len()
    }
}

/// One frame's boxes with dense id indices and the IoU matrix (rows gt).
struct Frame {
    gt: Vec<usize>,
    pred: Vec<usize>,
    sim: Vec<Vec<f64>>,
}

fn passes(sim: f64, threshold: f64) -> bool {
    sim >= threshold - THRESHOLD_EPS
}

/// One-to-one matching that maximizes the number of pairs with
/// `sim ≥ threshold`, then the total `score` over them.
fn best_matching(sim: &[Vec<f64>], score: impl Fn(usize, usize) -> f64, threshold: f64) -> Vec<(usize, usize)> {
    let cost: Vec<Vec<f64>> = sim
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &s)| if passes(s, threshold) { -score(i, j) } else { f64::INFINITY })
                .collect()
        })
        .collect();
    linear_assignment(&cost).matches
}

/// Matches one frame: previous-frame pairs that still clear the threshold are
/// kept, the rest are matched by maximum IoU.
///
/// `carry` holds `(gt index, pred index)` pairs by position in this frame.
pub fn match_frame(
    gt: &[BBox],
    pred: &[BBox],
    carry: &[(usize, usize)],
    iou_threshold: f64,
) -> Vec<(usize, usize)> {
    let sim: Vec<Vec<f64>> = gt.iter().map(|g| pred.iter().map(|p| iou(g, p)).collect()).collect();
    match_with_carry(&sim, carry, iou_threshold)
}

fn match_with_carry(sim: &[Vec<f64>], carry: &[(usize, usize)], threshold: f64) -> Vec<(usize, usize)> {
    let mut gt_used = vec![false; sim.len()];
    let mut pred_used = vec![false; sim.first().map_or(0, Vec::len)];
    let mut matches = Vec::new();
    for &(i, j) in carry {
        if i < gt_used.len() && j < pred_used.len() && !gt_used[i] && !pred_used[j] && passes(sim[i][j], threshold) {
            gt_used[i] = true;
            pred_used[j] = true;
            matches.push((i, j));
        }
    }
    let rows: Vec<usize> = (0..gt_used.len()).filter(|&i| !gt_used[i]).collect();
    let cols: Vec<usize> = (0..pred_used.len()).filter(|&j| !pred_used[j]).collect();
    if !rows.is_empty() && !cols.is_empty() {
        let sub: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| sim[i][j]).collect()).collect();
        for (a, b) in best_matching(&sub, |a, b| sub[a][b], threshold) {
            matches.push((rows[a], cols[b]));
        }
    }
    matches.sort_unstable();
    matches
}

/// Scores `pred` against `gt`.
pub fn evaluate(gt: &TrackSequence, pred: &TrackSequence, cfg: &MetricsConfig) -> Result<MetricsReport, MetricsError> {
    if !(cfg.iou_threshold > 0.0 && cfg.iou_threshold < 1.0) {
        return Err(MetricsError::InvalidThreshold(cfg.iou_threshold));
    }
    gt.check_unique_ids()?;
    pred.check_unique_ids()?;
    if let Some(last_pred) = pred.last_frame() {
        let last = gt.last_frame().unwrap_or(0);
        if last_pred > last {
            return Err(MetricsError::FrameMismatch { frame: last_pred, last });
        }
    }

    let mut gt_ids = IdIndex::default();
    let mut pred_ids = IdIndex::default();
    let empty = Vec::new();
    let frame_keys: BTreeSet<u32> = gt.frames.keys().chain(pred.frames.keys()).copied().collect();
    let frames: Vec<Frame> = frame_keys
        .iter()
        .map(|f| {
            let g = gt.frames.get(f).unwrap_or(&empty);
            let p = pred.frames.get(f).unwrap_or(&empty);
            Frame {
                gt: g.iter().map(|&(id, _)| gt_ids.get(id)).collect(),
                pred: p.iter().map(|&(id, _)| pred_ids.get(id)).collect(),
                sim: g.iter().map(|(_, gb)| p.iter().map(|(_, pb)| iou(gb, pb)).collect()).collect(),
            }
        })
        .collect();
    let (n_gt, n_pred) = (gt_ids.len(), pred_ids.len());

    let clear = clear_metrics(&frames, n_gt, n_pred, cfg.iou_threshold);
    let identity = identity_metrics(&frames, n_gt, n_pred, cfg.iou_threshold);
    let alphas: Vec<f64> = if cfg.hota_sweep {
        (1..=19).map(|k| f64::from(k) * 0.05).collect()
    } else {
        vec![cfg.iou_threshold]
    };
    let hota = hota_metrics(&frames, n_gt, n_pred, &alphas);

    let gt_total = gt.num_boxes() as u64;
    let pred_total = pred.num_boxes() as u64;
    let errors = (clear.fn_ + clear.fp + clear.id_switches) as f64;
    Ok(MetricsReport {
        hota: hota.hota,
        deta: hota.deta,
        assa: hota.assa,
        mota: 1.0 - errors / (gt_total.max(1) as f64),
        idf1: identity.idf1,
        idp: identity.idp,
        idr: identity.idr,
        id_switches: clear.id_switches,
        mostly_tracked: clear.mostly_tracked,
        partially_tracked: clear.partially_tracked,
        mostly_lost: clear.mostly_lost,
        tp: clear.tp,
        fp: clear.fp,
        fn_: clear.fn_,
        gt_dets: gt_total,
        pred_dets: pred_total,
        gt_ids: n_gt as u64,
        pred_ids: n_pred as u64,
        iou_threshold: cfg.iou_threshold,
        hota_sweep: cfg.hota_sweep,
    })
}

#[derive(Default)]
struct Clear {
    tp: u64,
    fp: u64,
    fn_: u64,
    id_switches: u64,
    mostly_tracked: u64,
    partially_tracked: u64,
    mostly_lost: u64,
}

fn clear_metrics(frames: &[Frame], n_gt: usize, _n_pred: usize, threshold: f64) -> Clear {
    let mut out = Clear::default();
    let mut previous: HashMap<usize, usize> = HashMap::new();
    let mut last_match: Vec<Option<usize>> = vec![None; n_gt];
    let mut present = vec![0u64; n_gt];
    let mut tracked = vec![0u64; n_gt];

    for fr in frames {
        let carry: Vec<(usize, usize)> = fr
            .gt
            .iter()
            .enumerate()
            .filter_map(|(i, g)| {
                let p = previous.get(g)?;
                fr.pred.iter().position(|q| q == p).map(|j| (i, j))
            })
            .collect();
        let matches = match_with_carry(&fr.sim, &carry, threshold);
        previous.clear();
        for &(i, j) in &matches {
            let (g, p) = (fr.gt[i], fr.pred[j]);
            if last_match[g].is_some_and(|q| q != p) {
                out.id_switches += 1;
            }
            last_match[g] = Some(p);
            previous.insert(g, p);
            tracked[g] += 1;
        }
        for &g in &fr.gt {
            present[g] += 1;
        }
        out.tp += matches.len() as u64;
        out.fn_ += (fr.gt.len() - matches.len()) as u64;
        out.fp += (fr.pred.len() - matches.len()) as u64;
    }

    for g in 0..n_gt {
        let coverage = ratio(tracked[g] as f64, present[g] as f64);
        if coverage >= 0.8 {
            out.mostly_tracked += 1;
        } else if coverage <= 0.2 {
            out.mostly_lost += 1;
        } else {
            out.partially_tracked += 1;
        }
    }
    out
}

struct Identity {
    idf1: f64,
    idp: f64,
    idr: f64,
}

fn identity_metrics(frames: &[Frame], n_gt: usize, n_pred: usize, threshold: f64) -> Identity {
    let mut counts = vec![vec![0u64; n_pred]; n_gt];
    let mut gt_total = 0u64;
    let mut pred_total = 0u64;
    for fr in frames {
        gt_total += fr.gt.len() as u64;
        pred_total += fr.pred.len() as u64;
        for (i, row) in fr.sim.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                if passes(s, threshold) {
                    counts[fr.gt[i]][fr.pred[j]] += 1;
                }
            }
        }
    }
    // Every entry finite: pairing ids that never overlap costs nothing, so the
    // optimum is the maximum total of co-matched frames.
    let cost: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().map(|&c| -(c as f64)).collect()).collect();
    let idtp: u64 = linear_assignment(&cost).matches.iter().map(|&(g, p)| counts[g][p]).sum();
    let idfn = gt_total - idtp;
    let idfp = pred_total - idtp;
    let idtp = idtp as f64;
    Identity {
        idf1: ratio(2.0 * idtp, 2.0 * idtp + idfp as f64 + idfn as f64),
        idp: ratio(idtp, idtp + idfp as f64),
        idr: ratio(idtp, idtp + idfn as f64),
    }
}

struct Hota {
    hota: f64,
    deta: f64,
    assa: f64,
}

fn hota_metrics(frames: &[Frame], n_gt: usize, n_pred: usize, alphas: &[f64]) -> Hota {
    // Global alignment: how consistently each gt id overlaps each pred id
    // over the whole sequence, using soft per-frame IoU shares.
    let mut potential = vec![vec![0.0; n_pred]; n_gt];
    let mut gt_count = vec![0.0; n_gt];
    let mut pred_count = vec![0.0; n_pred];
    for fr in frames {
        let row_sum: Vec<f64> = fr.sim.iter().map(|r| r.iter().sum()).collect();
        let col_sum: Vec<f64> = (0..fr.pred.len()).map(|j| fr.sim.iter().map(|r| r[j]).sum()).collect();
        for (i, row) in fr.sim.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                let denom = row_sum[i] + col_sum[j] - s;
                if s > 0.0 && denom > 0.0 {
                    potential[fr.gt[i]][fr.pred[j]] += s / denom;
                }
            }
        }
        fr.gt.iter().for_each(|&g| gt_count[g] += 1.0);
        fr.pred.iter().for_each(|&p| pred_count[p] += 1.0);
    }
    let alignment: Vec<Vec<f64>> = (0..n_gt)
        .map(|g| {
            (0..n_pred)
                .map(|p| {
                    let x = potential[g][p];
                    ratio(x, gt_count[g] + pred_count[p] - x)
                })
                .collect()
        })
        .collect();

    let mut per_alpha = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut matches = vec![vec![0.0; n_pred]; n_gt];
        let (mut tp, mut fn_, mut fp) = (0.0, 0.0, 0.0);
        for fr in frames {
            let m = best_matching(&fr.sim, |i, j| alignment[fr.gt[i]][fr.pred[j]] * fr.sim[i][j], alpha);
            for &(i, j) in &m {
                matches[fr.gt[i]][fr.pred[j]] += 1.0;
            }
            tp += m.len() as f64;
            fn_ += (fr.gt.len() - m.len()) as f64;
            fp += (fr.pred.len() - m.len()) as f64;
        }
        let mut assoc = 0.0;
        for g in 0..n_gt {
            for p in 0..n_pred {
                let c = matches[g][p];
                if c > 0.0 {
                    assoc += c * c / (gt_count[g] + pred_count[p] - c);
                }
            }
        }
        let deta = ratio(tp, tp + fn_ + fp);
        let assa = if tp > 0.0 { assoc / tp } else { ratio(0.0, fn_ + fp) };
        per_alpha.push((deta, assa));
    }

    let k = per_alpha.len() as f64;
    let deta = per_alpha.iter().map(|x| x.0).sum::<f64>() / k;
    let assa = per_alpha.iter().map(|x| x.1).sum::<f64>() / k;
    let hota = if per_alpha.len() == 1 {
        (deta * assa).sqrt()
    } else {
        per_alpha.iter().map(|(d, a)| (d * a).sqrt()).sum::<f64>() / k
    };
    Hota { hota, deta, assa }
}
