use crate::geometry::{BBox, Detection, Embedding, DEGENERATE_NORM};
use crate::motion::{KalmanFilter, KalmanState, ObservationHistory};

use super::assignment::linear_assignment;
use super::cost::{build_cost_matrix, CostBreakdown};
use super::{AssocConfig, AssocError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    /// Current state; predicted to the present frame once a step has begun.
    pub state: KalmanState,
    /// Posterior at the last matched observation, the starting point for
    /// re-updating across an occlusion gap.
    pub observed_state: KalmanState,
    pub history: ObservationHistory,
    /// Unit-length moving average of matched detection embeddings.
    pub appearance: Embedding,
    pub hits: u32,
    pub age: u32,
    pub time_since_update: u32,
    pub status: TrackStatus,
    pub last_confidence: f64,
}

impl Track {
    /// Box of the current state, or `None` if the state has degenerated.
    pub fn predicted_box(&self) -> Option<BBox> {
        self.state.bbox().ok()
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == TrackStatus::Confirmed
    }

    fn blend_appearance(&mut self, feature: &Embedding, alpha: f64) {
        let f = feature.normalized();
        if self.appearance.norm() < DEGENERATE_NORM {
            self.appearance = f;
            return;
        }
        let mixed: Vec<f64> = self
            .appearance
            .as_slice()
            .iter()
            .zip(f.as_slice())
            .map(|(a, x)| alpha * a + (1.0 - alpha) * x)
            .collect();
        let mixed = Embedding::new(mixed);
        // Opposite features can cancel; keep the old appearance then.
        if mixed.norm() >= DEGENERATE_NORM {
            self.appearance = mixed.normalized();
        }
    }
}

/// One reported box for a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutput {
    pub id: u64,
    pub bbox: BBox,
    pub confidence: f64,
}

/// All live tracks of one sequence.
#[derive(Debug, Clone)]
pub struct TrackSet {
    pub tracks: Vec<Track>,
    kf: KalmanFilter,
    next_id: u64,
    last_frame: Option<u32>,
    last_cost: Option<CostBreakdown>,
}

impl Default for TrackSet {
    fn default() -> Self {
        Self::new(KalmanFilter::default())
    }
}

impl TrackSet {
    pub fn new(kf: KalmanFilter) -> Self {
        Self { tracks: Vec::new(), kf, next_id: 1, last_frame: None, last_cost: None }
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.last_frame
    }

    /// Cost matrix and weights used in the most recent step.
    pub fn last_cost(&self) -> Option<&CostBreakdown> {
        self.last_cost.as_ref()
    }

    /// Id the next new track will receive.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }
}

/// Advances the tracks to `frame` and associates `detections` with them.
///
/// Returns the confirmed tracks matched this frame, ordered by id.
pub fn tracker_step(
    set: &mut TrackSet,
    detections: &[Detection],
    frame: u32,
    cfg: &AssocConfig,
) -> Result<Vec<TrackOutput>, AssocError> {
    if let Some(last) = set.last_frame {
        if frame <= last {
            return Err(AssocError::NonMonotonicFrame { frame, last });
        }
    }

    for track in &mut set.tracks {
        track.state = set.kf.predict(&track.state);
        track.age += 1;
        track.time_since_update += 1;
    }

    let cost = build_cost_matrix(&set.tracks, detections, cfg)?;
    let assignment = linear_assignment(&cost.total);

    let mut updated = Vec::with_capacity(assignment.matches.len());
    for &(ti, di) in &assignment.matches {
        let det = &detections[di];
        let track = &set.tracks[ti];
        let state = match track.history.last() {
            Some(&(last_frame, _)) if track.time_since_update > 1 => {
                set.kf
                    .reupdate_across_gap(&track.observed_state, &track.history, &det.bbox, frame - last_frame)?
            }
            _ => set.kf.update(&track.state, &det.bbox)?,
        };
        updated.push((ti, di, state));
    }

    let mut outputs = Vec::new();
    for (ti, di, state) in updated {
        let det = &detections[di];
        let track = &mut set.tracks[ti];
        track.history.push(frame, det.bbox)?;
        track.observed_state = state.clone();
        track.state = state;
        track.blend_appearance(&det.embedding, cfg.ema_alpha);
        track.hits += 1;
        track.time_since_update = 0;
        track.last_confidence = det.confidence;
        if track.hits >= cfg.min_hits {
            track.status = TrackStatus::Confirmed;
        }
        if track.is_confirmed() {
            outputs.push(output_of(track, det));
        }
    }

    // Derived here: with no tracks the matrix has no rows to carry its width.
    let mut det_matched = vec![false; detections.len()];
    for &(_, di) in &assignment.matches {
        det_matched[di] = true;
    }
    for (det, _) in detections.iter().zip(&det_matched).filter(|(_, &m)| !m) {
        let state = set.kf.init(&det.bbox);
        let mut history = ObservationHistory::default();
        history.push(frame, det.bbox)?;
        let status = if cfg.min_hits <= 1 { TrackStatus::Confirmed } else { TrackStatus::Tentative };
        let track = Track {
            id: set.next_id,
            observed_state: state.clone(),
            state,
            history,
            appearance: det.embedding.normalized(),
            hits: 1,
            age: 0,
            time_since_update: 0,
            status,
            last_confidence: det.confidence,
        };
        set.next_id += 1;
        if track.is_confirmed() {
            outputs.push(output_of(&track, det));
        }
        set.tracks.push(track);
    }

    set.tracks.retain(|t| t.time_since_update <= cfg.max_age);
    set.last_frame = Some(frame);
    set.last_cost = Some(cost);
    outputs.sort_by_key(|o| o.id);
    Ok(outputs)
}

fn output_of(track: &Track, det: &Detection) -> TrackOutput {
    TrackOutput { id: track.id, bbox: track.predicted_box().unwrap_or(det.bbox), confidence: det.confidence }
}

/// A tracker for one sequence: a [`TrackSet`] with its configuration.
#[derive(Debug, Clone)]
pub struct MacSort {
    pub cfg: AssocConfig,
    pub set: TrackSet,
}

impl MacSort {
    pub fn new(cfg: AssocConfig) -> Result<Self, AssocError> {
        cfg.validate()?;
        Ok(Self { cfg, set: TrackSet::default() })
    }

    pub fn step(&mut self, detections: &[Detection], frame: u32) -> Result<Vec<TrackOutput>, AssocError> {
        tracker_step(&mut self.set, detections, frame, &self.cfg)
    }

    pub fn tracks(&self) -> &[Track] {
        &self.set.tracks
    }
}
