//! Prompt-based false-positive filtering of open-vocabulary detections.
//!
//! Two stages run per frame:
//!
//! 1. Include/exclude classification: a general-prompt box that overlaps an
//!    include-prompt box is a true positive, one overlapping an exclude-prompt
//!    box is dropped, everything else is left unclassified.
//! 2. Long/short memory: unclassified boxes are compared by appearance against
//!    the highest-confidence true positives seen so far (long band) and in the
//!    last three frames (short band). A box falling below the set average on
//!    both bands is rejected.

use std::collections::VecDeque;

use thiserror::Error;

use crate::geometry::{cosine_or_zero, iou, BBox, Embedding, GeometryError};

pub const DEFAULT_KAPPA_LONG: usize = 9;
pub const DEFAULT_KAPPA_SHORT: usize = 3;
pub const SHORT_WINDOW_FRAMES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("memory band is empty")]
    EmptyMemory,
    #[error("no unclassified boxes")]
    EmptyInput,
}

/// One prompt detection: box, appearance feature and confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBox {
    pub bbox: BBox,
    pub embedding: Embedding,
    pub score: f64,
}

impl PromptBox {
    pub fn new(bbox: BBox, embedding: Embedding, score: f64) -> Self {
        Self { bbox, embedding, score }
    }
}

/// Index partition of the general set produced by include/exclude classification.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IeSplit {
    pub tps: Vec<usize>,
    pub dropped: Vec<usize>,
    pub unclassified: Vec<usize>,
}

fn check_dims<'a>(sets: impl IntoIterator<Item = &'a [PromptBox]>) -> Result<(), FilterError> {
    let mut expected = None;
    for b in sets.into_iter().flatten() {
        let d = b.embedding.dim();
        match expected {
            None => expected = Some(d),
            Some(e) if e != d => return Err(FilterError::DimensionMismatch { expected: e, found: d }),
            _ => {}
        }
    }
    Ok(())
}

fn max_iou(target: &BBox, others: &[PromptBox]) -> f64 {
    others.iter().map(|o| iou(target, &o.bbox)).fold(0.0, f64::max)
}

/// Include/exclude classification of every general box.
///
/// Overlap means IoU strictly above `overlap_threshold`. A box overlapping
/// both sets goes to whichever it overlaps more; ties are dropped.
pub fn ie_classify(
    general: &[PromptBox],
    include: &[PromptBox],
    exclude: &[PromptBox],
    overlap_threshold: f64,
) -> Result<IeSplit, FilterError> {
    check_dims([general, include, exclude])?;
    let mut split = IeSplit::default();
    for (idx, g) in general.iter().enumerate() {
        let inc = max_iou(&g.bbox, include);
        let exc = max_iou(&g.bbox, exclude);
        let inc_hit = inc > overlap_threshold;
        let exc_hit = exc > overlap_threshold;
        match (inc_hit, exc_hit) {
            (true, true) if inc > exc => split.tps.push(idx),
            (true, true) => split.dropped.push(idx),
            (true, false) => split.tps.push(idx),
            (false, true) => split.dropped.push(idx),
            (false, false) => split.unclassified.push(idx),
        }
    }
    Ok(split)
}

#[derive(Debug, Clone, PartialEq)]
struct MemoryEntry {
    item: PromptBox,
    frame: u32,
    index: usize,
}

/// Orders entries by descending score, then earlier frame, then lower index.
fn rank(a: &MemoryEntry, b: &MemoryEntry) -> std::cmp::Ordering {
    b.item
        .score
        .total_cmp(&a.item.score)
        .then(a.frame.cmp(&b.frame))
        .then(a.index.cmp(&b.index))
}

/// Long and short memory bands of high-confidence true positives.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBank {
    kappa_long: usize,
    kappa_short: usize,
    long: Vec<MemoryEntry>,
    short: Vec<MemoryEntry>,
    window: VecDeque<Vec<MemoryEntry>>,
}

impl Default for MemoryBank {
    fn default() -> Self {
        Self::new(DEFAULT_KAPPA_LONG, DEFAULT_KAPPA_SHORT)
    }
}

impl MemoryBank {
    pub fn new(kappa_long: usize, kappa_short: usize) -> Self {
        Self {
            kappa_long,
            kappa_short,
            long: Vec::new(),
            short: Vec::new(),
            window: VecDeque::with_capacity(SHORT_WINDOW_FRAMES),
        }
    }

    pub fn kappa_long(&self) -> usize {
        self.kappa_long
    }

    pub fn kappa_short(&self) -> usize {
        self.kappa_short
    }

    pub fn long(&self) -> impl ExactSizeIterator<Item = &PromptBox> + Clone {
        self.long.iter().map(|e| &e.item)
    }

    pub fn short(&self) -> impl ExactSizeIterator<Item = &PromptBox> + Clone {
        self.short.iter().map(|e| &e.item)
    }

    /// Frames that contributed to the current short band, oldest first.
    pub fn short_frames(&self) -> Vec<u32> {
        self.short.iter().map(|e| e.frame).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.long.is_empty()
    }

    /// Folds the accepted true positives of `frame` into both bands and
    /// advances the short window by one frame.
    pub fn update(&mut self, accepted: &[PromptBox], frame: u32) {
        let entries: Vec<MemoryEntry> = accepted
            .iter()
            .enumerate()
            .map(|(index, item)| MemoryEntry { item: item.clone(), frame, index })
            .collect();

        self.long.extend(entries.iter().cloned());
        self.long.sort_by(rank);
        self.long.truncate(self.kappa_long);

        if self.window.len() == SHORT_WINDOW_FRAMES {
            self.window.pop_front();
        }
        self.window.push_back(entries);
        let mut short: Vec<MemoryEntry> = self.window.iter().flatten().cloned().collect();
        short.sort_by(rank);
        short.truncate(self.kappa_short);
        self.short = short;
    }
}

/// Per-box and set-level appearance agreement with each memory band.
#[derive(Debug, Clone, PartialEq)]
pub struct LsmSimilarityProfile {
    pub sim_long: Vec<f64>,
    pub sim_short: Vec<f64>,
    pub set_long: f64,
    pub set_short: f64,
}

fn mean_similarity<'a>(feature: &Embedding, band: impl Iterator<Item = &'a PromptBox>) -> Result<f64, FilterError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for m in band {
        sum += cosine_or_zero(&m.embedding, feature).map_err(|e| match e {
            GeometryError::DimensionMismatch(expected, found) => FilterError::DimensionMismatch { expected, found },
            _ => FilterError::EmptyInput,
        })?;
        n += 1;
    }
    Ok(sum / n as f64)
}

/// Similarity of each unclassified box to the memory bands, averaged over the
/// actual band occupancy.
pub fn lsm_similarity_profile(
    memory: &MemoryBank,
    unclassified: &[PromptBox],
) -> Result<LsmSimilarityProfile, FilterError> {
    profile_against(memory.long(), memory.short(), unclassified)
}

fn profile_against<'a, L, S>(long: L, short: S, unclassified: &[PromptBox]) -> Result<LsmSimilarityProfile, FilterError>
where
    L: ExactSizeIterator<Item = &'a PromptBox> + Clone,
    S: ExactSizeIterator<Item = &'a PromptBox> + Clone,
{
    if long.len() == 0 || short.len() == 0 {
        return Err(FilterError::EmptyMemory);
    }
    if unclassified.is_empty() {
        return Err(FilterError::EmptyInput);
    }
    let sim_long = unclassified
        .iter()
        .map(|u| mean_similarity(&u.embedding, long.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let sim_short = unclassified
        .iter()
        .map(|u| mean_similarity(&u.embedding, short.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let n = unclassified.len() as f64;
    let set_long = sim_long.iter().sum::<f64>() / n;
    let set_short = sim_short.iter().sum::<f64>() / n;
    Ok(LsmSimilarityProfile { sim_long, sim_short, set_long, set_short })
}

/// Rejected iff below the set average on both bands (strict). Returns the
/// (accepted, rejected) index lists into `unclassified`.
pub fn lsm_classify(profile: &LsmSimilarityProfile) -> (Vec<usize>, Vec<usize>) {
    let mut tps = Vec::new();
    let mut fps = Vec::new();
    for (j, (&l, &s)) in profile.sim_long.iter().zip(&profile.sim_short).enumerate() {
        if s < profile.set_short && l < profile.set_long {
            fps.push(j);
        } else {
            tps.push(j);
        }
    }
    (tps, fps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub kappa_long: usize,
    pub kappa_short: usize,
    pub overlap_threshold: f64,
    /// Accept unclassified boxes while the memory is still empty.
    pub cold_start_passthrough: bool,
    /// Restrict memory updates to include/exclude true positives.
    pub memory_from_ie_only: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            kappa_long: DEFAULT_KAPPA_LONG,
            kappa_short: DEFAULT_KAPPA_SHORT,
            overlap_threshold: 0.0,
            cold_start_passthrough: true,
            memory_from_ie_only: false,
        }
    }
}

/// Result of filtering one frame. All index lists refer to the general set.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    /// Final true positives in general-set order.
    pub final_tps: Vec<PromptBox>,
    pub ie_tps: Vec<usize>,
    pub dropped: Vec<usize>,
    pub rescued: Vec<usize>,
    pub rejected: Vec<usize>,
}

impl FrameOutcome {
    pub fn final_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.ie_tps.iter().chain(&self.rescued).copied().collect();
        idx.sort_unstable();
        idx
    }
}

/// Sequence-local filtering pipeline.
#[derive(Debug, Clone)]
pub struct TpodFilter {
    config: FilterConfig,
    memory: MemoryBank,
}

impl TpodFilter {
    pub fn new(config: FilterConfig) -> Self {
        let memory = MemoryBank::new(config.kappa_long, config.kappa_short);
        Self { config, memory }
    }

    pub fn memory(&self) -> &MemoryBank {
        &self.memory
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn process_frame(
        &mut self,
        general: &[PromptBox],
        include: &[PromptBox],
        exclude: &[PromptBox],
        frame: u32,
    ) -> Result<FrameOutcome, FilterError> {
        let split = ie_classify(general, include, exclude, self.config.overlap_threshold)?;
        let unclassified: Vec<PromptBox> = split.unclassified.iter().map(|&i| general[i].clone()).collect();

        let (rescued, rejected) = if unclassified.is_empty() {
            (Vec::new(), Vec::new())
        } else if self.memory.is_empty() {
            if self.config.cold_start_passthrough {
                (split.unclassified.clone(), Vec::new())
            } else {
                (Vec::new(), split.unclassified.clone())
            }
        } else {
            if let Some(m) = self.memory.long().next() {
                check_dims([std::slice::from_ref(m), unclassified.as_slice()])?;
            }
            // The short band can be empty after three frames without true
            // positives; the long band then stands in for it.
            let profile = if self.memory.short.is_empty() {
                profile_against(self.memory.long(), self.memory.long(), &unclassified)?
            } else {
                lsm_similarity_profile(&self.memory, &unclassified)?
            };
            let (tps, fps) = lsm_classify(&profile);
            (
                tps.into_iter().map(|j| split.unclassified[j]).collect(),
                fps.into_iter().map(|j| split.unclassified[j]).collect(),
            )
        };

        let outcome = FrameOutcome {
            final_tps: Vec::new(),
            ie_tps: split.tps,
            dropped: split.dropped,
            rescued,
            rejected,
        };
        let final_tps: Vec<PromptBox> = outcome.final_indices().into_iter().map(|i| general[i].clone()).collect();

        let memory_input: Vec<PromptBox> = if self.config.memory_from_ie_only {
            outcome.ie_tps.iter().map(|&i| general[i].clone()).collect()
        } else {
            final_tps.clone()
        };
        self.memory.update(&memory_input, frame);

        Ok(FrameOutcome { final_tps, ..outcome })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pb(u: f64, v: f64, feat: &[f64], score: f64) -> PromptBox {
        PromptBox::new(BBox::new(u, v, 10.0, 10.0).unwrap(), Embedding::new(feat.to_vec()), score)
    }

    const E1: [f64; 2] = [1.0, 0.0];
    const E2: [f64; 2] = [0.0, 1.0];

    #[test]
    fn ie_example_partition() {
        let general = vec![pb(0.0, 0.0, &E1, 0.9), pb(100.0, 0.0, &E1, 0.9), pb(300.0, 300.0, &E1, 0.9)];
        // shifted by 0.5 px: IoU ≈ 0.9
        let include = vec![pb(0.5, 0.0, &E1, 0.8)];
        let exclude = vec![pb(100.5, 0.0, &E1, 0.8)];
        let split = ie_classify(&general, &include, &exclude, 0.0).unwrap();
        assert_eq!(split, IeSplit { tps: vec![0], dropped: vec![1], unclassified: vec![2] });
    }

    #[test]
    fn ie_empty_prompts_leave_everything_unclassified() {
        let general = vec![pb(0.0, 0.0, &E1, 0.9), pb(50.0, 0.0, &E1, 0.9)];
        let split = ie_classify(&general, &[], &[], 0.0).unwrap();
        assert!(split.tps.is_empty() && split.dropped.is_empty());
        assert_eq!(split.unclassified, vec![0, 1]);
    }

    #[test]
    fn ie_full_include_coverage() {
        let general = vec![pb(0.0, 0.0, &E1, 0.9), pb(50.0, 0.0, &E1, 0.9)];
        let split = ie_classify(&general, &general, &[], 0.0).unwrap();
        assert_eq!(split.tps, vec![0, 1]);
        assert!(split.unclassified.is_empty());
    }

    #[test]
    fn ie_conflict_resolution() {
        let general = vec![pb(0.0, 0.0, &E1, 0.9)];
        let near = vec![pb(1.0, 0.0, &E1, 0.5)];
        let far = vec![pb(5.0, 0.0, &E1, 0.5)];
        assert_eq!(ie_classify(&general, &near, &far, 0.0).unwrap().tps, vec![0]);
        assert_eq!(ie_classify(&general, &far, &near, 0.0).unwrap().dropped, vec![0]);
        // tie → dropped
        assert_eq!(ie_classify(&general, &near, &near, 0.0).unwrap().dropped, vec![0]);
    }

    #[test]
    fn ie_threshold_is_strict() {
        let general = vec![pb(0.0, 0.0, &E1, 0.9)];
        let include = vec![pb(5.0, 0.0, &E1, 0.5)]; // IoU 1/3
        assert_eq!(ie_classify(&general, &include, &[], 1.0 / 3.0).unwrap().unclassified, vec![0]);
        assert_eq!(ie_classify(&general, &include, &[], 0.3).unwrap().tps, vec![0]);
    }

    #[test]
    fn ie_dimension_mismatch() {
        let general = vec![pb(0.0, 0.0, &E1, 0.9)];
        let include = vec![pb(0.0, 0.0, &[1.0, 0.0, 0.0], 0.9)];
        assert!(matches!(
            ie_classify(&general, &include, &[], 0.0),
            Err(FilterError::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    fn bank_with(features: &[[f64; 2]]) -> MemoryBank {
        let mut bank = MemoryBank::default();
        let boxes: Vec<PromptBox> = features.iter().map(|f| pb(0.0, 0.0, f, 0.9)).collect();
        bank.update(&boxes, 0);
        bank
    }

    #[test]
    fn profile_identical_features() {
        let bank = bank_with(&[E1, E1, E1]);
        let p = lsm_similarity_profile(&bank, &[pb(0.0, 0.0, &E1, 0.5)]).unwrap();
        assert_eq!(p.sim_long, vec![1.0]);
        assert_eq!(p.sim_short, vec![1.0]);
        assert_eq!((p.set_long, p.set_short), (1.0, 1.0));
    }

    #[test]
    fn profile_and_classify_orthogonal_pair() {
        // hand evaluation: u1 = e1 → 1, u2 = e2 → 0, set mean 0.5
        let bank = bank_with(&[E1, E1]);
        let unclassified = [pb(0.0, 0.0, &E1, 0.5), pb(0.0, 0.0, &E2, 0.5)];
        let p = lsm_similarity_profile(&bank, &unclassified).unwrap();
        assert_eq!(p.sim_long, vec![1.0, 0.0]);
        assert_eq!(p.set_long, 0.5);
        assert_eq!(p.set_short, 0.5);
        assert_eq!(lsm_classify(&p), (vec![0], vec![1]));
    }

    #[test]
    fn single_box_is_never_rejected() {
        let bank = bank_with(&[E1]);
        let p = lsm_similarity_profile(&bank, &[pb(0.0, 0.0, &E2, 0.5)]).unwrap();
        assert_eq!(p.set_long, p.sim_long[0]);
        assert_eq!(p.set_short, p.sim_short[0]);
        assert_eq!(lsm_classify(&p), (vec![0], vec![]));
    }

    #[test]
    fn shared_feature_all_accepted() {
        let bank = bank_with(&[E1, E2]);
        let f = [0.6, 0.8];
        let unclassified: Vec<_> = (0..4).map(|i| pb(i as f64 * 20.0, 0.0, &f, 0.5)).collect();
        let p = lsm_similarity_profile(&bank, &unclassified).unwrap();
        assert_eq!(lsm_classify(&p).1, Vec::<usize>::new());
    }

    #[test]
    fn profile_errors() {
        let empty = MemoryBank::default();
        assert_eq!(lsm_similarity_profile(&empty, &[pb(0.0, 0.0, &E1, 0.5)]), Err(FilterError::EmptyMemory));
        let bank = bank_with(&[E1]);
        assert_eq!(lsm_similarity_profile(&bank, &[]), Err(FilterError::EmptyInput));
    }

    #[test]
    fn memory_topk_on_first_frame() {
        let mut bank = MemoryBank::default();
        let boxes: Vec<PromptBox> = (0..12).map(|i| pb(i as f64, 0.0, &E1, 0.3 + 0.05 * i as f64)).collect();
        bank.update(&boxes, 0);
        let long: Vec<f64> = bank.long().map(|b| b.score).collect();
        let short: Vec<f64> = bank.short().map(|b| b.score).collect();
        assert_eq!(long.len(), 9);
        assert_eq!(short.len(), 3);
        assert_eq!(long, (3..12).rev().map(|i| 0.3 + 0.05 * i as f64).collect::<Vec<_>>());
        assert_eq!(short, long[..3].to_vec());
    }

    #[test]
    fn short_window_evicts_after_three_frames() {
        let mut bank = MemoryBank::default();
        bank.update(&[pb(0.0, 0.0, &E1, 0.99)], 10);
        bank.update(&[pb(0.0, 0.0, &E1, 0.5)], 11);
        bank.update(&[pb(0.0, 0.0, &E1, 0.5)], 12);
        assert!(bank.short_frames().contains(&10));
        bank.update(&[pb(0.0, 0.0, &E1, 0.5)], 13);
        assert!(!bank.short_frames().contains(&10));
        // the long band keeps the high-confidence entry
        assert_eq!(bank.long().next().unwrap().score, 0.99);
    }

    #[test]
    fn long_band_stable_when_new_scores_are_lower() {
        let mut bank = MemoryBank::default();
        let boxes: Vec<PromptBox> = (0..9).map(|i| pb(i as f64, 0.0, &E1, 0.9)).collect();
        bank.update(&boxes, 0);
        let before: Vec<PromptBox> = bank.long().cloned().collect();
        bank.update(&[pb(0.0, 0.0, &E2, 0.3)], 1);
        assert_eq!(bank.long().cloned().collect::<Vec<_>>(), before);
    }

    #[test]
    fn ties_prefer_earlier_frame_then_lower_index() {
        let mut bank = MemoryBank::new(2, 1);
        bank.update(&[pb(1.0, 0.0, &E1, 0.5)], 0);
        bank.update(&[pb(2.0, 0.0, &E1, 0.5), pb(3.0, 0.0, &E1, 0.5)], 1);
        let us: Vec<f64> = bank.long().map(|b| b.bbox.u).collect();
        assert_eq!(us, vec![1.0, 2.0]);
        assert_eq!(bank.short().next().unwrap().bbox.u, 1.0);
    }

    #[test]
    fn cold_start_passthrough() {
        let mut f = TpodFilter::new(FilterConfig::default());
        let general = vec![pb(0.0, 0.0, &E1, 0.9), pb(50.0, 0.0, &E2, 0.4)];
        let out = f.process_frame(&general, &[], &[], 0).unwrap();
        assert_eq!(out.final_tps, general);
        assert_eq!(out.rescued, vec![0, 1]);
        assert_eq!(f.memory().long().len(), 2);
    }

    #[test]
    fn cold_start_rejects_without_passthrough() {
        let cfg = FilterConfig { cold_start_passthrough: false, ..FilterConfig::default() };
        let mut f = TpodFilter::new(cfg);
        let out = f.process_frame(&[pb(0.0, 0.0, &E1, 0.9)], &[], &[], 0).unwrap();
        assert!(out.final_tps.is_empty());
        assert_eq!(out.rejected, vec![0]);
    }

    #[test]
    fn headlight_example() {
        // white-headlight cars overlap include boxes, red-taillight cars overlap exclude boxes
        let white = [0.9, 0.1];
        let red = [0.1, 0.9];
        let general = vec![pb(0.0, 0.0, &white, 0.8), pb(40.0, 0.0, &red, 0.7), pb(80.0, 0.0, &white, 0.6)];
        let include = vec![pb(0.5, 0.5, &white, 0.5), pb(80.5, 0.0, &white, 0.5)];
        let exclude = vec![pb(40.0, 0.5, &red, 0.5)];
        let mut f = TpodFilter::new(FilterConfig::default());
        let out = f.process_frame(&general, &include, &exclude, 1).unwrap();
        assert_eq!(out.final_indices(), vec![0, 2]);
        assert_eq!(out.dropped, vec![1]);
    }

    /// Frames 0 and 1 establish memory of the target look; at frame 2 the
    /// include detector misses a true car, which the memory rescues while a
    /// clutter box with a foreign feature is rejected.
    #[test]
    fn rescue_from_memory() {
        let car = [1.0, 0.05];
        let clutter = [0.0, 1.0];
        let mut f = TpodFilter::new(FilterConfig::default());
        for frame in 0..2 {
            let general = vec![pb(0.0, 0.0, &car, 0.9), pb(50.0, 0.0, &car, 0.85)];
            let include = general.clone();
            f.process_frame(&general, &include, &[], frame).unwrap();
        }
        let general = vec![pb(0.0, 0.0, &car, 0.9), pb(52.0, 0.0, &car, 0.5), pb(200.0, 0.0, &clutter, 0.4)];
        let include = vec![general[0].clone()];
        let out = f.process_frame(&general, &include, &[], 2).unwrap();
        assert_eq!(out.rescued, vec![1]);
        assert_eq!(out.rejected, vec![2]);
        assert!(out.final_tps.contains(&general[1]));
    }

    #[test]
    fn short_band_falls_back_to_long() {
        let mut f = TpodFilter::new(FilterConfig { memory_from_ie_only: true, ..FilterConfig::default() });
        let general = vec![pb(0.0, 0.0, &E1, 0.9)];
        f.process_frame(&general, &general, &[], 0).unwrap();
        for frame in 1..4 {
            f.process_frame(&[], &[], &[], frame).unwrap();
        }
        assert_eq!(f.memory().short().len(), 0);
        let unclassified = vec![pb(0.0, 0.0, &E1, 0.5), pb(30.0, 0.0, &E2, 0.5)];
        let out = f.process_frame(&unclassified, &[], &[], 4).unwrap();
        assert_eq!(out.rescued, vec![0]);
        assert_eq!(out.rejected, vec![1]);
    }

    fn arb_boxes(max: usize) -> impl Strategy<Value = Vec<PromptBox>> {
        prop::collection::vec(
            (0.0..200.0f64, 0.0..200.0f64, 5.0..40.0f64, 5.0..40.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.2..1.0f64),
            0..max,
        )
        .prop_map(|v| {
            v.into_iter()
                .map(|(u, vv, w, h, a, b, s)| {
                    PromptBox::new(BBox::new(u, vv, w, h).unwrap(), Embedding::new(vec![a, b, 0.1]), s)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn ie_is_partition(g in arb_boxes(12), i in arb_boxes(5), e in arb_boxes(5)) {
            let split = ie_classify(&g, &i, &e, 0.0).unwrap();
            let mut all: Vec<usize> = split.tps.iter().chain(&split.dropped).chain(&split.unclassified).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..g.len()).collect::<Vec<_>>());
        }

        #[test]
        fn ie_monotone(g in arb_boxes(12), i in arb_boxes(5), e in arb_boxes(5), extra in arb_boxes(2)) {
            let base = ie_classify(&g, &i, &e, 0.0).unwrap();
            let mut more_e = e.clone();
            more_e.extend(extra.iter().cloned());
            let with_exc = ie_classify(&g, &i, &more_e, 0.0).unwrap();
            prop_assert!(with_exc.tps.len() <= base.tps.len());
            prop_assert!(with_exc.dropped.len() >= base.dropped.len());
            let mut more_i = i.clone();
            more_i.extend(extra.iter().cloned());
            let with_inc = ie_classify(&g, &more_i, &e, 0.0).unwrap();
            prop_assert!(with_inc.tps.len() >= base.tps.len());
            // at cold start the final set is everything not dropped
            let kept = |s: &IeSplit| s.tps.len() + s.unclassified.len();
            prop_assert!(kept(&with_exc) <= kept(&base));
            prop_assert!(kept(&with_inc) >= kept(&base));
        }

        #[test]
        fn memory_bounds_and_order(frames in prop::collection::vec(arb_boxes(15), 1..12)) {
            let mut bank = MemoryBank::default();
            for (t, boxes) in frames.iter().enumerate() {
                bank.update(boxes, t as u32);
                let long: Vec<f64> = bank.long().map(|b| b.score).collect();
                let short: Vec<f64> = bank.short().map(|b| b.score).collect();
                prop_assert!(long.len() <= 9 && short.len() <= 3);
                prop_assert!(long.windows(2).all(|w| w[0] >= w[1]));
                prop_assert!(short.windows(2).all(|w| w[0] >= w[1]));
                prop_assert!(bank.short_frames().iter().all(|&f| f + 3 > t as u32));
            }
        }

        #[test]
        fn lsm_is_partition(frames in prop::collection::vec((arb_boxes(10), arb_boxes(3), arb_boxes(3)), 1..8)) {
            let mut f = TpodFilter::new(FilterConfig::default());
            for (t, (g, i, e)) in frames.iter().enumerate() {
                let out = f.process_frame(g, i, e, t as u32).unwrap();
                let mut all: Vec<usize> = out.ie_tps.iter().chain(&out.dropped).chain(&out.rescued)
                    .chain(&out.rejected).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..g.len()).collect::<Vec<_>>());
                prop_assert_eq!(out.final_tps.len(), out.ie_tps.len() + out.rescued.len());
            }
        }
    }
}
