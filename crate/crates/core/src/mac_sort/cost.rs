use std::f64::consts::PI;

use crate::geometry::{iou, Detection, Embedding, DEGENERATE_NORM};
use crate::motion::velocity_direction_cost;

use super::tracker::Track;
use super::{AssocConfig, AssocError, WeightMode};

/// The weighted association cost and its parts. Rows are tracks, columns
/// detections; every term is a cost in `[0, 1]` before weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    /// `1 − IoU(predicted track box, detection)`.
    pub iou_term: Vec<Vec<f64>>,
    /// `λ·Δθ/π`; zero when direction is disabled or undefined.
    pub velocity_term: Vec<Vec<f64>>,
    /// `(1 − cos)/2` between track and detection appearance.
    pub appearance_term: Vec<Vec<f64>>,
    pub mu_det: f64,
    pub w_aaw: f64,
    pub w_amc: f64,
    /// `w_amc·iou_term + velocity_term + w_aaw·appearance_term`, `+∞` where gated.
    pub total: Vec<Vec<f64>>,
}

fn check_dim(expected: &mut Option<usize>, found: usize) -> Result<(), AssocError> {
    match *expected {
        None => {
            *expected = Some(found);
            Ok(())
        }
        Some(e) if e == found => Ok(()),
        Some(e) => Err(AssocError::DimensionMismatch { expected: e, found }),
    }
}

/// Mean cosine similarity of each embedding to the mean of the unit-normalized
/// embeddings.
///
/// With fewer than two embeddings, or a mean that vanishes, homogeneity is
/// undefined and `cos θ` is returned so the weights come out neutral.
pub fn compute_mu_det<'a>(
    embeddings: impl IntoIterator<Item = &'a Embedding>,
    theta_deg: f64,
) -> Result<f64, AssocError> {
    let neutral = theta_deg.to_radians().cos();
    let units: Vec<Embedding> = embeddings.into_iter().map(Embedding::normalized).collect();
    let mut dim = None;
    for e in &units {
        check_dim(&mut dim, e.dim())?;
    }
    if units.len() <= 1 {
        return Ok(neutral);
    }
    let dim = dim.unwrap_or(0);
    let mut mean = vec![0.0; dim];
    for e in &units {
        for (m, x) in mean.iter_mut().zip(e.as_slice()) {
            *m += x;
        }
    }
    let count = units.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);
    let mean = Embedding::new(mean);
    let mean_norm = mean.norm();
    if mean_norm < DEGENERATE_NORM {
        return Ok(neutral);
    }
    let total: f64 = units
        .iter()
        .map(|e| {
            let n = e.norm();
            if n < DEGENERATE_NORM {
                0.0
            } else {
                (e.dot(&mean) / (n * mean_norm)).clamp(-1.0, 1.0)
            }
        })
        .sum();
    Ok((total / count).clamp(-1.0, 1.0))
}

/// `(w_aaw, w_amc)` with `w_aaw = (1 − μ_det)/(1 − cos θ)` and
/// `w_amc = 2 − w_aaw`.
///
/// The sum is exactly 2 in floating point whenever `0 ≤ w_aaw ≤ 2^53`: below 4
/// the subtraction rounds by less than half an ulp of 2, above it `2 − w_aaw`
/// is exact.
pub fn adaptive_weights(mu_det: f64, theta_deg: f64) -> (f64, f64) {
    let w_aaw = (1.0 - mu_det) / (1.0 - theta_deg.to_radians().cos());
    (w_aaw, 2.0 - w_aaw)
}

/// Builds the association cost with weights chosen by `cfg.weights`.
pub fn build_cost_matrix(
    tracks: &[Track],
    detections: &[Detection],
    cfg: &AssocConfig,
) -> Result<CostBreakdown, AssocError> {
    let mu_det = compute_mu_det(detections.iter().map(|d| &d.embedding), cfg.theta_deg)?;
    let (w_aaw, w_amc) = match cfg.weights {
        WeightMode::Adaptive => adaptive_weights(mu_det, cfg.theta_deg),
        WeightMode::Fixed { aaw, amc } => (aaw, amc),
    };
    let mut out = build_cost_matrix_with_weights(tracks, detections, cfg, w_aaw, w_amc)?;
    out.mu_det = mu_det;
    Ok(out)
}

/// Builds the association cost with explicit weights; `mu_det` in the result
/// is left `NaN`.
pub fn build_cost_matrix_with_weights(
    tracks: &[Track],
    detections: &[Detection],
    cfg: &AssocConfig,
    w_aaw: f64,
    w_amc: f64,
) -> Result<CostBreakdown, AssocError> {
    let mut dim = None;
    for d in detections {
        check_dim(&mut dim, d.embedding.dim())?;
    }
    if cfg.use_appearance && !detections.is_empty() {
        for t in tracks {
            check_dim(&mut dim, t.appearance.dim())?;
        }
    }

    let det_norms: Vec<f64> = detections.iter().map(|d| d.embedding.norm()).collect();
    let (m, n) = (tracks.len(), detections.len());
    let mut iou_term = vec![vec![1.0; n]; m];
    let mut velocity_term = vec![vec![0.0; n]; m];
    let mut appearance_term = vec![vec![0.0; n]; m];
    let mut total = vec![vec![f64::INFINITY; n]; m];

    for (i, track) in tracks.iter().enumerate() {
        // A track whose state no longer describes a valid box cannot match.
        let Some(predicted) = track.predicted_box() else { continue };
        let track_norm = track.appearance.norm();
        for (j, det) in detections.iter().enumerate() {
            let overlap = iou(&predicted, &det.bbox);
            iou_term[i][j] = 1.0 - overlap;
            if cfg.use_direction {
                velocity_term[i][j] = cfg.lambda * velocity_direction_cost(&track.history, &det.bbox) / PI;
            }
            if cfg.use_appearance {
                let cos = if track_norm < DEGENERATE_NORM || det_norms[j] < DEGENERATE_NORM {
                    0.0
                } else {
                    (track.appearance.dot(&det.embedding) / (track_norm * det_norms[j])).clamp(-1.0, 1.0)
                };
                appearance_term[i][j] = (1.0 - cos) / 2.0;
            }
            if overlap >= cfg.iou_gate {
                total[i][j] = w_amc * iou_term[i][j] + velocity_term[i][j] + w_aaw * appearance_term[i][j];
            }
        }
    }

    Ok(CostBreakdown { iou_term, velocity_term, appearance_term, mu_det: f64::NAN, w_aaw, w_amc, total })
}
