//! Appearance-adaptive association of detections into tracks.
//!
//! Each frame the homogeneity of the detections' appearance (`μ_det`) decides
//! how much the cost leans on appearance versus motion: alike-looking
//! detections push the weight onto IoU, distinct ones onto the embeddings.

mod assignment;
mod cost;
mod tracker;

use thiserror::Error;

use crate::motion::MotionError;

pub use assignment::{linear_assignment, Assignment};
pub use cost::{adaptive_weights, build_cost_matrix, build_cost_matrix_with_weights, compute_mu_det, CostBreakdown};
pub use tracker::{tracker_step, MacSort, Track, TrackOutput, TrackSet, TrackStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssocError {
    #[error("invalid association config: {0}")]
    InvalidConfig(String),
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("frame {frame} does not follow frame {last}")]
    NonMonotonicFrame { frame: u32, last: u32 },
    #[error(transparent)]
    Motion(#[from] MotionError),
}

/// How the appearance/motion weights are chosen each frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    /// Derived from `μ_det` and `θ`.
    Adaptive,
    /// Held constant; used for ablations.
    Fixed { aaw: f64, amc: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssocConfig {
    /// Weight of the direction-consistency term.
    pub lambda: f64,
    /// Homogeneity threshold angle, degrees in `(0, 90]`.
    pub theta_deg: f64,
    /// Pairs below this IoU are never matched.
    pub iou_gate: f64,
    pub max_age: u32,
    pub min_hits: u32,
    /// Weight of the old track appearance in the moving average.
    pub ema_alpha: f64,
    pub use_appearance: bool,
    pub use_direction: bool,
    pub weights: WeightMode,
}

impl Default for AssocConfig {
    fn default() -> Self {
        Self {
            lambda: 0.2,
            theta_deg: 45.0,
            iou_gate: 0.1,
            max_age: 30,
            min_hits: 3,
            ema_alpha: 0.9,
            use_appearance: true,
            use_direction: true,
            weights: WeightMode::Adaptive,
        }
    }
}

impl AssocConfig {
    pub fn validate(&self) -> Result<(), AssocError> {
        let bad = |msg: String| Err(AssocError::InvalidConfig(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.theta_deg > 0.0 && self.theta_deg <= 90.0) {
            return bad(format!("theta_deg must be in (0, 90], got {}", self.theta_deg));
        }
        if !(0.0..=1.0).contains(&self.iou_gate) {
            return bad(format!("iou_gate must be in [0, 1], got {}", self.iou_gate));
        }
        if !(0.0..=1.0).contains(&self.ema_alpha) {
            return bad(format!("ema_alpha must be in [0, 1], got {}", self.ema_alpha));
        }
        if let WeightMode::Fixed { aaw, amc } = self.weights {
            if !aaw.is_finite() || !amc.is_finite() {
                return bad("fixed weights must be finite".into());
            }
        }
        Ok(())
    }

    pub fn cos_theta(&self) -> f64 {
        self.theta_deg.to_radians().cos()
    }
}
