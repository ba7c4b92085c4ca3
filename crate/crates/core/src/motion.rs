//! Constant-velocity Kalman filtering over `[u, v, s, r, u̇, v̇, ṡ]`.
//!
//! The aspect ratio `r` has no velocity term. Measurements are `[u, v, s, r]`.

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use nalgebra::{SMatrix, SVector};
use thiserror::Error;

use crate::geometry::{BBox, GeometryError};

pub type StateVector = SVector<f64, 7>;
pub type Covariance = SMatrix<f64, 7, 7>;
type Measurement = SVector<f64, 4>;
type ObservationModel = SMatrix<f64, 4, 7>;

pub const DEFAULT_HISTORY_CAPACITY: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("innovation covariance is not invertible")]
    SingularInnovation,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("observation frame {frame} does not follow {last}")]
    NonIncreasingFrame { frame: u32, last: u32 },
    #[error("observation history is empty")]
    EmptyHistory,
}

/// Noise parameters. Diagonals are in state order `[u, v, s, r, u̇, v̇, ṡ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanConfig {
    pub measurement_noise: [f64; 4],
    pub process_noise: [f64; 7],
    pub initial_covariance: [f64; 7],
}

impl Default for KalmanConfig {
    fn default() -> Self {
        Self {
            measurement_noise: [1.0, 1.0, 10.0, 10.0],
            process_noise: [1.0, 1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-4],
            initial_covariance: [10.0, 10.0, 10.0, 10.0, 1e3, 1e3, 1e3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub x: StateVector,
    pub p: Covariance,
}

impl KalmanState {
    /// Reads the position part out as a box.
    pub fn bbox(&self) -> Result<BBox, GeometryError> {
        BBox::from_xysr(self.x[0], self.x[1], self.x[2], self.x[3])
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.x[4], self.x[5])
    }
}

fn measurement_of(b: &BBox) -> Measurement {
    Measurement::from(b.to_xysr())
}

/// Filter matrices built once from a [`KalmanConfig`].
#[derive(Debug, Clone)]
pub struct KalmanFilter {
    transition: Covariance,
    observation: ObservationModel,
    q: Covariance,
    r: SMatrix<f64, 4, 4>,
    p0: Covariance,
}

impl Default for KalmanFilter {
    fn default() -> Self {
        Self::new(&KalmanConfig::default())
    }
}

impl KalmanFilter {
    pub fn new(cfg: &KalmanConfig) -> Self {
        let mut transition = Covariance::identity();
        for k in 0..3 {
            transition[(k, k + 4)] = 1.0;
        }
        let mut observation = ObservationModel::zeros();
        for k in 0..4 {
            observation[(k, k)] = 1.0;
        }
        Self {
            transition,
            observation,
            q: Covariance::from_diagonal(&StateVector::from(cfg.process_noise)),
            r: SMatrix::<f64, 4, 4>::from_diagonal(&Measurement::from(cfg.measurement_noise)),
            p0: Covariance::from_diagonal(&StateVector::from(cfg.initial_covariance)),
        }
    }

    /// Zero-velocity state centred on `b`.
    pub fn init(&self, b: &BBox) -> KalmanState {
        let z = measurement_of(b);
        let mut x = StateVector::zeros();
        x.fixed_rows_mut::<4>(0).copy_from(&z);
        KalmanState { x, p: self.p0 }
    }

    pub fn predict(&self, state: &KalmanState) -> KalmanState {
        let mut x = state.x;
        if x[2] + x[6] <= 0.0 {
            x[6] = 0.0;
        }
        let x = self.transition * x;
        let p = self.transition * state.p * self.transition.transpose() + self.q;
        KalmanState { x, p: symmetrize(p) }
    }

    /// Measurement update (Joseph form, symmetrized).
    pub fn update(&self, state: &KalmanState, b: &BBox) -> Result<KalmanState, MotionError> {
        let h = &self.observation;
        let innovation = measurement_of(b) - h * state.x;
        let s = h * state.p * h.transpose() + self.r;
        let s_inv = s.try_inverse().ok_or(MotionError::SingularInnovation)?;
        let gain = state.p * h.transpose() * s_inv;
        let x = state.x + gain * innovation;
        let i_kh = Covariance::identity() - gain * h;
        let p = i_kh * state.p * i_kh.transpose() + gain * self.r * gain.transpose();
        if !x.iter().all(|v| v.is_finite()) {
            return Err(MotionError::SingularInnovation);
        }
        Ok(KalmanState { x, p: symmetrize(p) })
    }

    /// Re-runs the filter from the last observed state across an occlusion
    /// gap of `gap` frames.
    ///
    /// `state` must be the posterior at the time of the last observation in
    /// `history`. Virtual observations are interpolated linearly in `(u, v, s)`
    /// between that observation and `det` with `r` taken from `det`; the last
    /// virtual observation is `det` itself.
    pub fn reupdate_across_gap(
        &self,
        state: &KalmanState,
        history: &ObservationHistory,
        det: &BBox,
        gap: u32,
    ) -> Result<KalmanState, MotionError> {
        let (_, last) = history.last().ok_or(MotionError::EmptyHistory)?;
        let gap = gap.max(1);
        let [u0, v0, s0, _] = last.to_xysr();
        let [u1, v1, s1, r1] = det.to_xysr();
        let mut current = state.clone();
        for step in 1..=gap {
            let t = f64::from(step) / f64::from(gap);
            let virtual_obs = if step == gap {
                *det
            } else {
                BBox::from_xysr(u0 + (u1 - u0) * t, v0 + (v1 - v0) * t, s0 + (s1 - s0) * t, r1)?
            };
            current = self.update(&self.predict(&current), &virtual_obs)?;
        }
        Ok(current)
    }
}

fn symmetrize(p: Covariance) -> Covariance {
    (p + p.transpose()) * 0.5
}

/// Bounded list of a track's matched observations, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationHistory {
    entries: VecDeque<(u32, BBox)>,
    capacity: usize,
}

impl Default for ObservationHistory {
    fn default() -> Self {
        Self::with_capacity(DEFAULT_HISTORY_CAPACITY)
    }
}

impl ObservationHistory {
    pub fn with_capacity(capacity: usize) -> Self {
        Self { entries: VecDeque::with_capacity(capacity), capacity: capacity.max(2) }
    }

    pub fn push(&mut self, frame: u32, b: BBox) -> Result<(), MotionError> {
        if let Some(&(last, _)) = self.entries.back() {
            if frame <= last {
                return Err(MotionError::NonIncreasingFrame { frame, last });
            }
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((frame, b));
        Ok(())
    }

    pub fn last(&self) -> Option<&(u32, BBox)> {
        self.entries.back()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u32, BBox)> {
        self.entries.iter()
    }
}

const MIN_DIRECTION_NORM: f64 = 1e-9;

/// Absolute angle in `[0, π]` between the direction of the last two
/// observations and the direction from the last observation to `det`.
///
/// Returns 0 when either direction is undefined (fewer than two observations,
/// or zero displacement).
pub fn velocity_direction_cost(history: &ObservationHistory, det: &BBox) -> f64 {
    let n = history.entries.len();
    if n < 2 {
        return 0.0;
    }
    let (_, prev) = &history.entries[n - 2];
    let (_, last) = &history.entries[n - 1];
    direction_delta(prev.center(), last.center(), det.center())
}

/// Angle between `a→b` and `b→c`, wrapped into `[0, π]`.
pub fn direction_delta(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let (dx1, dy1) = (b.0 - a.0, b.1 - a.1);
    let (dx2, dy2) = (c.0 - b.0, c.1 - b.1);
    if dx1.hypot(dy1) < MIN_DIRECTION_NORM || dx2.hypot(dy2) < MIN_DIRECTION_NORM {
        return 0.0;
    }
    let diff = (dy1.atan2(dx1) - dy2.atan2(dx2)).abs() % TAU;
    if diff > PI {
        TAU - diff
    } else {
        diff
    }
}
