//! Run configuration shared by the command-line tool and the Python module.
//!
//! Files are `key=value` lines; blank lines and `#` comments are ignored and
//! unknown or repeated keys are rejected.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::io_mot::DEFAULT_DETECTION_THRESHOLD;
use crate::mac_sort::{AssocConfig, WeightMode};
use crate::metrics::MetricsConfig;
use crate::tpod::FilterConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("config key {0:?} given twice")]
    RepeatedKey(String),
    #[error("bad value {value:?} for {key}: {msg}")]
    BadValue { key: String, value: String, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub assoc: AssocConfig,
    pub filter: FilterConfig,
    /// Prompt detections scoring below this are ignored.
    pub detection_threshold: f64,
    pub metrics: MetricsConfig,
    pub input_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub annotation_file: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            assoc: AssocConfig::default(),
            filter: FilterConfig::default(),
            detection_threshold: DEFAULT_DETECTION_THRESHOLD,
            metrics: MetricsConfig::default(),
            input_dir: None,
            output_dir: None,
            annotation_file: None,
        }
    }
}

/// Every accepted key, in the order [`RunConfig::to_text`] writes them.
pub const KEYS: &[&str] = &[
    "lambda",
    "theta_deg",
    "iou_gate",
    "max_age",
    "min_hits",
    "ema_alpha",
    "use_appearance",
    "use_direction",
    "weights",
    "kappa1",
    "kappa2",
    "detection_threshold",
    "overlap_threshold",
    "cold_start_passthrough",
    "memory_from_ie_only",
    "iou_threshold",
    "hota_sweep",
    "input_dir",
    "output_dir",
    "annotation_file",
];

fn bad(key: &str, value: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::BadValue { key: key.into(), value: value.into(), msg: msg.into() }
}

fn real(key: &str, value: &str) -> Result<f64, ConfigError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(bad(key, value, "expected a number")),
    }
}

fn real_in(key: &str, value: &str, lo: f64, hi: f64) -> Result<f64, ConfigError> {
    let v = real(key, value)?;
    if (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(bad(key, value, format!("must be in [{lo}, {hi}]")))
    }
}

fn count<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse::<T>().map_err(|_| bad(key, value, "expected a non-negative integer"))
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

fn path(value: &str) -> Option<PathBuf> {
    if value.is_empty() {
        None
    } else {
        Some(PathBuf::from(value))
    }
}

fn weights(key: &str, value: &str) -> Result<WeightMode, ConfigError> {
    if value == "adaptive" {
        return Ok(WeightMode::Adaptive);
    }
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        ["fixed", aaw, amc] => Ok(WeightMode::Fixed { aaw: real(key, aaw)?, amc: real(key, amc)? }),
        _ => Err(bad(key, value, "expected adaptive or fixed:<w_aaw>:<w_amc>")),
    }
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "lambda" => {
                let v = real(key, value)?;
                if v < 0.0 {
                    return Err(bad(key, value, "must be >= 0"));
                }
                self.assoc.lambda = v;
            }
            "theta_deg" => {
                let v = real(key, value)?;
                if !(v > 0.0 && v <= 90.0) {
                    return Err(bad(key, value, "must be in (0, 90]"));
                }
                self.assoc.theta_deg = v;
            }
            "iou_gate" => self.assoc.iou_gate = real_in(key, value, 0.0, 1.0)?,
            "max_age" => self.assoc.max_age = count(key, value)?,
            "min_hits" => self.assoc.min_hits = count(key, value)?,
            "ema_alpha" => self.assoc.ema_alpha = real_in(key, value, 0.0, 1.0)?,
            "use_appearance" => self.assoc.use_appearance = boolean(key, value)?,
            "use_direction" => self.assoc.use_direction = boolean(key, value)?,
            "weights" => self.assoc.weights = weights(key, value)?,
            "kappa1" => self.filter.kappa_long = count(key, value)?,
            "kappa2" => self.filter.kappa_short = count(key, value)?,
            "detection_threshold" => self.detection_threshold = real_in(key, value, 0.0, 1.0)?,
            "overlap_threshold" => self.filter.overlap_threshold = real_in(key, value, 0.0, 1.0)?,
            "cold_start_passthrough" => self.filter.cold_start_passthrough = boolean(key, value)?,
            "memory_from_ie_only" => self.filter.memory_from_ie_only = boolean(key, value)?,
            "iou_threshold" => {
                let v = real(key, value)?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(bad(key, value, "must be in (0, 1)"));
                }
                self.metrics.iou_threshold = v;
            }
            "hota_sweep" => self.metrics.hota_sweep = boolean(key, value)?,
            "input_dir" => self.input_dir = path(value),
            "output_dir" => self.output_dir = path(value),
            "annotation_file" => self.annotation_file = path(value),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies a `key=value` document on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = BTreeSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: k + 1 })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::RepeatedKey(key.to_string()));
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let a = &self.assoc;
        let weights = match a.weights {
            WeightMode::Adaptive => "adaptive".to_string(),
            WeightMode::Fixed { aaw, amc } => format!("fixed:{aaw}:{amc}"),
        };
        let p = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let values = [
            a.lambda.to_string(),
            a.theta_deg.to_string(),
            a.iou_gate.to_string(),
            a.max_age.to_string(),
            a.min_hits.to_string(),
            a.ema_alpha.to_string(),
            a.use_appearance.to_string(),
            a.use_direction.to_string(),
            weights,
            self.filter.kappa_long.to_string(),
            self.filter.kappa_short.to_string(),
            self.detection_threshold.to_string(),
            self.filter.overlap_threshold.to_string(),
            self.filter.cold_start_passthrough.to_string(),
            self.filter.memory_from_ie_only.to_string(),
            self.metrics.iou_threshold.to_string(),
            self.metrics.hota_sweep.to_string(),
            p(&self.input_dir),
            p(&self.output_dir),
            p(&self.annotation_file),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}
