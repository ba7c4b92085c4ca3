//! Detector-agnostic multi-object tracking toolkit.
//!
//! The pipeline runs downstream of an open-vocabulary detector:
//!
//! - [`tpod`] filters general-prompt detections with include/exclude prompts
//!   and a long/short appearance memory;
//! - [`mac_sort`] associates the surviving detections into tracks, balancing
//!   motion against appearance by how alike the frame's detections look;
//! - [`metrics`] scores the result (HOTA, MOTA, IDF1);
//! - [`io_mot`] and [`annotation`] read and write the file formats;
//! - [`synth`] generates seeded synthetic scenarios for testing.

pub mod annotation;
pub mod config;
pub mod geometry;
pub mod io_mot;
pub mod mac_sort;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod synth;
pub mod tpod;

pub use geometry::{cosine_similarity, iou, BBox, Detection, Embedding};
