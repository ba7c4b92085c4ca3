//! Python module `macsort`. Boxes cross the boundary as
//! `(left, top, width, height)` tuples, embeddings as lists of floats.

use std::path::Path;

use macsort_core::annotation::{parse_caption as core_parse_caption, GmotAnnotation};
use macsort_core::config::RunConfig;
use macsort_core::io_mot::{self, MotRecord};
use macsort_core::mac_sort::{self, AssocConfig, WeightMode};
use macsort_core::metrics::{self, MetricsConfig, TrackSequence};
use macsort_core::synth::{self, ScenarioSpec};
use macsort_core::tpod::{FilterConfig, PromptBox, TpodFilter};
use macsort_core::{BBox, Detection, Embedding};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Ltwh = (f64, f64, f64, f64);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_bbox(b: Ltwh) -> PyResult<BBox> {
    BBox::from_ltwh(b.0, b.1, b.2, b.3).map_err(value_error)
}

fn from_bbox(b: &BBox) -> Ltwh {
    (b.left(), b.top(), b.w, b.h)
}

/// IoU of two boxes.
#[pyfunction]
fn iou(a: Ltwh, b: Ltwh) -> PyResult<f64> {
    Ok(macsort_core::iou(&to_bbox(a)?, &to_bbox(b)?))
}

#[pyfunction]
fn cosine_similarity(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    macsort_core::cosine_similarity(&Embedding::new(a), &Embedding::new(b)).map_err(value_error)
}

/// Appearance homogeneity of a frame's detection embeddings.
#[pyfunction]
#[pyo3(signature = (embeddings, theta_deg = 45.0))]
fn compute_mu_det(embeddings: Vec<Vec<f64>>, theta_deg: f64) -> PyResult<f64> {
    let embs: Vec<Embedding> = embeddings.into_iter().map(Embedding::new).collect();
    mac_sort::compute_mu_det(&embs, theta_deg).map_err(value_error)
}

/// `(w_aaw, w_amc)` for a homogeneity score.
#[pyfunction]
#[pyo3(signature = (mu_det, theta_deg = 45.0))]
fn adaptive_weights(mu_det: f64, theta_deg: f64) -> (f64, f64) {
    mac_sort::adaptive_weights(mu_det, theta_deg)
}

type AssignmentTuple = (Vec<(usize, usize)>, Vec<usize>, Vec<usize>);

/// Minimum-cost assignment; `inf` entries are forbidden. Returns
/// `(matches, unmatched_rows, unmatched_cols)`.
#[pyfunction]
fn linear_assignment(cost: Vec<Vec<f64>>) -> PyResult<AssignmentTuple> {
    if let Some(row) = cost.iter().find(|r| r.len() != cost[0].len()) {
        return Err(value_error(format!("ragged cost matrix: rows of length {} and {}", cost[0].len(), row.len())));
    }
    if cost.iter().flatten().any(|c| c.is_nan()) {
        return Err(value_error("cost matrix contains NaN"));
    }
    let a = mac_sort::linear_assignment(&cost);
    Ok((a.matches, a.unmatched_rows, a.unmatched_cols))
}

/// Splits a caption into `(general, include, exclude)` prompts.
#[pyfunction]
#[pyo3(signature = (caption, class_name, synonyms = Vec::new()))]
fn parse_caption(caption: &str, class_name: &str, synonyms: Vec<String>) -> PyResult<(String, String, String)> {
    let ann = GmotAnnotation {
        class_name: class_name.to_string(),
        class_synonyms: synonyms,
        definition: String::new(),
        include_attributes: Vec::new(),
        exclude_attributes: Vec::new(),
        caption: caption.to_string(),
        track_path: String::new(),
    };
    let q = core_parse_caption(caption, &ann).map_err(value_error)?;
    Ok((q.general, q.include, q.exclude))
}

type Row = (u32, i64, f64, f64, f64, f64);

fn sequence(rows: Vec<Row>) -> PyResult<TrackSequence> {
    let mut seq = TrackSequence::new();
    for (frame, id, l, t, w, h) in rows {
        if id < 0 {
            return Err(value_error(format!("negative id {id} in frame {frame}")));
        }
        seq.push(frame, id as u64, to_bbox((l, t, w, h))?);
    }
    Ok(seq)
}

/// Scores `(frame, id, left, top, width, height)` rows against ground truth.
#[pyfunction]
#[pyo3(signature = (gt, pred, iou_threshold = 0.5, hota_sweep = false))]
fn evaluate<'py>(
    py: Python<'py>,
    gt: Vec<Row>,
    pred: Vec<Row>,
    iou_threshold: f64,
    hota_sweep: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = MetricsConfig { iou_threshold, hota_sweep };
    let r = metrics::evaluate(&sequence(gt)?, &sequence(pred)?, &cfg).map_err(value_error)?;
    let d = PyDict::new(py);
    for (k, v) in [("hota", r.hota), ("deta", r.deta), ("assa", r.assa), ("mota", r.mota), ("idf1", r.idf1), ("idp", r.idp), ("idr", r.idr)] {
        d.set_item(k, v)?;
    }
    for (k, v) in [
        ("id_switches", r.id_switches),
        ("mostly_tracked", r.mostly_tracked),
        ("partially_tracked", r.partially_tracked),
        ("mostly_lost", r.mostly_lost),
        ("tp", r.tp),
        ("fp", r.fp),
        ("fn", r.fn_),
        ("gt_ids", r.gt_ids),
        ("pred_ids", r.pred_ids),
    ] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

type MotRow = (u32, i64, f64, f64, f64, f64, f64);

/// Reads a MOT file as `(frame, id, left, top, width, height, conf)` rows.
#[pyfunction]
fn read_mot(path: &str) -> PyResult<Vec<MotRow>> {
    let records = io_mot::read_mot(Path::new(path)).map_err(value_error)?;
    Ok(records.iter().map(|r| (r.frame, r.id, r.left, r.top, r.width, r.height, r.conf)).collect())
}

#[pyfunction]
fn write_mot(rows: Vec<MotRow>, path: &str) -> PyResult<()> {
    let mut records = Vec::with_capacity(rows.len());
    for (frame, id, l, t, w, h, conf) in rows {
        records.push(MotRecord::new(frame, id, &to_bbox((l, t, w, h))?, conf));
    }
    io_mot::write_mot(&records, Path::new(path)).map_err(value_error)
}

/// Generates a scenario from `key=value` spec text. Returns `gt` rows and
/// per-detection `(frame, ltwh, conf, embedding)` tuples.
#[pyfunction]
fn generate_scenario<'py>(py: Python<'py>, spec: &str) -> PyResult<Bound<'py, PyDict>> {
    let spec = ScenarioSpec::from_text(spec).map_err(value_error)?;
    let s = synth::generate(&spec).map_err(value_error)?;
    let gt: Vec<Row> = s
        .gt_records()
        .iter()
        .map(|r| (r.frame, r.id, r.left, r.top, r.width, r.height))
        .collect();
    let dets: Vec<(u32, Ltwh, f64, Vec<f64>)> = s
        .frames
        .iter()
        .flat_map(|f| f.detections.iter())
        .map(|d| (d.frame, from_bbox(&d.bbox), d.confidence, d.embedding.0.clone()))
        .collect();
    let out = PyDict::new(py);
    out.set_item("gt", gt)?;
    out.set_item("detections", dets)?;
    Ok(out)
}

/// Writes a generated scenario's files to `out_dir`.
#[pyfunction]
fn write_scenario(spec: &str, out_dir: &str) -> PyResult<()> {
    let spec = ScenarioSpec::from_text(spec).map_err(value_error)?;
    synth::generate(&spec).and_then(|s| s.write(Path::new(out_dir))).map_err(value_error)
}

/// Online MAC-SORT tracker.
#[pyclass(module = "macsort")]
struct Tracker {
    inner: mac_sort::MacSort,
}

#[pymethods]
impl Tracker {
    #[new]
    #[pyo3(signature = (
        lambda_ = 0.2, theta_deg = 45.0, iou_gate = 0.1, max_age = 30, min_hits = 3, ema_alpha = 0.9,
        use_appearance = true, use_direction = true, fixed_weights = None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        lambda_: f64,
        theta_deg: f64,
        iou_gate: f64,
        max_age: u32,
        min_hits: u32,
        ema_alpha: f64,
        use_appearance: bool,
        use_direction: bool,
        fixed_weights: Option<(f64, f64)>,
    ) -> PyResult<Self> {
        let weights = match fixed_weights {
            Some((aaw, amc)) => WeightMode::Fixed { aaw, amc },
            None => WeightMode::Adaptive,
        };
        let cfg = AssocConfig {
            lambda: lambda_,
            theta_deg,
            iou_gate,
            max_age,
            min_hits,
            ema_alpha,
            use_appearance,
            use_direction,
            weights,
        };
        Ok(Self { inner: mac_sort::MacSort::new(cfg).map_err(value_error)? })
    }

    /// Builds a tracker from `key=value` config text.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        let cfg = RunConfig::from_text(text).map_err(value_error)?;
        Ok(Self { inner: mac_sort::MacSort::new(cfg.assoc).map_err(value_error)? })
    }

    /// Consumes one frame of `(ltwh, conf, embedding)` detections and returns
    /// the confirmed tracks as `(id, ltwh, conf)`.
    fn step(&mut self, frame: u32, detections: Vec<(Ltwh, f64, Vec<f64>)>) -> PyResult<Vec<(u64, Ltwh, f64)>> {
        let mut dets = Vec::with_capacity(detections.len());
        for (b, confidence, e) in detections {
            dets.push(Detection { frame, bbox: to_bbox(b)?, confidence, embedding: Embedding::new(e) });
        }
        let out = self.inner.step(&dets, frame).map_err(value_error)?;
        Ok(out.iter().map(|o| (o.id, from_bbox(&o.bbox), o.confidence)).collect())
    }

    /// Homogeneity score of the last frame, or `None` before any association.
    #[getter]
    fn last_mu_det(&self) -> Option<f64> {
        self.inner.set.last_cost().map(|c| c.mu_det)
    }

    #[getter]
    fn num_tracks(&self) -> usize {
        self.inner.tracks().len()
    }
}

fn prompt_boxes(items: Vec<(Ltwh, Vec<f64>, f64)>) -> PyResult<Vec<PromptBox>> {
    items.into_iter().map(|(b, e, s)| Ok(PromptBox::new(to_bbox(b)?, Embedding::new(e), s))).collect()
}

/// Include/exclude classification with long-short memory.
#[pyclass(module = "macsort")]
struct PromptFilter {
    inner: TpodFilter,
}

#[pymethods]
impl PromptFilter {
    #[new]
    #[pyo3(signature = (kappa1 = 9, kappa2 = 3, overlap_threshold = 0.0, cold_start_passthrough = true, memory_from_ie_only = false))]
    fn new(
        kappa1: usize,
        kappa2: usize,
        overlap_threshold: f64,
        cold_start_passthrough: bool,
        memory_from_ie_only: bool,
    ) -> Self {
        let cfg = FilterConfig {
            kappa_long: kappa1,
            kappa_short: kappa2,
            overlap_threshold,
            cold_start_passthrough,
            memory_from_ie_only,
        };
        Self { inner: TpodFilter::new(cfg) }
    }

    /// Filters one frame of `(ltwh, embedding, score)` boxes. Returns index
    /// lists into `general`: `final`, `ie_tps`, `dropped`, `rescued`, `rejected`.
    #[pyo3(signature = (frame, general, include = Vec::new(), exclude = Vec::new()))]
    fn process_frame<'py>(
        &mut self,
        py: Python<'py>,
        frame: u32,
        general: Vec<(Ltwh, Vec<f64>, f64)>,
        include: Vec<(Ltwh, Vec<f64>, f64)>,
        exclude: Vec<(Ltwh, Vec<f64>, f64)>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let out = self
            .inner
            .process_frame(&prompt_boxes(general)?, &prompt_boxes(include)?, &prompt_boxes(exclude)?, frame)
            .map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("final", out.final_indices())?;
        d.set_item("ie_tps", out.ie_tps)?;
        d.set_item("dropped", out.dropped)?;
        d.set_item("rescued", out.rescued)?;
        d.set_item("rejected", out.rejected)?;
        Ok(d)
    }

    /// `(long, short)` memory occupancy.
    fn memory_sizes(&self) -> (usize, usize) {
        (self.inner.memory().long().len(), self.inner.memory().short().len())
    }
}

#[pymodule]
fn macsort(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(iou, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(compute_mu_det, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_weights, m)?)?;
    m.add_function(wrap_pyfunction!(linear_assignment, m)?)?;
    m.add_function(wrap_pyfunction!(parse_caption, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(read_mot, m)?)?;
    m.add_function(wrap_pyfunction!(write_mot, m)?)?;
    m.add_function(wrap_pyfunction!(generate_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(write_scenario, m)?)?;
    m.add_class::<Tracker>()?;
    m.add_class::<PromptFilter>()?;
    Ok(())
}
