//! MOT-Challenge CSV files, binary embedding sidecars and prompt-detection
//! dumps.
//!
//! CSV rows are `frame,id,left,top,width,height,conf,x,y,z`; detection files
//! use id −1. A sidecar `NAME.emb` holds one embedding per row of `NAME.txt`:
//!
//! ```text
//! "EMB1" | dim: u32 LE | count: u64 LE | count·dim f32 LE
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geometry::{BBox, Detection, Embedding};
use crate::metrics::TrackSequence;
use crate::tpod::PromptBox;

pub const SIDECAR_MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: usize = 16;

/// Detector scores below this are discarded when loading prompt dumps.
pub const DEFAULT_DETECTION_THRESHOLD: f64 = 0.2;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("line {line}: non-positive box size {w}x{h}")]
    NonPositiveBox { line: usize, w: f64, h: f64 },
    #[error("embedding sidecar does not start with EMB1")]
    BadMagic,
    #[error("embedding sidecar body has {found} bytes, expected {expected}")]
    TruncatedBody { expected: usize, found: usize },
    #[error("embedding sidecar has {extra} bytes after the body")]
    TrailingData { extra: usize },
    #[error("embeddings of different dimensions: {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("missing general detection file {0}")]
    MissingGeneralFile(PathBuf),
    #[error("missing embedding sidecar {0}")]
    MissingSidecar(PathBuf),
    #[error("{file}: {rows} rows but sidecar holds {count} embeddings")]
    SidecarMismatch { file: PathBuf, rows: usize, count: usize },
}

impl IoError {
    /// Stable name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Io { .. } => "Io",
            IoError::ParseError { .. } => "ParseError",
            IoError::NonPositiveBox { .. } => "NonPositiveBox",
            IoError::BadMagic => "BadMagic",
            IoError::TruncatedBody { .. } => "TruncatedBody",
            IoError::TrailingData { .. } => "TrailingData",
            IoError::DimensionMismatch(..) => "DimensionMismatch",
            IoError::MissingGeneralFile(_) => "MissingGeneralFile",
            IoError::MissingSidecar(_) => "MissingSidecar",
            IoError::SidecarMismatch { .. } => "SidecarMismatch",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRecord {
    pub frame: u32,
    pub id: i64,
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub conf: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl MotRecord {
    pub fn new(frame: u32, id: i64, bbox: &BBox, conf: f64) -> Self {
        Self {
            frame,
            id,
            left: bbox.left(),
            top: bbox.top(),
            width: bbox.w,
            height: bbox.h,
            conf,
            x: -1.0,
            y: -1.0,
            z: -1.0,
        }
    }

    pub fn bbox(&self) -> BBox {
        BBox { u: self.left + self.width / 2.0, v: self.top + self.height / 2.0, w: self.width, h: self.height }
    }
}

fn parse_integer(field: &str, line: usize, name: &str) -> Result<i64, IoError> {
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    match field.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.abs() < 9.0e15 => Ok(v as i64),
        _ => Err(IoError::ParseError { line, msg: format!("{name} is not an integer: {field:?}") }),
    }
}

fn parse_real(field: &str, line: usize, name: &str) -> Result<f64, IoError> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IoError::ParseError { line, msg: format!("{name} is not a number: {field:?}") }),
    }
}

/// Parses CSV text; blank lines are skipped, line numbers are 1-based.
pub fn parse_mot(text: &str) -> Result<Vec<MotRecord>, IoError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.split(',').map(str::trim).collect();
        if f.len() != 9 && f.len() != 10 {
            return Err(IoError::ParseError { line, msg: format!("expected 9 or 10 columns, found {}", f.len()) });
        }
        let frame = parse_integer(f[0], line, "frame")?;
        if frame < 1 || frame > i64::from(u32::MAX) {
            return Err(IoError::ParseError { line, msg: format!("frame must be >= 1, got {frame}") });
        }
        let width = parse_real(f[4], line, "width")?;
        let height = parse_real(f[5], line, "height")?;
        if !(width > 0.0 && height > 0.0) {
            return Err(IoError::NonPositiveBox { line, w: width, h: height });
        }
        out.push(MotRecord {
            frame: frame as u32,
            id: parse_integer(f[1], line, "id")?,
            left: parse_real(f[2], line, "left")?,
            top: parse_real(f[3], line, "top")?,
            width,
            height,
            conf: parse_real(f[6], line, "conf")?,
            x: parse_real(f[7], line, "x")?,
            y: parse_real(f[8], line, "y")?,
            z: if f.len() == 10 { parse_real(f[9], line, "z")? } else { -1.0 },
        });
    }
    Ok(out)
}

/// Reads a CSV file; records keep file order.
pub fn read_mot(path: &Path) -> Result<Vec<MotRecord>, IoError> {
    parse_mot(&fs::read_to_string(path).map_err(io_err(path))?)
}

/// Groups records by frame, keeping file order within a frame.
pub fn group_by_frame(records: &[MotRecord]) -> BTreeMap<u32, Vec<MotRecord>> {
    let mut map: BTreeMap<u32, Vec<MotRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.frame).or_default().push(*r);
    }
    map
}

fn unused_field(out: &mut String, v: f64) {
    if v == -1.0 {
        out.push_str("-1");
    } else {
        let _ = write!(out, "{v:.2}");
    }
}

/// Canonical text of one record, without the newline.
pub fn format_record(r: &MotRecord) -> String {
    let mut s = format!(
        "{},{},{:.2},{:.2},{:.2},{:.2},{:.4},",
        r.frame, r.id, r.left, r.top, r.width, r.height, r.conf
    );
    unused_field(&mut s, r.x);
    s.push(',');
    unused_field(&mut s, r.y);
    s.push(',');
    unused_field(&mut s, r.z);
    s
}

/// Canonical file text: records stably sorted by frame, one per line.
pub fn format_mot(records: &[MotRecord]) -> String {
    let mut sorted: Vec<&MotRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.frame);
    let mut out = String::new();
    for r in sorted {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    out
}

pub fn write_mot(records: &[MotRecord], path: &Path) -> Result<(), IoError> {
    fs::write(path, format_mot(records)).map_err(io_err(path))
}

pub fn encode_embeddings(embs: &[Embedding]) -> Result<Vec<u8>, IoError> {
    let dim = embs.first().map_or(0, Embedding::dim);
    if let Some(bad) = embs.iter().find(|e| e.dim() != dim) {
        return Err(IoError::DimensionMismatch(dim, bad.dim()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + embs.len() * dim * 4);
    out.extend_from_slice(SIDECAR_MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(embs.len() as u64).to_le_bytes());
    for e in embs {
        for &x in e.as_slice() {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<Vec<Embedding>, IoError> {
    if bytes.len() < 4 || &bytes[..4] != SIDECAR_MAGIC {
        return Err(IoError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(IoError::TruncatedBody { expected: HEADER_LEN, found: bytes.len() });
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN..];
    let expected = count.saturating_mul(dim).saturating_mul(4);
    if body.len() < expected {
        return Err(IoError::TruncatedBody { expected, found: body.len() });
    }
    if body.len() > expected {
        return Err(IoError::TrailingData { extra: body.len() - expected });
    }
    if dim == 0 {
        return Ok(vec![Embedding::default(); count]);
    }
    Ok(body
        .chunks_exact(dim * 4)
        .map(|row| {
            Embedding::new(
                row.chunks_exact(4).map(|b| f64::from(f32::from_le_bytes(b.try_into().unwrap()))).collect(),
            )
        })
        .collect())
}

pub fn read_embeddings(path: &Path) -> Result<Vec<Embedding>, IoError> {
    decode_embeddings(&fs::read(path).map_err(io_err(path))?)
}

pub fn write_embeddings(embs: &[Embedding], path: &Path) -> Result<(), IoError> {
    fs::write(path, encode_embeddings(embs)?).map_err(io_err(path))
}

/// `NAME.emb` next to `NAME.txt`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("emb")
}

/// Reads a CSV file with its sidecar, checking the row counts agree.
pub fn read_with_embeddings(csv: &Path) -> Result<(Vec<MotRecord>, Vec<Embedding>), IoError> {
    let records = read_mot(csv)?;
    let emb_path = sidecar_path(csv);
    if !emb_path.exists() {
        return Err(IoError::MissingSidecar(emb_path));
    }
    let embs = read_embeddings(&emb_path)?;
    if embs.len() != records.len() {
        return Err(IoError::SidecarMismatch { file: csv.to_path_buf(), rows: records.len(), count: embs.len() });
    }
    Ok((records, embs))
}

/// Writes records and their embeddings, sorting both by frame together so
/// rows stay aligned.
pub fn write_with_embeddings(records: &[MotRecord], embs: &[Embedding], csv: &Path) -> Result<(), IoError> {
    if records.len() != embs.len() {
        return Err(IoError::SidecarMismatch { file: csv.to_path_buf(), rows: records.len(), count: embs.len() });
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| records[i].frame);
    let records: Vec<MotRecord> = order.iter().map(|&i| records[i]).collect();
    let embs: Vec<Embedding> = order.iter().map(|&i| embs[i].clone()).collect();
    write_mot(&records, csv)?;
    write_embeddings(&embs, &sidecar_path(csv))
}

/// Detections with embeddings, grouped by frame.
pub fn read_detections(csv: &Path) -> Result<BTreeMap<u32, Vec<Detection>>, IoError> {
    let (records, embs) = read_with_embeddings(csv)?;
    let mut out: BTreeMap<u32, Vec<Detection>> = BTreeMap::new();
    for (r, e) in records.iter().zip(embs) {
        out.entry(r.frame).or_default().push(Detection { frame: r.frame, bbox: r.bbox(), confidence: r.conf, embedding: e });
    }
    Ok(out)
}

/// Ground-truth or result boxes as an identity sequence.
pub fn read_sequence(csv: &Path) -> Result<TrackSequence, IoError> {
    let records = read_mot(csv)?;
    Ok(TrackSequence::from_records(records.iter().map(|r| (r.frame, r.id as u64, r.bbox()))))
}

/// One prompt's detections for a whole sequence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PromptDetections {
    pub records: Vec<MotRecord>,
    pub embeddings: Vec<Embedding>,
    by_frame: BTreeMap<u32, Vec<usize>>,
}

impl PromptDetections {
    pub fn new(records: Vec<MotRecord>, embeddings: Vec<Embedding>) -> Self {
        let mut by_frame: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            by_frame.entry(r.frame).or_default().push(i);
        }
        Self { records, embeddings, by_frame }
    }

    fn load(csv: &Path) -> Result<Self, IoError> {
        let (records, embeddings) = read_with_embeddings(csv)?;
        Ok(Self::new(records, embeddings))
    }

    /// Boxes of `frame` scoring at least `threshold`, in file order.
    pub fn frame(&self, frame: u32, threshold: f64) -> Vec<PromptBox> {
        self.by_frame
            .get(&frame)
            .into_iter()
            .flatten()
            .filter(|&&i| self.records[i].conf >= threshold)
            .map(|&i| PromptBox::new(self.records[i].bbox(), self.embeddings[i].clone(), self.records[i].conf))
            .collect()
    }

    pub fn frames(&self) -> impl Iterator<Item = u32> + '_ {
        self.by_frame.keys().copied()
    }
}

/// The three prompt outputs of one sequence: `general.txt` (required),
/// `include.txt` and `exclude.txt` (optional), each with a sidecar.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PromptDump {
    pub general: PromptDetections,
    pub include: PromptDetections,
    pub exclude: PromptDetections,
}

impl PromptDump {
    pub fn load(dir: &Path) -> Result<Self, IoError> {
        let general = dir.join("general.txt");
        if !general.exists() {
            return Err(IoError::MissingGeneralFile(general));
        }
        let optional = |name: &str| {
            let p = dir.join(name);
            if p.exists() {
                PromptDetections::load(&p)
            } else {
                Ok(PromptDetections::default())
            }
        };
        Ok(Self {
            general: PromptDetections::load(&general)?,
            include: optional("include.txt")?,
            exclude: optional("exclude.txt")?,
        })
    }

    /// `(general, include, exclude)` boxes of one frame above `threshold`.
    pub fn frame(&self, frame: u32, threshold: f64) -> FramePrompts {
        (
            self.general.frame(frame, threshold),
            self.include.frame(frame, threshold),
            self.exclude.frame(frame, threshold),
        )
    }

    /// Every frame that appears in any of the three files, ascending.
    pub fn frames(&self) -> Vec<u32> {
        let mut all: Vec<u32> =
            self.general.frames().chain(self.include.frames()).chain(self.exclude.frames()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// `(general, include, exclude)` boxes of one frame.
pub type FramePrompts = (Vec<PromptBox>, Vec<PromptBox>, Vec<PromptBox>);

/// Loads one frame of a prompt dump.
pub fn read_prompt_dump(dir: &Path, frame: u32, threshold: f64) -> Result<FramePrompts, IoError> {
    Ok(PromptDump::load(dir)?.frame(frame, threshold))
}
