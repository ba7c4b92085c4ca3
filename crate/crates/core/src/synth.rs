//! Seeded synthetic scenarios: ground truth, noisy detections with embeddings,
//! and include/exclude prompt outputs.
//!
//! Randomness comes from SplitMix64 with Box–Muller normals, so a spec
//! produces the same files on any platform. Each concern (trajectories,
//! embeddings, detection noise, clutter, prompts) draws from its own stream,
//! so e.g. raising the clutter rate does not move the objects.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{BBox, Detection, Embedding};
use crate::io_mot::{self, IoError, MotRecord};
use crate::metrics::TrackSequence;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    SpecError(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

fn spec_error<T>(msg: impl Into<String>) -> Result<T, SynthError> {
    Err(SynthError::SpecError(msg.into()))
}

/// SplitMix64.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal by Box–Muller; one pair of uniforms per draw.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    pub fn unit_vector(&mut self, dim: usize) -> Embedding {
        loop {
            let v = Embedding::new((0..dim).map(|_| self.normal()).collect());
            if v.norm() > 1e-6 {
                return v.normalized();
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionModel {
    /// Straight lines from random starts in random directions.
    Linear,
    /// Straight lines through the canvas center at evenly spread angles,
    /// reaching it at staggered frames.
    Crossing,
    /// Circles around separate centers.
    Circular,
}

impl MotionModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            MotionModel::Linear => "linear",
            MotionModel::Crossing => "crossing",
            MotionModel::Circular => "circular",
        }
    }
}

impl FromStr for MotionModel {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, SynthError> {
        match s {
            "linear" => Ok(MotionModel::Linear),
            "crossing" => Ok(MotionModel::Crossing),
            "circular" => Ok(MotionModel::Circular),
            other => spec_error(format!("unknown motion model {other:?}")),
        }
    }
}

/// Frames `start..=end` during which an object is hidden from the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occlusion {
    pub object: usize,
    pub start: u32,
    pub end: u32,
}

/// From `frame` on, objects `a` and `b` wear each other's embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingSwap {
    pub a: usize,
    pub b: usize,
    pub frame: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub n_objects: usize,
    pub n_frames: u32,
    pub motion: MotionModel,
    /// 0: independent object embeddings; 1: all identical.
    pub appearance_homogeneity: f64,
    pub detection_noise_px: f64,
    pub miss_rate: f64,
    /// Expected clutter boxes per object per frame.
    pub clutter_rate: f64,
    pub occlusions: Vec<Occlusion>,
    pub embedding_dim: usize,
    pub speed_px: f64,
    /// Frames between consecutive objects reaching the center (crossing only).
    pub stagger_frames: f64,
    pub box_w: f64,
    pub box_h: f64,
    pub canvas_w: f64,
    pub canvas_h: f64,
    pub embedding_swaps: Vec<EmbeddingSwap>,
    /// Lookalike objects that the general prompt fires on but that are not
    /// part of the ground truth.
    pub n_distractors: usize,
    /// Per-frame probability that an object also gets an include-prompt box.
    pub include_rate: f64,
    /// Per-frame probability that a distractor gets an exclude-prompt box.
    pub exclude_rate: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            n_objects: 4,
            n_frames: 60,
            motion: MotionModel::Linear,
            appearance_homogeneity: 0.5,
            detection_noise_px: 0.0,
            miss_rate: 0.0,
            clutter_rate: 0.0,
            occlusions: Vec::new(),
            embedding_dim: 16,
            speed_px: 2.0,
            stagger_frames: 2.0,
            box_w: 40.0,
            box_h: 80.0,
            canvas_w: 1280.0,
            canvas_h: 720.0,
            embedding_swaps: Vec::new(),
            n_distractors: 0,
            include_rate: 0.0,
            exclude_rate: 0.0,
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        spec_error(format!("{name} must be in [0, 1], got {v}"))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<(), SynthError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        spec_error(format!("{name} must be >= 0, got {v}"))
    }
}

fn check_pos(name: &str, v: f64) -> Result<(), SynthError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        spec_error(format!("{name} must be > 0, got {v}"))
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_frames == 0 {
            return spec_error("n_frames must be >= 1");
        }
        if self.embedding_dim == 0 {
            return spec_error("embedding_dim must be >= 1");
        }
        check_unit("appearance_homogeneity", self.appearance_homogeneity)?;
        check_unit("miss_rate", self.miss_rate)?;
        check_unit("clutter_rate", self.clutter_rate)?;
        check_unit("include_rate", self.include_rate)?;
        check_unit("exclude_rate", self.exclude_rate)?;
        check_nonneg("detection_noise_px", self.detection_noise_px)?;
        check_nonneg("speed_px", self.speed_px)?;
        check_nonneg("stagger_frames", self.stagger_frames)?;
        for (name, v) in [("box_w", self.box_w), ("box_h", self.box_h), ("canvas_w", self.canvas_w), ("canvas_h", self.canvas_h)] {
            check_pos(name, v)?;
        }
        for o in &self.occlusions {
            if o.object >= self.n_objects {
                return spec_error(format!("occlusion names object {} of {}", o.object, self.n_objects));
            }
            if o.start < 1 || o.start > o.end || o.end > self.n_frames {
                return spec_error(format!(
                    "occlusion window {}..={} must satisfy 1 <= start <= end <= {}",
                    o.start, o.end, self.n_frames
                ));
            }
        }
        for s in &self.embedding_swaps {
            if s.a >= self.n_objects || s.b >= self.n_objects || s.a == s.b {
                return spec_error(format!("swap needs two distinct objects below {}, got {} and {}", self.n_objects, s.a, s.b));
            }
            if s.frame < 1 || s.frame > self.n_frames {
                return spec_error(format!("swap frame {} outside 1..={}", s.frame, self.n_frames));
            }
        }
        Ok(())
    }

    /// Plain-text `key=value` form, one key per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "n_objects={}", self.n_objects);
        let _ = writeln!(s, "n_frames={}", self.n_frames);
        let _ = writeln!(s, "motion={}", self.motion.as_str());
        let _ = writeln!(s, "appearance_homogeneity={}", self.appearance_homogeneity);
        let _ = writeln!(s, "detection_noise_px={}", self.detection_noise_px);
        let _ = writeln!(s, "miss_rate={}", self.miss_rate);
        let _ = writeln!(s, "clutter_rate={}", self.clutter_rate);
        let occ: Vec<String> = self.occlusions.iter().map(|o| format!("{}:{}:{}", o.object, o.start, o.end)).collect();
        let _ = writeln!(s, "occlusion={}", occ.join(";"));
        let _ = writeln!(s, "embedding_dim={}", self.embedding_dim);
        let _ = writeln!(s, "speed_px={}", self.speed_px);
        let _ = writeln!(s, "stagger_frames={}", self.stagger_frames);
        let _ = writeln!(s, "box_w={}", self.box_w);
        let _ = writeln!(s, "box_h={}", self.box_h);
        let _ = writeln!(s, "canvas_w={}", self.canvas_w);
        let _ = writeln!(s, "canvas_h={}", self.canvas_h);
        let swaps: Vec<String> =
            self.embedding_swaps.iter().map(|w| format!("{}:{}:{}", w.a, w.b, w.frame)).collect();
        let _ = writeln!(s, "swap={}", swaps.join(";"));
        let _ = writeln!(s, "n_distractors={}", self.n_distractors);
        let _ = writeln!(s, "include_rate={}", self.include_rate);
        let _ = writeln!(s, "exclude_rate={}", self.exclude_rate);
        s
    }

    /// Parses the `key=value` form. Missing keys keep their defaults; unknown
    /// or repeated keys are errors. Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self, SynthError> {
        let mut spec = ScenarioSpec::default();
        let mut seen = std::collections::BTreeSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return spec_error(format!("line {}: expected key=value", k + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return spec_error(format!("line {}: repeated key {key}", k + 1));
            }
            let num = |v: &str| -> Result<f64, SynthError> {
                v.parse::<f64>().or_else(|_| spec_error(format!("{key}: not a number: {v:?}")))
            };
            let int = |v: &str| -> Result<u64, SynthError> {
                v.parse::<u64>().or_else(|_| spec_error(format!("{key}: not a non-negative integer: {v:?}")))
            };
            match key {
                "seed" => spec.seed = int(value)?,
                "n_objects" => spec.n_objects = int(value)? as usize,
                "n_frames" => spec.n_frames = u32::try_from(int(value)?).or_else(|_| spec_error("n_frames too large"))?,
                "motion" => spec.motion = value.parse()?,
                "appearance_homogeneity" => spec.appearance_homogeneity = num(value)?,
                "detection_noise_px" => spec.detection_noise_px = num(value)?,
                "miss_rate" => spec.miss_rate = num(value)?,
                "clutter_rate" => spec.clutter_rate = num(value)?,
                "occlusion" => {
                    spec.occlusions = parse_triples(value, key)?
                        .into_iter()
                        .map(|(object, start, end)| Occlusion { object: object as usize, start, end })
                        .collect()
                }
                "embedding_dim" => spec.embedding_dim = int(value)? as usize,
                "speed_px" => spec.speed_px = num(value)?,
                "stagger_frames" => spec.stagger_frames = num(value)?,
                "box_w" => spec.box_w = num(value)?,
                "box_h" => spec.box_h = num(value)?,
                "canvas_w" => spec.canvas_w = num(value)?,
                "canvas_h" => spec.canvas_h = num(value)?,
                "swap" => {
                    spec.embedding_swaps = parse_triples(value, key)?
                        .into_iter()
                        .map(|(a, b, frame)| EmbeddingSwap { a: a as usize, b: b as usize, frame })
                        .collect()
                }
                "n_distractors" => spec.n_distractors = int(value)? as usize,
                "include_rate" => spec.include_rate = num(value)?,
                "exclude_rate" => spec.exclude_rate = num(value)?,
                other => return spec_error(format!("line {}: unknown key {other:?}", k + 1)),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// `a:b:c;a:b:c;…`, empty for none.
fn parse_triples(value: &str, key: &str) -> Result<Vec<(u32, u32, u32)>, SynthError> {
    let mut out = Vec::new();
    for item in value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let parsed: Result<Vec<u32>, _> = parts.iter().map(|p| p.trim().parse::<u32>()).collect();
        match parsed {
            Ok(v) if v.len() == 3 => out.push((v[0], v[1], v[2])),
            _ => return spec_error(format!("{key}: expected a:b:c entries, got {item:?}")),
        }
    }
    Ok(out)
}

/// Where a generated detection came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Object(usize),
    Distractor(usize),
    Clutter,
}

/// Everything generated for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFrame {
    pub frame: u32,
    /// General-prompt detections.
    pub detections: Vec<Detection>,
    pub sources: Vec<Source>,
    pub include: Vec<Detection>,
    pub exclude: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    /// Object `i` has track id `i + 1`.
    pub gt: TrackSequence,
    pub frames: Vec<SynthFrame>,
    /// Per-object embeddings before any swap.
    pub object_embeddings: Vec<Embedding>,
}

const STREAM_TRAJECTORY: u64 = 0x5452_414A;
const STREAM_APPEARANCE: u64 = 0x4150_5045;
const STREAM_DETECTION: u64 = 0x4445_5445;
const STREAM_CLUTTER: u64 = 0x434C_5554;
const STREAM_PROMPT: u64 = 0x5052_4F4D;

fn stream(seed: u64, tag: u64) -> SplitMix64 {
    // Pass the tagged seed through one round so nearby seeds decorrelate.
    let mut mix = SplitMix64::new(seed ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    SplitMix64::new(mix.next_u64())
}

type Trajectory = Box<dyn Fn(f64) -> (f64, f64)>;

fn trajectories(spec: &ScenarioSpec, count: usize, rng: &mut SplitMix64, model: MotionModel) -> Vec<Trajectory> {
    let (cw, ch) = (spec.canvas_w, spec.canvas_h);
    let speed = spec.speed_px;
    let mid_frame = (1.0 + f64::from(spec.n_frames)) / 2.0;
    (0..count)
        .map(|i| -> Trajectory {
            match model {
                MotionModel::Linear => {
                    let (x0, y0) = (rng.uniform(0.2 * cw, 0.8 * cw), rng.uniform(0.2 * ch, 0.8 * ch));
                    let phi = rng.uniform(0.0, TAU);
                    let (dx, dy) = (speed * phi.cos(), speed * phi.sin());
                    Box::new(move |t| (x0 + dx * (t - 1.0), y0 + dy * (t - 1.0)))
                }
                MotionModel::Crossing => {
                    let phi = PI * i as f64 / count as f64;
                    let (dx, dy) = (speed * phi.cos(), speed * phi.sin());
                    let arrive = mid_frame + spec.stagger_frames * (i as f64 - (count as f64 - 1.0) / 2.0);
                    let (cx, cy) = (cw / 2.0, ch / 2.0);
                    Box::new(move |t| (cx + dx * (t - arrive), cy + dy * (t - arrive)))
                }
                MotionModel::Circular => {
                    let cols = (count as f64).sqrt().ceil().max(1.0);
                    let rows = (count as f64 / cols).ceil().max(1.0);
                    let (sx, sy) = (cw / cols, ch / rows);
                    let (col, row) = ((i as f64) % cols, (i as f64 / cols).floor());
                    let (cx, cy) = (sx * (col + 0.5), sy * (row + 0.5));
                    let radius = 0.3 * sx.min(sy);
                    let omega = if i % 2 == 0 { speed / radius } else { -speed / radius };
                    let phase = rng.uniform(0.0, TAU);
                    Box::new(move |t| {
                        let a = phase + omega * (t - 1.0);
                        (cx + radius * a.cos(), cy + radius * a.sin())
                    })
                }
            }
        })
        .collect()
}

fn mix_embedding(shared: &Embedding, own: &Embedding, h: f64) -> Embedding {
    let v: Vec<f64> = shared.as_slice().iter().zip(own.as_slice()).map(|(s, o)| h * s + (1.0 - h) * o).collect();
    let e = Embedding::new(v);
    if e.is_degenerate() {
        shared.clone()
    } else {
        e.normalized()
    }
}

fn jitter(rng: &mut SplitMix64, b: &BBox, sigma: f64) -> BBox {
    if sigma == 0.0 {
        return *b;
    }
    BBox {
        u: b.u + sigma * rng.normal(),
        v: b.v + sigma * rng.normal(),
        w: (b.w + sigma * rng.normal()).max(1.0),
        h: (b.h + sigma * rng.normal()).max(1.0),
    }
}

/// Generates a scenario. Frames are numbered from 1.
pub fn generate(spec: &ScenarioSpec) -> Result<Scenario, SynthError> {
    spec.validate()?;
    let mut traj_rng = stream(spec.seed, STREAM_TRAJECTORY);
    let mut app_rng = stream(spec.seed, STREAM_APPEARANCE);
    let mut det_rng = stream(spec.seed, STREAM_DETECTION);
    let mut clutter_rng = stream(spec.seed, STREAM_CLUTTER);
    let mut prompt_rng = stream(spec.seed, STREAM_PROMPT);

    let objects = trajectories(spec, spec.n_objects, &mut traj_rng, spec.motion);
    let distractors = trajectories(spec, spec.n_distractors, &mut traj_rng, MotionModel::Linear);

    let dim = spec.embedding_dim;
    let h = spec.appearance_homogeneity;
    let shared = app_rng.unit_vector(dim);
    let object_embeddings: Vec<Embedding> =
        (0..spec.n_objects).map(|_| mix_embedding(&shared, &app_rng.unit_vector(dim), h)).collect();
    let distractor_embeddings: Vec<Embedding> =
        (0..spec.n_distractors).map(|_| mix_embedding(&shared, &app_rng.unit_vector(dim), h)).collect();

    let box_at = |(u, v): (f64, f64)| BBox { u, v, w: spec.box_w, h: spec.box_h };
    let mut gt = TrackSequence::new();
    let mut frames = Vec::with_capacity(spec.n_frames as usize);
    for frame in 1..=spec.n_frames {
        let t = f64::from(frame);
        let mut current = object_embeddings.clone();
        for s in spec.embedding_swaps.iter().filter(|s| frame >= s.frame) {
            current.swap(s.a, s.b);
        }

        let mut out = SynthFrame { frame, detections: Vec::new(), sources: Vec::new(), include: Vec::new(), exclude: Vec::new() };
        for (i, path) in objects.iter().enumerate() {
            let truth = box_at(path(t));
            gt.push(frame, i as u64 + 1, truth);
            // Draws happen whether or not the object is seen so the streams
            // stay aligned across occlusion settings.
            let noisy = jitter(&mut det_rng, &truth, spec.detection_noise_px);
            let missed = det_rng.chance(spec.miss_rate);
            let conf = det_rng.uniform(0.5, 1.0);
            let occluded = spec.occlusions.iter().any(|o| o.object == i && (o.start..=o.end).contains(&frame));
            if !occluded && !missed {
                out.detections.push(Detection { frame, bbox: noisy, confidence: conf, embedding: current[i].clone() });
                out.sources.push(Source::Object(i));
            }
            let include = prompt_rng.chance(spec.include_rate);
            let inc_box = jitter(&mut prompt_rng, &truth, 1.0);
            let inc_conf = prompt_rng.uniform(0.5, 0.9);
            if include && !occluded {
                out.include.push(Detection { frame, bbox: inc_box, confidence: inc_conf, embedding: current[i].clone() });
            }
        }
        for (k, path) in distractors.iter().enumerate() {
            let truth = box_at(path(t));
            let noisy = jitter(&mut det_rng, &truth, spec.detection_noise_px);
            let missed = det_rng.chance(spec.miss_rate);
            let conf = det_rng.uniform(0.5, 1.0);
            if !missed {
                out.detections.push(Detection { frame, bbox: noisy, confidence: conf, embedding: distractor_embeddings[k].clone() });
                out.sources.push(Source::Distractor(k));
            }
            let exclude = prompt_rng.chance(spec.exclude_rate);
            let exc_box = jitter(&mut prompt_rng, &truth, 1.0);
            let exc_conf = prompt_rng.uniform(0.5, 0.9);
            if exclude {
                out.exclude.push(Detection { frame, bbox: exc_box, confidence: exc_conf, embedding: distractor_embeddings[k].clone() });
            }
        }
        for _ in 0..spec.n_objects {
            if clutter_rng.chance(spec.clutter_rate) {
                let u = clutter_rng.uniform(0.0, spec.canvas_w);
                let v = clutter_rng.uniform(0.0, spec.canvas_h);
                let w = clutter_rng.uniform(0.5, 1.5) * spec.box_w;
                let hh = clutter_rng.uniform(0.5, 1.5) * spec.box_h;
                let conf = clutter_rng.uniform(0.2, 0.6);
                let embedding = clutter_rng.unit_vector(dim);
                out.detections.push(Detection { frame, bbox: BBox { u, v, w, h: hh }, confidence: conf, embedding });
                out.sources.push(Source::Clutter);
            }
        }
        frames.push(out);
    }
    Ok(Scenario { spec: spec.clone(), gt, frames, object_embeddings })
}

impl Scenario {
    /// General-prompt detections grouped by frame.
    pub fn detections_by_frame(&self) -> BTreeMap<u32, Vec<Detection>> {
        self.frames.iter().map(|f| (f.frame, f.detections.clone())).collect()
    }

    pub fn gt_records(&self) -> Vec<MotRecord> {
        self.gt
            .frames
            .iter()
            .flat_map(|(&f, boxes)| boxes.iter().map(move |(id, b)| MotRecord::new(f, *id as i64, b, 1.0)))
            .collect()
    }

    /// Writes `spec.txt`, `gt.txt`, `general.txt`/`.emb`, and
    /// `include.txt`/`exclude.txt` with sidecars when non-empty.
    pub fn write(&self, dir: &Path) -> Result<(), SynthError> {
        fs::create_dir_all(dir).map_err(|source| IoError::Io { path: dir.to_path_buf(), source })?;
        let spec_path = dir.join("spec.txt");
        fs::write(&spec_path, self.spec.to_text()).map_err(|source| IoError::Io { path: spec_path, source })?;
        io_mot::write_mot(&self.gt_records(), &dir.join("gt.txt"))?;
        let dump = |pick: fn(&SynthFrame) -> &Vec<Detection>| {
            let dets: Vec<&Detection> = self.frames.iter().flat_map(|f| pick(f).iter()).collect();
            let records: Vec<MotRecord> = dets.iter().map(|d| MotRecord::new(d.frame, -1, &d.bbox, d.confidence)).collect();
            let embs: Vec<Embedding> = dets.iter().map(|d| d.embedding.clone()).collect();
            (records, embs)
        };
        let (records, embs) = dump(|f| &f.detections);
        io_mot::write_with_embeddings(&records, &embs, &dir.join("general.txt"))?;
        for (name, pick) in [("include.txt", (|f| &f.include) as fn(&SynthFrame) -> &Vec<Detection>), ("exclude.txt", |f| &f.exclude)] {
            let (records, embs) = dump(pick);
            if !records.is_empty() {
                io_mot::write_with_embeddings(&records, &embs, &dir.join(name))?;
            }
        }
        Ok(())
    }
}

/// Reads a `key=value` spec file.
pub fn read_spec(path: &Path) -> Result<ScenarioSpec, SynthError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
    ScenarioSpec::from_text(&text)
}
