use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use macsort_core::annotation::parse_annotation;
use macsort_core::config::RunConfig;
use macsort_core::io_mot::{self, IoError, PromptDump};
use macsort_core::metrics::{evaluate, MetricsReport};
use macsort_core::pipeline::{filter_sequence, track_sequence};
use macsort_core::synth::{generate, read_spec};
use macsort_core::Detection;
use rayon::prelude::*;

use crate::error::CliError;

const MARKERS: [&str; 3] = ["general.txt", "gt.txt", "filtered.txt"];

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    IoError::Io { path: path.to_path_buf(), source }.into()
}

fn is_sequence(dir: &Path) -> bool {
    MARKERS.iter().any(|m| dir.join(m).is_file())
}

/// Explicit sequence directories, or else every sequence under `input_dir`
/// (the directory itself if it is one), sorted by name.
fn sequences(explicit: &[PathBuf], cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    if !explicit.is_empty() {
        return Ok(explicit.to_vec());
    }
    let Some(root) = &cfg.input_dir else {
        return Err(CliError::input("NoInput", "no sequence directories given and input_dir is unset"));
    };
    if is_sequence(root) {
        return Ok(vec![root.clone()]);
    }
    let entries = fs::read_dir(root).map_err(|e| io_error(root, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_error(root, e))?.path();
        if path.is_dir() && is_sequence(&path) {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::input("NoInput", format!("no sequences under {}", root.display())));
    }
    Ok(out)
}

fn seq_name(seq: &Path) -> String {
    seq.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| seq.display().to_string())
}

/// Where a sequence's outputs go: `output_dir/<name>` or the sequence itself.
fn work_dir(seq: &Path, cfg: &RunConfig) -> PathBuf {
    match &cfg.output_dir {
        Some(out) => out.join(seq_name(seq)),
        None => seq.to_path_buf(),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

/// Runs `job` over the sequences on the pool, then prints the per-sequence
/// reports in input order. The first failure is returned after the others
/// have printed.
fn for_each_sequence(
    seqs: &[PathBuf],
    pool: &rayon::ThreadPool,
    job: impl Fn(&Path) -> Result<String, CliError> + Sync,
) -> Result<(), CliError> {
    let results: Vec<Result<String, CliError>> =
        pool.install(|| seqs.par_iter().map(|s| job(s).map_err(|e| e.context(&s.display().to_string()))).collect());
    let mut first_err = None;
    for r in results {
        match r {
            Ok(text) => print!("{text}"),
            Err(e) if first_err.is_none() => first_err = Some(e),
            Err(_) => {}
        }
    }
    first_err.map_or(Ok(()), Err)
}

pub fn filter(seqs: &[PathBuf], cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let seqs = sequences(seqs, cfg)?;
    if let Some(path) = &cfg.annotation_file {
        let raw = fs::read(path).map_err(|e| io_error(path, e))?;
        let q = parse_annotation(&raw)?.query()?;
        println!("prompts: general={:?} include={:?} exclude={:?}", q.general, q.include, q.exclude);
    }
    for_each_sequence(&seqs, pool, |seq| {
        let dump = PromptDump::load(seq)?;
        let filtered = filter_sequence(&dump, &cfg.filter, cfg.detection_threshold)?;
        let out = work_dir(seq, cfg);
        ensure_dir(&out)?;
        let path = out.join("filtered.txt");
        io_mot::write_with_embeddings(&filtered.records, &filtered.embeddings, &path)?;

        let name = seq_name(seq);
        let mut text = String::new();
        for c in &filtered.counts {
            let _ = writeln!(
                text,
                "{name} frame={} general={} ie_tp={} dropped={} rescued={} rejected={} kept={}",
                c.frame,
                c.general,
                c.ie_tps,
                c.dropped,
                c.rescued,
                c.rejected,
                c.kept()
            );
        }
        let _ = writeln!(
            text,
            "{name}: {} frames, {} boxes kept -> {}",
            filtered.counts.len(),
            filtered.records.len(),
            path.display()
        );
        Ok(text)
    })
}

/// Detections for tracking: the filtered file if present, else the raw
/// general dump. An empty CSV needs no sidecar.
fn track_input(seq: &Path, out: &Path) -> Result<(PathBuf, BTreeMap<u32, Vec<Detection>>), CliError> {
    let candidates = [out.join("filtered.txt"), seq.join("filtered.txt"), seq.join("general.txt")];
    let Some(path) = candidates.into_iter().find(|p| p.is_file()) else {
        return Err(IoError::MissingGeneralFile(seq.join("general.txt")).into());
    };
    if io_mot::read_mot(&path)?.is_empty() {
        return Ok((path, BTreeMap::new()));
    }
    let dets = io_mot::read_detections(&path)?;
    Ok((path, dets))
}

pub fn track(seqs: &[PathBuf], cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let seqs = sequences(seqs, cfg)?;
    for_each_sequence(&seqs, pool, |seq| {
        let out = work_dir(seq, cfg);
        let (input, mut dets) = track_input(seq, &out)?;
        for frame in dets.values_mut() {
            frame.retain(|d| d.confidence >= cfg.detection_threshold);
        }
        let start = Instant::now();
        let rows = track_sequence(&dets, &cfg.assoc)?;
        let elapsed = start.elapsed();
        ensure_dir(&out)?;
        let path = out.join("results.txt");
        io_mot::write_mot(&rows, &path)?;

        let ids: BTreeSet<i64> = rows.iter().map(|r| r.id).collect();
        let frames = match (dets.keys().next(), dets.keys().next_back()) {
            (Some(a), Some(b)) => b - a + 1,
            _ => 0,
        };
        let fps = if elapsed.as_secs_f64() > 0.0 { frames as f64 / elapsed.as_secs_f64() } else { f64::INFINITY };
        Ok(format!(
            "{}: {} -> {}: {frames} frames, {} rows, {} ids, {:.1} ms ({fps:.0} fps)\n",
            seq_name(seq),
            input.display(),
            path.display(),
            rows.len(),
            ids.len(),
            elapsed.as_secs_f64() * 1e3
        ))
    })
}

fn score(gt: &Path, results: &Path, cfg: &RunConfig) -> Result<MetricsReport, CliError> {
    let gt = io_mot::read_sequence(gt)?;
    let pred = if results.is_file() {
        io_mot::read_sequence(results)?
    } else {
        return Err(IoError::Io {
            path: results.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "results file not found"),
        }
        .into());
    };
    Ok(evaluate(&gt, &pred, &cfg.metrics)?)
}

fn report_json(r: &MetricsReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn eval(
    paths: &[PathBuf],
    json: bool,
    output: Option<&Path>,
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
) -> Result<(), CliError> {
    let render = |r: &MetricsReport| if json { report_json(r) } else { format!("{r}\n") };
    if paths.len() == 2 && paths.iter().all(|p| p.is_file()) {
        let report = score(&paths[0], &paths[1], cfg)?;
        if let Some(out) = output {
            write_file(out, &report_json(&report))?;
        }
        print!("{}", render(&report));
        return Ok(());
    }
    if output.is_some() {
        return Err(CliError::input("Usage", "--output needs the GT RESULTS form"));
    }
    let seqs = sequences(paths, cfg)?;
    for_each_sequence(&seqs, pool, |seq| {
        let out = work_dir(seq, cfg);
        let report = score(&seq.join("gt.txt"), &out.join("results.txt"), cfg)?;
        ensure_dir(&out)?;
        write_file(&out.join("report.json"), &report_json(&report))?;
        Ok(format!("== {}\n{}", seq_name(seq), render(&report)))
    })
}

pub fn synth(spec: &Path, out_dir: &Path) -> Result<(), CliError> {
    let spec = read_spec(spec)?;
    let scenario = generate(&spec)?;
    scenario.write(out_dir)?;
    let dets: usize = scenario.frames.iter().map(|f| f.detections.len()).sum();
    println!(
        "{}: {} objects, {} frames, {} gt boxes, {dets} detections",
        out_dir.display(),
        spec.n_objects,
        spec.n_frames,
        scenario.gt.num_boxes()
    );
    Ok(())
}

pub fn parse_captions(dir: &Path) -> Result<(), CliError> {
    let entries = fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_error(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "json") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        eprintln!("warning: no *.json annotation files in {}", dir.display());
        return Ok(());
    }
    let mut failed = 0usize;
    for path in &files {
        let name = path.file_name().unwrap_or_default().to_string_lossy();
        let parsed = fs::read(path)
            .map_err(|e| e.to_string())
            .and_then(|raw| parse_annotation(&raw).and_then(|a| a.query()).map_err(|e| e.to_string()));
        match parsed {
            Ok(q) => println!("ok {name}: general={:?} include={:?} exclude={:?}", q.general, q.include, q.exclude),
            Err(reason) => {
                failed += 1;
                println!("invalid {name}: {reason}");
            }
        }
    }
    println!("{} files, {failed} errors", files.len());
    if failed > 0 {
        return Err(CliError::input("CaptionGrammar", format!("{failed} of {} annotation files failed", files.len())));
    }
    Ok(())
}
