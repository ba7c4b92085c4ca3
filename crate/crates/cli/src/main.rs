//! `macsort`: filter prompt dumps, track, evaluate and generate synthetic
//! sequences from the command line.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use macsort_core::config::RunConfig;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "macsort", version, about = "Prompt-filtered generic multi-object tracking")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// key=value config file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads across sequences (default: all cores).
    #[arg(long, global = true, env = "MACSORT_THREADS", value_name = "N")]
    threads: Option<usize>,
    #[command(flatten)]
    keys: ConfigFlags,
}

/// One flag per config key, validated by the same parser as the file.
#[derive(Debug, Args, Default)]
struct ConfigFlags {
    #[arg(long, global = true, value_name = "X")]
    lambda: Option<String>,
    #[arg(long, global = true, value_name = "DEG")]
    theta_deg: Option<String>,
    #[arg(long, global = true, value_name = "X")]
    iou_gate: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    max_age: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    min_hits: Option<String>,
    #[arg(long, global = true, value_name = "X")]
    ema_alpha: Option<String>,
    #[arg(long, global = true, value_name = "BOOL")]
    use_appearance: Option<String>,
    #[arg(long, global = true, value_name = "BOOL")]
    use_direction: Option<String>,
    /// `adaptive` or `fixed:<w_aaw>:<w_amc>`.
    #[arg(long, global = true, value_name = "MODE")]
    weights: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    kappa1: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    kappa2: Option<String>,
    #[arg(long, global = true, value_name = "X")]
    detection_threshold: Option<String>,
    #[arg(long, global = true, value_name = "X")]
    overlap_threshold: Option<String>,
    #[arg(long, global = true, value_name = "BOOL")]
    cold_start_passthrough: Option<String>,
    #[arg(long, global = true, value_name = "BOOL")]
    memory_from_ie_only: Option<String>,
    #[arg(long, global = true, value_name = "X")]
    iou_threshold: Option<String>,
    #[arg(long, global = true, value_name = "BOOL")]
    hota_sweep: Option<String>,
    #[arg(long, global = true, value_name = "DIR")]
    input_dir: Option<String>,
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    annotation_file: Option<String>,
}

impl ConfigFlags {
    fn pairs(&self) -> [(&'static str, &Option<String>); 20] {
        [
            ("lambda", &self.lambda),
            ("theta_deg", &self.theta_deg),
            ("iou_gate", &self.iou_gate),
            ("max_age", &self.max_age),
            ("min_hits", &self.min_hits),
            ("ema_alpha", &self.ema_alpha),
            ("use_appearance", &self.use_appearance),
            ("use_direction", &self.use_direction),
            ("weights", &self.weights),
            ("kappa1", &self.kappa1),
            ("kappa2", &self.kappa2),
            ("detection_threshold", &self.detection_threshold),
            ("overlap_threshold", &self.overlap_threshold),
            ("cold_start_passthrough", &self.cold_start_passthrough),
            ("memory_from_ie_only", &self.memory_from_ie_only),
            ("iou_threshold", &self.iou_threshold),
            ("hota_sweep", &self.hota_sweep),
            ("input_dir", &self.input_dir),
            ("output_dir", &self.output_dir),
            ("annotation_file", &self.annotation_file),
        ]
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Include/exclude + memory filtering of prompt dumps into filtered.txt/.emb.
    Filter {
        /// Sequence directories holding general.txt (and optionally include.txt, exclude.txt).
        seqs: Vec<PathBuf>,
    },
    /// Track filtered.txt (or general.txt) detections into results.txt.
    Track {
        seqs: Vec<PathBuf>,
        /// Drop the appearance term from the cost.
        #[arg(long)]
        disable_appearance: bool,
        /// Drop the velocity-direction term from the cost.
        #[arg(long)]
        disable_direction: bool,
    },
    /// Score results against ground truth: `eval GT RESULTS` or `eval SEQ_DIR...`.
    Eval {
        paths: Vec<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report here (GT RESULTS form only).
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic sequence from a key=value scenario file.
    Synth { spec: PathBuf, out_dir: PathBuf },
    /// Validate the captions of every *.json annotation in a directory.
    ParseCaptions { dir: PathBuf },
    /// Print the effective configuration.
    Config,
}

fn load_config(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &global.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input("Io", format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for (key, value) in global.keys.pairs() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::input("BadValue", "threads must be at least 1"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::runtime("ThreadPool", e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = load_config(&cli.global)?;
    let pool = thread_pool(cli.global.threads)?;
    match cli.command {
        Command::Filter { seqs } => commands::filter(&seqs, &cfg, &pool),
        Command::Track { seqs, disable_appearance, disable_direction } => {
            if disable_appearance {
                cfg.assoc.use_appearance = false;
            }
            if disable_direction {
                cfg.assoc.use_direction = false;
            }
            commands::track(&seqs, &cfg, &pool)
        }
        Command::Eval { paths, json, output } => commands::eval(&paths, json, output.as_deref(), &cfg, &pool),
        Command::Synth { spec, out_dir } => commands::synth(&spec, &out_dir),
        Command::ParseCaptions { dir } => commands::parse_captions(&dir),
        Command::Config => {
            print!("{}", cfg.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::input("Usage", first));
            return ExitCode::from(error::EXIT_INPUT as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit as u8)
        }
    }
}
