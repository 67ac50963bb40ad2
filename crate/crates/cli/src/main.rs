#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use grade_forge::eval::EvalError;
use grade_forge::noise::NoiseError;
use grade_forge::sim::SimError;

#[derive(Debug, Parser)]
#[command(name = "grade-forge", version, about = "Headless dynamic-scene simulation and evaluation pipeline")]
pub struct Cli {
    /// TOML pipeline config; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides every module seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract the footprint polygon and occupancy grid of an environment mesh.
    Footprint {
        /// STL or OBJ mesh; falls back to `paths.environment`.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Place humans and flying objects and write a scene manifest.
    Compose {
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and write its log.
    Simulate {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the JSON-lines mirror of the log.
        #[arg(long)]
        text_log: bool,
    },
    /// Apply sensor noise models to a recorded experiment.
    Postprocess {
        #[arg(long)]
        log: PathBuf,
        /// Needed for rolling shutter and motion blur.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Rendered frames of the run; defaults to `frames/` beside the log.
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        text_log: bool,
    },
    /// Re-synthesize a recorded experiment, optionally with extra cameras.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        text_log: bool,
    },
    /// Score an estimated trajectory against ground truth.
    Eval {
        /// Ground truth, TUM format.
        #[arg(long, conflicts_with = "log")]
        gt: Option<PathBuf>,
        /// Take ground truth from this log's camera poses instead.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, requires = "log")]
        robot: Option<String>,
        /// Estimate, TUM format.
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        name: Option<String>,
        /// Sequence start (s); defaults to the first ground-truth stamp.
        #[arg(long)]
        start: Option<f64>,
        /// Sequence duration (s); defaults to the ground-truth span.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        csv: bool,
    },
    /// Motion and human-coverage statistics of a recorded experiment.
    Stats {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        robot: Option<String>,
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
}

/// 2 for integrity and association failures, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let integrity = |e: &SimError| matches!(e, SimError::MissingRecords(_) | SimError::ManifestMismatch(_) | SimError::Gap { .. });
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SimError>() {
            return if integrity(e) { 2 } else { 1 };
        }
        if let Some(NoiseError::Sim(e)) = cause.downcast_ref::<NoiseError>() {
            return if integrity(e) { 2 } else { 1 };
        }
        if let Some(EvalError::Association(_)) = cause.downcast_ref::<EvalError>() {
            return 2;
        }
        if cause.downcast_ref::<commands::IntegrityError>().is_some() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let env = env_logger::Env::new().filter_or("GRADE_FORGE_LOG_LEVEL", "warn");
    env_logger::Builder::from_env(env).format_timestamp(None).init();
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
