//! Trajectory and dataset evaluation.

pub mod ate;
pub mod missing;
pub mod report;
pub mod stats;
pub mod trajectory;

pub use ate::{associate, ate_rmse, AteResult, DEFAULT_MAX_ASSOC_DT};
pub use missing::{missing_time, MissingTimeParams};
pub use report::{eval_csv, eval_table, stats_csv, stats_text, EvalReport};
pub use stats::{sequence_stats, SequenceStats};
pub use trajectory::Trajectory;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("association failed: {0}")]
    Association(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing channel {0}")]
    MissingChannel(String),
}
