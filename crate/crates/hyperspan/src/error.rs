//! Error taxonomy shared by every pipeline.
//!
//! The split matters for exit codes: `HypothesisRejected` (and pipeline
//! failures, which at small scale imply a violated hypothesis) map to exit
//! code 1, everything else unexpected maps to exit code 2.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: arity, labels out of range, duplicate edges, sizes.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation's stated precondition does not hold for these arguments.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A run-time hypothesis (degree, density, divisibility) failed on the
    /// instance itself; the pipeline refuses rather than guessing.
    #[error("hypothesis rejected: {0}")]
    HypothesisRejected(String),

    /// A constructive stage ran out of material. Carries the stage name so
    /// failures are attributable.
    #[error("pipeline failure at stage `{stage}`: {detail}")]
    PipelineFailure { stage: String, detail: String },

    /// An instance exceeds an explicit size guard for an exhaustive routine.
    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),

    /// A bound that is a theorem was violated: this is a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::HypothesisRejected(_) | Error::PipelineFailure { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn stage(stage: &str, detail: impl Into<String>) -> Self {
        Error::PipelineFailure { stage: stage.to_string(), detail: detail.into() }
    }
}
