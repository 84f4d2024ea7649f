//! Batch front end: configuration, runs, checkpoints and the verification
//! suites.

pub mod checkpoint;
pub mod config;
pub mod run;
pub mod verify;

use thiserror::Error;

use crate::elliptic::EllipticError;
use crate::grid::GridError;
use crate::mms::MmsError;
use crate::model::ModelError;

pub use checkpoint::{config_hash, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{parse_config, InitialKind, RunConfig};
pub use run::{initial_state, resume, run, RunStatus, RunSummary};
pub use verify::{run_criterion, run_suite, suite_criteria, Criterion, SUITES};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint was written for a different configuration")]
    HashMismatch,
    #[error("unknown suite '{0}' (expected one of operators, elliptic, invariants, mms, ledger)")]
    UnknownSuite(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Mms(#[from] MmsError),
}

impl RunnerError {
    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunnerError {
        let context = context.into();
        move |source| RunnerError::Io { context, source }
    }
}
