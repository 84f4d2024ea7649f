//! Manufactured solutions: exact fields, their forcings, forced runs and
//! convergence-rate measurement.

mod cases;
pub mod fields;
mod study;

use thiserror::Error;

use crate::grid::{GridError, Regime};
use crate::model::ModelError;

pub use cases::{manufactured_case, CaseForcing, CaseId, ManufacturedCase};
pub use study::{convergence_study, fit_order, forced_advance, temporal_study, RateTable, EXACT_LEVEL, VARIABLES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MmsError {
    #[error("unknown manufactured case {0:?}")]
    UnknownCase(String),
    #[error("case is posed in regime {case} but the grid is tagged {grid}")]
    RegimeMismatch { case: Regime, grid: Regime },
    #[error("a rate fit needs at least 3 levels, got {0}")]
    TooFewGrids(usize),
    #[error("forced run aborted: {0}")]
    Aborted(ModelError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
}
