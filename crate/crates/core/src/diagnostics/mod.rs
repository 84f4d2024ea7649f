//! Per-step diagnostics: norms, energy functionals, boundary functionals,
//! space-time accumulators with their blow-up monitor, and the Gronwall
//! ledgers evaluated over a finished trajectory.

mod boundary;
pub mod csv;
mod ledger;
mod record;
mod serrin;

use thiserror::Error;

pub use boundary::boundary_functionals;
pub use csv::{fmt_g17, read_records, CsvSink};
pub use ledger::{estimate_ledger, Inequality, LedgerEntry, LedgerOptions, LedgerReport, Violation};
pub use record::{energy_record, DiagnosticsRecord};
pub use serrin::{
    blowup_monitor, serrin_accumulate, validate_exponents, BlowupStatus, SerrinAccumulator, SerrinTarget,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("exponents (r, s) = ({r}, {s}) violate 2 < r <= inf, 2/s + 2/r <= 1")]
    BadExponents { r: f64, s: f64 },
    #[error("unknown accumulator target {0:?}")]
    UnknownTarget(String),
}
