//! Verification suites. Each check yields one named criterion with a
//! pass flag and a one-line detail.

mod elliptic;
mod invariants;
mod ledger;
mod mms;
mod operators;
pub mod oracle;

use std::path::PathBuf;

use super::config::{InitialKind, RunConfig};
use super::RunnerError;
use crate::grid::{Friction, Regime};
use crate::model::{ModelParams, MuLaw, SerrinConfig, StepControls};

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} {}: {}", self.id, self.name, self.detail)
    }
}

/// The standard small-data case: a 10% density bump with a weak swirl.
pub fn standard_config(regime: Regime, n: usize, dt: f64, t_end: f64) -> RunConfig {
    RunConfig {
        nx: n,
        ny: n,
        lx: 1.0,
        ly: 1.0,
        regime,
        params: ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Constant(1.0),
            alpha: 0.5,
            beta: 2.0,
            rho_tilde: 1.0,
            friction: if regime == Regime::A { Friction::Constant(1.0) } else { Friction::Zero },
        },
        initial: InitialKind::Bump,
        amplitude: 0.1,
        swirl: 0.02,
        mean_rho: 1.0,
        t_end,
        controls: StepControls::new(dt),
        out_dir: PathBuf::from("."),
        csv: "diagnostics.csv".into(),
        snapshot_every: 0,
        checkpoint_every: 0,
        serrin: SerrinConfig::default(),
    }
}

/// A fresh scratch directory under the system temp dir.
pub(crate) fn scratch_dir(tag: &str) -> Result<PathBuf, RunnerError> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let k = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("machcombust-{tag}-{}-{k}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(RunnerError::io(format!("clearing {}", dir.display())))?;
    }
    std::fs::create_dir_all(&dir).map_err(RunnerError::io(format!("creating {}", dir.display())))?;
    Ok(dir)
}

pub const SUITES: [&str; 5] = ["operators", "elliptic", "invariants", "mms", "ledger"];

pub(crate) fn criterion(id: &'static str, name: &'static str, passed: bool, detail: String) -> Criterion {
    Criterion { id, name, passed, detail }
}

/// One criterion by id, `C1` to `C12`.
pub fn run_criterion(id: &str) -> Result<Criterion, RunnerError> {
    match id {
        "C1" => operators::c1(),
        "C2" => elliptic::c2(),
        "C3" => invariants::c3(),
        "C4" => invariants::c4(),
        "C5" => invariants::c5(),
        "C6" => invariants::c6(),
        "C7" => elliptic::c7(),
        "C8" => mms::c8(),
        "C9" => invariants::c9(),
        "C10" => ledger::c10(),
        "C11" => invariants::c11(),
        "C12" => invariants::c12(),
        other => Err(RunnerError::UnknownSuite(other.to_string())),
    }
}

/// Criteria of each suite.
pub fn suite_criteria(name: &str) -> Option<&'static [&'static str]> {
    match name {
        "operators" => Some(&["C1"]),
        "elliptic" => Some(&["C2", "C7"]),
        "invariants" => Some(&["C3", "C4", "C5", "C6", "C9", "C11", "C12"]),
        "mms" => Some(&["C8"]),
        "ledger" => Some(&["C10"]),
        _ => None,
    }
}

pub fn run_suite(name: &str) -> Result<Vec<Criterion>, RunnerError> {
    let ids = suite_criteria(name).ok_or_else(|| RunnerError::UnknownSuite(name.to_string()))?;
    ids.iter().map(|id| run_criterion(id)).collect()
}
