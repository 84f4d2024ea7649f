//! Forced trajectories against the manufactured catalog.

use super::{criterion, Criterion};
use crate::mms::{convergence_study, temporal_study, CaseId, ManufacturedCase, RateTable};
use crate::model::StepControls;
use crate::runner::RunnerError;

const GRIDS: [usize; 3] = [16, 32, 64];
const DT0: f64 = 1e-3;
const SPACE_END: f64 = 0.016;
const TIME_GRID: usize = 16;
const DTS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
const TIME_END: f64 = 0.1;

fn controls() -> StepControls {
    let mut c = StepControls::new(DT0);
    c.pic_tol = 1e-11;
    c
}

/// The spatial and temporal tables of one case.
pub fn tables(id: CaseId) -> Result<(RateTable, RateTable), RunnerError> {
    let case = ManufacturedCase::new(id);
    let space = convergence_study(&case, &GRIDS, DT0, SPACE_END, controls())?;
    let time = temporal_study(&case, TIME_GRID, &DTS, TIME_END, controls())?;
    Ok((space, time))
}

fn rate(t: &RateTable, k: usize) -> String {
    if t.exact[k] {
        "exact".to_string()
    } else {
        format!("{:.2}", t.orders[k])
    }
}

pub fn c8() -> Result<Criterion, RunnerError> {
    let mut ok = true;
    let mut parts = Vec::new();
    for id in CaseId::ALL {
        let (space, time) = tables(id)?;
        let pass = ["rho", "u"].iter().all(|v| space.meets(v, 1.9) && time.meets(v, 0.9));
        ok &= pass;
        parts.push(format!(
            "{id} space {}/{} time {}/{}",
            rate(&space, 0),
            rate(&space, 1),
            rate(&time, 0),
            rate(&time, 1)
        ));
    }
    Ok(criterion("C8", "manufactured convergence (rho/u)", ok, parts.join(", ")))
}
