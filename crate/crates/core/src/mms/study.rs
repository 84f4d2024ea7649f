use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use super::cases::ManufacturedCase;
use super::MmsError;
use crate::diagnostics::fmt_g17;
use crate::grid::{inner_scalar, inner_vector, Grid};
use crate::model::{AdvanceOutcome, SerrinConfig, StepControls, Stepper};

/// Runs the forced model from the exact initial data of `case`.
pub fn forced_advance(
    case: &ManufacturedCase,
    grid: &Grid,
    controls: StepControls,
    t_end: f64,
) -> Result<AdvanceOutcome, MmsError> {
    let s0 = case.state_at(grid, 0.0)?;
    let stepper = Stepper::new(s0, controls, case.params, SerrinConfig::default())?;
    let mut stepper = stepper.with_forcing(Arc::new(case.forcing()));
    let out = stepper.run_until(t_end, &mut |_, _| {});
    match out.aborted {
        Some(e) => Err(MmsError::Aborted(e)),
        None => Ok(out),
    }
}

/// Least-squares slope of `log e` against `log h`, with the RMS residual
/// of the fit.
pub fn fit_order(h: &[f64], e: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = h.iter().zip(e).map(|(h, e)| (h.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    let slope = sxy / sxx;
    let rms = (pts.iter().map(|p| (my + slope * (p.0 - mx) - p.1).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

pub const VARIABLES: [&str; 3] = ["rho", "u", "pi"];

/// Errors at or below this level count as exact reproduction; a slope
/// fitted through rounding noise means nothing.
pub const EXACT_LEVEL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub case: String,
    /// Mesh sizes (cells per direction) or, for temporal tables, the grid used.
    pub sizes: Vec<usize>,
    pub dts: Vec<f64>,
    /// `[rho, u, pi]` errors per row.
    pub errors: Vec<[f64; 3]>,
    pub orders: [f64; 3],
    pub fit_residuals: [f64; 3],
    /// Variables whose errors fail to decrease along the refinement.
    pub non_monotone: Vec<&'static str>,
    /// Variables reproduced to rounding on every row.
    pub exact: [bool; 3],
}

impl RateTable {
    fn build(case: &str, sizes: Vec<usize>, dts: Vec<f64>, scale: &[f64], errors: Vec<[f64; 3]>) -> Self {
        let mut orders = [0.0; 3];
        let mut fit_residuals = [0.0; 3];
        let mut non_monotone = Vec::new();
        let mut exact = [false; 3];
        for k in 0..3 {
            let e: Vec<f64> = errors.iter().map(|r| r[k]).collect();
            let (o, r) = fit_order(scale, &e);
            orders[k] = o;
            fit_residuals[k] = r;
            exact[k] = e.iter().all(|x| *x <= EXACT_LEVEL);
            if !exact[k] && e.windows(2).any(|w| !(w[1] < w[0])) {
                non_monotone.push(VARIABLES[k]);
            }
        }
        Self { case: case.to_string(), sizes, dts, errors, orders, fit_residuals, non_monotone, exact }
    }

    pub fn order(&self, var: &str) -> Option<f64> {
        VARIABLES.iter().position(|v| *v == var).map(|k| self.orders[k])
    }

    /// True when `var` is exact or converges at least at rate `min`.
    pub fn meets(&self, var: &str, min: f64) -> bool {
        VARIABLES
            .iter()
            .position(|v| *v == var)
            .is_some_and(|k| self.exact[k] || self.orders[k] >= min)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("case,n,dt,err_rho,err_u,err_pi\n");
        for ((n, dt), e) in self.sizes.iter().zip(&self.dts).zip(&self.errors) {
            let _ = writeln!(s, "{},{n},{},{},{},{}", self.case, fmt_g17(*dt), fmt_g17(e[0]), fmt_g17(e[1]), fmt_g17(e[2]));
        }
        let _ = writeln!(
            s,
            "{},order,,{},{},{}",
            self.case,
            fmt_g17(self.orders[0]),
            fmt_g17(self.orders[1]),
            fmt_g17(self.orders[2])
        );
        s
    }
}

/// Spatial convergence with `dt` proportional to `h^2`, starting from
/// `dt0` on the first grid; errors are measured at `t_end`.
pub fn convergence_study(
    case: &ManufacturedCase,
    grids: &[usize],
    dt0: f64,
    t_end: f64,
    base: StepControls,
) -> Result<RateTable, MmsError> {
    if grids.len() < 3 {
        return Err(MmsError::TooFewGrids(grids.len()));
    }
    let n0 = grids[0] as f64;
    let dts: Vec<f64> = grids.iter().map(|&n| dt0 * (n0 / n as f64).powi(2)).collect();
    let errors = grids
        .par_iter()
        .zip(dts.par_iter())
        .map(|(&n, &dt)| {
            let g = case.grid(n, n)?;
            let out = forced_advance(case, &g, StepControls { dt, ..base }, t_end)?;
            case.errors(&out.state)
        })
        .collect::<Result<Vec<_>, MmsError>>()?;
    let h: Vec<f64> = grids.iter().map(|&n| case.lx / n as f64).collect();
    Ok(RateTable::build(case.id.name(), grids.to_vec(), dts, &h, errors))
}

/// Temporal self-convergence on one grid: the differences between runs
/// with successively halved steps, `||x_dt - x_{dt/2}||`, should shrink
/// like `dt`. Row `k` holds the difference between runs `k` and `k + 1`.
pub fn temporal_study(
    case: &ManufacturedCase,
    n: usize,
    dts: &[f64],
    t_end: f64,
    base: StepControls,
) -> Result<RateTable, MmsError> {
    if dts.len() < 3 {
        return Err(MmsError::TooFewGrids(dts.len()));
    }
    let g = case.grid(n, n)?;
    let states = dts
        .par_iter()
        .map(|&dt| forced_advance(case, &g, StepControls { dt, ..base }, t_end).map(|o| o.state))
        .collect::<Result<Vec<_>, MmsError>>()?;
    let mut errors = Vec::new();
    for w in states.windows(2) {
        let dr = w[0].rho.zip_with(&w[1].rho, |a, b| a - b)?;
        let du = w[0].u.sub(&w[1].u);
        let dp = w[0].pi.zip_with(&w[1].pi, |a, b| a - b)?;
        errors.push([
            inner_scalar(&dr, &dr)?.sqrt(),
            inner_vector(&du, &du)?.sqrt(),
            inner_scalar(&dp, &dp)?.sqrt(),
        ]);
    }
    let steps = dts[..dts.len() - 1].to_vec();
    Ok(RateTable::build(case.id.name(), vec![n; steps.len()], steps.clone(), &steps, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms::cases::CaseId;

    #[test]
    fn slope_of_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
        let (o, r) = fit_order(&h, &e);
        assert!((o - 2.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn single_grid_is_rejected() {
        let c = ManufacturedCase::new(CaseId::ConstDensityTaylorGreen);
        assert!(matches!(
            convergence_study(&c, &[16], 1e-3, 0.01, StepControls::new(1e-3)),
            Err(MmsError::TooFewGrids(1))
        ));
    }

    #[test]
    fn one_step_error_is_small() {
        let c = ManufacturedCase::new(CaseId::DiffusingBumpNeumann);
        let g = c.grid(16, 16).unwrap();
        let out = forced_advance(&c, &g, StepControls::new(1e-3), 1e-3).unwrap();
        let e = c.errors(&out.state).unwrap();
        assert!(e[0] < 1e-3 && e[1] < 1e-2, "{e:?}");
    }
}
