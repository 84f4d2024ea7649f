//! Energy-type inequalities fitted along the small-data runs, and the
//! small versus large gradient comparison.

use super::invariants::random_suite;
use super::{criterion, standard_config, Criterion};
use crate::diagnostics::{estimate_ledger, DiagnosticsRecord, LedgerOptions};
use crate::grid::Regime;
use crate::model::{ModelParams, MuLaw, Stepper};
use crate::runner::config::RunConfig;
use crate::runner::run::initial_state;
use crate::runner::RunnerError;

fn records_of(cfg: &RunConfig) -> Result<Vec<DiagnosticsRecord>, RunnerError> {
    let mut st = Stepper::new(initial_state(cfg)?, cfg.controls, cfg.params, cfg.serrin)?;
    let out = st.run_until(cfg.t_end, &mut |_, _| {});
    match out.aborted {
        Some(e) => Err(e.into()),
        None => Ok(out.records),
    }
}

/// Strong stirring of a steep bump, resolved finely enough that the
/// stretched gradients are not smeared out at once.
fn large_config() -> RunConfig {
    let mut cfg = standard_config(Regime::C, 40, 0.0025, 0.2);
    cfg.amplitude = 0.5;
    cfg.swirl = 2.0;
    cfg.params.c0 = 0.001;
    cfg.params.alpha = 0.3;
    cfg.params.beta = 3.0;
    cfg.params.mu_law = MuLaw::Constant(0.01);
    cfg
}

fn growth(records: &[DiagnosticsRecord]) -> f64 {
    let sup = records.iter().map(|r| r.grad_rho_l2).fold(0.0, f64::max);
    sup / records[0].grad_rho_l2
}

fn violation(label: &str, records: &[DiagnosticsRecord], params: &ModelParams) -> Option<String> {
    let rep = estimate_ledger(records, params, LedgerOptions::default());
    let v = rep.violations.first()?;
    Some(format!("{label}: {} at step {} ({})", v.inequality.name(), v.step, v.reason))
}

pub fn c10() -> Result<Criterion, RunnerError> {
    let mut problems = Vec::new();
    let mut runs = 0;
    match random_suite() {
        Ok(suite) => {
            for t in suite {
                runs += 1;
                problems.extend(violation(&format!("{} seed {}", t.regime, t.seed), &t.records, &t.params));
            }
        }
        Err(e) => problems.push(format!("suite could not start: {e}")),
    }
    let mut small = 0.0f64;
    for regime in [Regime::A, Regime::B, Regime::C] {
        let cfg = standard_config(regime, 32, 0.005, 0.2);
        let rec = records_of(&cfg)?;
        runs += 1;
        problems.extend(violation(&format!("standard {regime}"), &rec, &cfg.params));
        small = small.max(growth(&rec));
    }
    let large = growth(&records_of(&large_config())?);
    let mut ok = problems.is_empty();
    let mut detail = match problems.first() {
        None => format!("no violations on {runs} runs"),
        Some(p) => format!("{} violations; first: {p}", problems.len()),
    };
    ok &= small <= 1.05 && large > 2.0;
    detail.push_str(&format!("; sup |grad rho| / initial: small {small:.3}, large {large:.2}"));
    Ok(criterion("C10", "energy ledger and gradient growth", ok, detail))
}
