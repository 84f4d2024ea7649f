//! Discrete Gronwall ledgers.
//!
//! Each tracked inequality has the shape `dE/dt + nu D <= C Y`. Per step
//! the backward-difference left side `X_k` and the basis `Y_k` are formed
//! from consecutive records; `nu` is fixed from the parameters and `C` is
//! fitted from the run, since the analysis never makes it explicit.

use super::DiagnosticsRecord;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// `d/dt |grad rho|^2 + nu |lap rho|^2 <= C (|grad rho|^2 |lap rho|^2 + |v|_4^4 |grad rho|^2)`.
    DensityGradient,
    /// `d/dt |sqrt(rho) v|^2 + nu |grad v|^2 <= C (|grad rho|_4^4 + |lap rho|^2)(1 + |sqrt(rho) v|^2)`.
    Kinetic,
    /// `dF/dt + nu G <= C (|grad u|^4 + |lap rho|^4 + |lap rho|^2) F`.
    HigherOrder,
}

impl Inequality {
    pub const ALL: [Inequality; 3] = [Inequality::DensityGradient, Inequality::Kinetic, Inequality::HigherOrder];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::DensityGradient => "density_gradient",
            Inequality::Kinetic => "kinetic",
            Inequality::HigherOrder => "higher_order",
        }
    }

    pub fn nu(self, params: &ModelParams) -> f64 {
        let diff = params.c0 / params.beta;
        match self {
            Inequality::DensityGradient => diff,
            Inequality::Kinetic => params.mu_min(),
            Inequality::HigherOrder => 0.5 * diff.min(params.mu_min()),
        }
    }

    /// `(E, D, Y)` of one record.
    fn terms(self, r: &DiagnosticsRecord) -> (f64, f64, f64) {
        let sq = |x: f64| x * x;
        match self {
            Inequality::DensityGradient => (
                sq(r.grad_rho_l2),
                sq(r.lap_rho_l2),
                sq(r.grad_rho_l2) * sq(r.lap_rho_l2) + sq(sq(r.v_l4)) * sq(r.grad_rho_l2),
            ),
            Inequality::Kinetic => (
                sq(r.sqrt_rho_v_l2),
                sq(r.grad_v_l2),
                (sq(sq(r.grad_rho_l4)) + sq(r.lap_rho_l2)) * (1.0 + sq(r.sqrt_rho_v_l2)),
            ),
            Inequality::HigherOrder => {
                let gu = sq(r.grad_u_l2);
                let lr = sq(r.lap_rho_l2);
                (r.f_t, r.g_t, (gu * gu + lr * lr + lr) * r.f_t)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerOptions {
    /// Slack below `-tol` is a violation.
    pub tol: f64,
    /// Largest admissible fitted constant.
    pub c_cap: f64,
}

impl Default for LedgerOptions {
    fn default() -> Self {
        Self { tol: 1e-6, c_cap: 1e6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub inequality: Inequality,
    /// Index of the later record of the offending step.
    pub step: usize,
    pub slack: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub inequality: Inequality,
    pub nu: f64,
    /// Least-squares fit of `X = C Y`.
    pub c_ls: f64,
    /// Smallest constant for which every step holds.
    pub c_env: f64,
    /// Minimum over the run of `c_env Y_k - X_k`.
    pub min_slack: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerReport {
    pub entries: Vec<LedgerEntry>,
    pub violations: Vec<Violation>,
}

impl LedgerReport {
    pub fn entry(&self, q: Inequality) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.inequality == q)
    }

    pub fn violations_of(&self, q: Inequality) -> usize {
        self.violations.iter().filter(|v| v.inequality == q).count()
    }
}

pub fn estimate_ledger(records: &[DiagnosticsRecord], params: &ModelParams, opts: LedgerOptions) -> LedgerReport {
    let mut entries = Vec::new();
    let mut violations = Vec::new();
    for q in Inequality::ALL {
        let nu = q.nu(params);
        let mut xy = Vec::new();
        for k in 1..records.len() {
            let (a, b) = (&records[k - 1], &records[k]);
            let dt = b.t - a.t;
            if !(dt > 0.0) {
                continue;
            }
            let (e0, _, _) = q.terms(a);
            let (e1, d1, y1) = q.terms(b);
            xy.push((k, (e1 - e0) / dt + nu * d1, y1));
        }
        // a basis this small carries no information about C
        let scale = xy.iter().fold(0.0f64, |m, &(_, _, y)| m.max(y.abs()));
        let tiny = 1e-300f64.max(1e-14 * scale);
        let c_env = xy
            .iter()
            .filter(|&&(_, _, y)| y > tiny)
            .fold(0.0f64, |m, &(_, x, y)| m.max(x / y));
        let (sxy, syy) = xy.iter().fold((0.0, 0.0), |(a, b), &(_, x, y)| (a + x * y, b + y * y));
        let c_ls = if syy > 0.0 { (sxy / syy).max(0.0) } else { 0.0 };
        let mut min_slack = f64::INFINITY;
        for &(k, x, y) in &xy {
            let slack = if y > tiny { c_env * y - x } else { -x };
            let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
            min_slack = min_slack.min(slack);
            if slack < -opts.tol {
                violations.push(Violation {
                    inequality: q,
                    step: k,
                    slack,
                    reason: "left side grows where the right side vanishes".into(),
                });
            }
        }
        if c_env > opts.c_cap || !c_env.is_finite() {
            violations.push(Violation {
                inequality: q,
                step: 0,
                slack: f64::NAN,
                reason: format!("fitted constant {c_env:e} exceeds the cap {:e}", opts.c_cap),
            });
        }
        entries.push(LedgerEntry {
            inequality: q,
            nu,
            c_ls,
            c_env,
            min_slack: if xy.is_empty() { 0.0 } else { min_slack },
            steps: xy.len(),
        });
    }
    LedgerReport { entries, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Friction;
    use crate::model::MuLaw;

    fn params() -> ModelParams {
        ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Constant(1.0),
            alpha: 0.5,
            beta: 2.0,
            rho_tilde: 1.0,
            friction: Friction::Zero,
        }
    }

    fn rest(n: usize) -> Vec<DiagnosticsRecord> {
        (0..n)
            .map(|k| DiagnosticsRecord { t: 0.1 * k as f64, dt: 0.1, rho_l2: 1.0, ..Default::default() })
            .collect()
    }

    #[test]
    fn rest_trajectory_is_clean() {
        let rep = estimate_ledger(&rest(10), &params(), LedgerOptions::default());
        assert!(rep.violations.is_empty());
        assert!(rep.entries.iter().all(|e| e.min_slack >= 0.0));
    }

    #[test]
    fn corrupted_record_is_caught() {
        let mut recs = rest(10);
        recs[4].grad_rho_l2 = 1.0;
        let rep = estimate_ledger(&recs, &params(), LedgerOptions::default());
        assert!(rep.violations_of(Inequality::DensityGradient) >= 1);
    }

    #[test]
    fn decaying_run_fits_envelope() {
        let recs: Vec<_> = (0..20)
            .map(|k| {
                let t = 0.01 * k as f64;
                let e = (-t).exp();
                DiagnosticsRecord { t, grad_rho_l2: 0.1 * e, lap_rho_l2: 0.5 * e, v_l4: 0.2, ..Default::default() }
            })
            .collect();
        let rep = estimate_ledger(&recs, &params(), LedgerOptions::default());
        assert_eq!(rep.violations_of(Inequality::DensityGradient), 0);
        let e = rep.entry(Inequality::DensityGradient).unwrap();
        assert!(e.min_slack >= -1e-12 && e.c_env >= e.c_ls);
    }
}
