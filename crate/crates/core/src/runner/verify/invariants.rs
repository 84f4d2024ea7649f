//! Properties that must hold along every trajectory: bounds, conservation,
//! constraints, the constant-density reduction, fixed-point contraction,
//! monitor sanity and reproducibility.

use std::f64::consts::PI;
use std::fs;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::{Oracle, Walls};
use super::{criterion, scratch_dir, standard_config, Criterion};
use crate::diagnostics::{validate_exponents, DiagnosticsRecord, SerrinAccumulator, SerrinTarget};
use crate::grid::{apply_vector_bc, perp_gradient, BoundarySpec, Friction, Grid, Location, Regime, ScalarField, VectorField};
use crate::model::state::fill_density;
use crate::model::{picard_step, FluidState, ModelParams, MuLaw, Stepper};
use crate::runner::checkpoint::Checkpoint;
use crate::runner::config::{InitialKind, RunConfig};
use crate::runner::run::{initial_state, resume, run};
use crate::runner::RunnerError;

const RUNS_PER_REGIME: usize = 20;
const REGIMES: [Regime; 3] = [Regime::A, Regime::B, Regime::C];

/// One randomized small-data run.
pub(super) struct Trajectory {
    pub regime: Regime,
    pub seed: u64,
    pub params: ModelParams,
    pub records: Vec<DiagnosticsRecord>,
    pub aborted: Option<String>,
}

fn random_config(regime: Regime, seed: u64) -> RunConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = standard_config(regime, 16, 0.01, 0.1);
    let amp = rng.gen_range(0.05..0.3);
    let mean = rng.gen_range(0.8..1.5);
    cfg.amplitude = amp;
    cfg.mean_rho = mean;
    cfg.swirl = rng.gen_range(0.0..0.05);
    cfg.initial = if rng.gen_bool(0.5) { InitialKind::Bump } else { InitialKind::Layer };
    let p = &mut cfg.params;
    p.c0 = rng.gen_range(0.05..0.3);
    p.alpha = mean * (1.0 - amp) * rng.gen_range(0.7..0.95);
    p.beta = mean * (1.0 + amp) * rng.gen_range(1.05..1.5);
    p.rho_tilde = mean;
    p.mu_law = match rng.gen_range(0..3) {
        0 => MuLaw::Constant(rng.gen_range(0.05..1.0)),
        1 => MuLaw::Affine(rng.gen_range(0.1..0.5), rng.gen_range(0.0..0.5)),
        _ => MuLaw::Exp(rng.gen_range(0.1..0.5), rng.gen_range(-0.5..0.5)),
    };
    p.friction = match regime {
        Regime::A => Friction::Constant(rng.gen_range(0.0..2.0)),
        _ => Friction::Zero,
    };
    cfg.controls.dt = rng.gen_range(0.005..0.02);
    cfg.t_end = 10.0 * cfg.controls.dt;
    cfg
}

fn simulate(cfg: &RunConfig) -> Result<(Vec<DiagnosticsRecord>, Option<String>), RunnerError> {
    let state = initial_state(cfg)?;
    let mut st = Stepper::new(state, cfg.controls, cfg.params, cfg.serrin)?;
    let out = st.run_until(cfg.t_end, &mut |_, _| {});
    Ok((out.records, out.aborted.map(|e| e.to_string())))
}

/// Shared by the bounds, conservation and constraint checks.
pub(super) fn random_suite() -> &'static Result<Vec<Trajectory>, String> {
    static SUITE: OnceLock<Result<Vec<Trajectory>, String>> = OnceLock::new();
    SUITE.get_or_init(|| {
        let mut out = Vec::new();
        for (r, regime) in REGIMES.into_iter().enumerate() {
            for k in 0..RUNS_PER_REGIME {
                let seed = 1000 * r as u64 + k as u64;
                let cfg = random_config(regime, seed);
                let (records, aborted) = simulate(&cfg).map_err(|e| format!("seed {seed}: {e}"))?;
                out.push(Trajectory { regime, seed, params: cfg.params, records, aborted });
            }
        }
        Ok(out)
    })
}

/// Runs `check` on every trajectory; the first failure (or abort) is reported.
fn over_suite(
    id: &'static str,
    name: &'static str,
    check: impl Fn(&Trajectory) -> Result<f64, String>,
    summary: &str,
) -> Result<Criterion, RunnerError> {
    let suite = match random_suite() {
        Ok(s) => s,
        Err(e) => return Ok(criterion(id, name, false, format!("suite could not start: {e}"))),
    };
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut steps = 0;
    for t in suite {
        steps += t.records.len().saturating_sub(1);
        if let Some(e) = &t.aborted {
            failures.push(format!("{} seed {} aborted: {e}", t.regime, t.seed));
            continue;
        }
        match check(t) {
            Ok(w) => worst = worst.max(w),
            Err(e) => failures.push(format!("{} seed {}: {e}", t.regime, t.seed)),
        }
    }
    let detail = match failures.first() {
        None => format!("{} runs, {steps} steps, {summary} {worst:.2e}", suite.len()),
        Some(f) => format!("{} of {} runs fail; first: {f}", failures.len(), suite.len()),
    };
    Ok(criterion(id, name, failures.is_empty(), detail))
}

pub fn c3() -> Result<Criterion, RunnerError> {
    over_suite(
        "C3",
        "maximum principle",
        |t| {
            let (a, b) = (t.params.alpha, t.params.beta);
            let mut worst: f64 = 0.0;
            for (k, r) in t.records.iter().enumerate() {
                let excess = (a - r.rho_min).max(r.rho_max - b);
                if excess > 1e-8 {
                    return Err(format!("step {k}: rho in [{}, {}], bounds [{a}, {b}]", r.rho_min, r.rho_max));
                }
                worst = worst.max(excess);
            }
            Ok(worst)
        },
        "largest excursion past the bounds",
    )
}

pub fn c4() -> Result<Criterion, RunnerError> {
    over_suite(
        "C4",
        "conservation and decay",
        |t| {
            let first = &t.records[0];
            let mut worst: f64 = 0.0;
            for (k, w) in t.records.windows(2).enumerate() {
                let r = &w[1];
                if t.regime == Regime::B {
                    // the deviation from the wall value never grows
                    let growth = r.rho_dev_l2 - w[0].rho_dev_l2;
                    if growth > 1e-8 {
                        return Err(format!("step {}: |rho - rho_tilde| grew by {growth:e}", k + 1));
                    }
                    worst = worst.max(growth.max(0.0));
                } else {
                    let rate = (r.rho_mean - first.rho_mean).abs() / r.t;
                    if rate > 1e-10 {
                        return Err(format!("step {}: mean drifts at {rate:e} per unit time", k + 1));
                    }
                    worst = worst.max(rate);
                }
            }
            Ok(worst)
        },
        "worst drift rate or growth",
    )
}

pub fn c5() -> Result<Criterion, RunnerError> {
    over_suite(
        "C5",
        "constraint residuals",
        |t| {
            let mut worst: f64 = 0.0;
            for (k, r) in t.records.iter().enumerate() {
                let m = r.div_residual.max(r.div_free_residual);
                if !(m <= 1e-7) {
                    return Err(format!(
                        "step {k}: residuals {:e} and {:e}",
                        r.div_residual, r.div_free_residual
                    ));
                }
                worst = worst.max(m);
            }
            Ok(worst)
        },
        "largest residual",
    )
}

/// Gathers interior faces in the reference stepper's ordering.
fn gather(o: &Oracle, u: &VectorField) -> Vec<f64> {
    let g = u.grid;
    let mut out = vec![0.0; o.n_vel()];
    for j in 0..g.ny {
        for i in 1..g.nx {
            out[o.ix(i, j)] = u.x.at(i as isize, j as isize);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            out[o.iy(i, j)] = u.y.at(i as isize, j as isize);
        }
    }
    out
}

/// Unit density and a solenoidal swirl, consistent with the regime.
fn constant_density_state(grid: &Grid, params: &ModelParams, bc: &BoundarySpec) -> Result<FluidState, RunnerError> {
    let mut rho = ScalarField::constant(grid, Location::Center, 1.0);
    fill_density(&mut rho, params)?;
    let stream =
        ScalarField::from_fn(grid, Location::Corner, |x, y| 0.5 * (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
    let mut u = perp_gradient(&stream)?;
    apply_vector_bc(&mut u, bc)?;
    Ok(FluidState {
        t: 0.0,
        rho,
        u: u.clone(),
        pi: ScalarField::centers(grid),
        pi1: ScalarField::centers(grid),
        v: u,
        q: (grid.regime == Regime::C).then(|| VectorField::zeros(grid)),
    })
}

pub fn c6() -> Result<Criterion, RunnerError> {
    let (n, steps, dt, mu) = (12, 100, 0.01, 0.05);
    let mut ok = true;
    let mut parts = Vec::new();
    for regime in REGIMES {
        let grid = Grid::unit(n, regime)?;
        let friction = if regime == Regime::A { Friction::Constant(1.0) } else { Friction::Zero };
        let params = ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Constant(mu),
            alpha: 0.5,
            beta: 2.0,
            rho_tilde: 1.0,
            friction,
        };
        let bc = match regime {
            Regime::A => BoundarySpec::slip(friction),
            _ => BoundarySpec::NoSlip,
        };
        let factor = match regime {
            Regime::A => friction.ghost_factor(0.0, 0.0, grid.hx),
            _ => -1.0,
        };
        let state = constant_density_state(&grid, &params, &bc)?;
        let mut controls = crate::model::StepControls::new(dt);
        controls.pic_tol = 1e-12;
        let mut st = Stepper::new(state, controls, params, Default::default())?;
        let mut oracle = Oracle::new(n, n, 1.0, 1.0, mu, Walls { factor });
        let mut reference = gather(&oracle, &st.state.u);
        let mut worst: f64 = 0.0;
        let mut failure = None;
        for k in 1..=steps {
            if let Err(e) = st.step_towards(f64::MAX) {
                failure = Some(format!("step {k}: {e}"));
                break;
            }
            let used = st.state.t - st.prev.as_ref().map_or(0.0, |p| p.t);
            match oracle.step(&reference, used, 1e-13) {
                Some((next, _)) => reference = next,
                None => {
                    failure = Some(format!("reference step {k} did not converge"));
                    break;
                }
            }
            worst = worst.max(oracle.l2_diff(&gather(&oracle, &st.state.u), &reference));
        }
        let pass = failure.is_none() && worst <= 1e-9;
        ok &= pass;
        parts.push(match failure {
            Some(f) => format!("{regime} {f}"),
            None => format!("{regime} {worst:.1e}"),
        });
    }
    Ok(criterion(
        "C6",
        "constant-density reduction",
        ok,
        format!("max per-step L2 difference over {steps} steps: {}", parts.join(", ")),
    ))
}

pub fn c9() -> Result<Criterion, RunnerError> {
    let mut ok = true;
    let mut parts = Vec::new();
    for regime in REGIMES {
        let cfg = standard_config(regime, 32, 1e-3, 0.01);
        let mut state = initial_state(&cfg)?;
        let mut worst: f64 = 0.0;
        let mut its = 0;
        let mut failure = None;
        for k in 1..=10 {
            let (next, report) = match picard_step(&state, &cfg.controls, &cfg.params, None) {
                Ok(x) => x,
                Err(e) => {
                    failure = Some(format!("step {k}: {e}"));
                    break;
                }
            };
            let d = &report.deltas;
            its = its.max(d.len());
            // pairs (delta_k, delta_{k+1}) for k >= 2
            for w in d.windows(2).skip(1) {
                worst = worst.max(w[1] / w[0]);
            }
            state = next;
        }
        let pass = failure.is_none() && worst <= 0.6;
        ok &= pass;
        parts.push(match failure {
            Some(f) => format!("{regime} {f}"),
            None => format!("{regime} worst ratio {worst:.3} ({its} iterations at most)"),
        });
    }
    Ok(criterion("C9", "fixed-point contraction", ok, parts.join(", ")))
}

pub fn c11() -> Result<Criterion, RunnerError> {
    let mut problems = Vec::new();
    // monotone along every randomized trajectory
    match random_suite() {
        Ok(suite) => {
            for t in suite {
                for w in t.records.windows(2) {
                    let (a, b) = (&w[0], &w[1]);
                    if b.serrin_grad_rho < a.serrin_grad_rho || b.serrin_v < a.serrin_v || b.serrin_u < a.serrin_u {
                        problems.push(format!("{} seed {} decreases at t = {}", t.regime, t.seed, b.t));
                        break;
                    }
                }
            }
        }
        Err(e) => problems.push(format!("suite could not start: {e}")),
    }
    // frozen field: the integral grows linearly
    let cfg = standard_config(Regime::A, 16, 0.01, 0.1);
    let state = initial_state(&cfg)?;
    let mut worst_lin: f64 = 0.0;
    for target in SerrinTarget::ALL {
        let mut acc = SerrinAccumulator::new(4.0, 4.0, target).map_err(|e| RunnerError::Checkpoint(e.to_string()))?;
        let unit = acc.spatial_norm(&state).powi(4) * 0.1;
        for k in 1..=10 {
            acc.accumulate(&state, 0.1);
            let dev = (acc.integral - k as f64 * unit).abs() / unit.max(f64::MIN_POSITIVE);
            worst_lin = worst_lin.max(dev);
        }
    }
    if worst_lin > 1e-13 {
        problems.push(format!("frozen-field integral deviates from linear by {worst_lin:e}"));
    }
    // exponent rules
    let inf = f64::INFINITY;
    let rejected = [(2.0, 4.0), (2.0, inf), (4.0, 3.0), (inf, 1.0), (3.0, 5.0)];
    let accepted = [(4.0, 4.0), (3.0, 6.0), (inf, 2.0), (6.0, 3.0)];
    for (r, s) in rejected {
        if validate_exponents(r, s).is_ok() {
            problems.push(format!("({r}, {s}) accepted"));
        }
    }
    for (r, s) in accepted {
        if validate_exponents(r, s).is_err() {
            problems.push(format!("({r}, {s}) rejected"));
        }
    }
    let detail = match problems.first() {
        None => format!(
            "monotone on {} runs, linear to {worst_lin:.1e}, {} exponent pairs classified",
            3 * RUNS_PER_REGIME,
            rejected.len() + accepted.len()
        ),
        Some(p) => format!("{} problems; first: {p}", problems.len()),
    };
    Ok(criterion("C11", "space-time monitor sanity", problems.is_empty(), detail))
}

fn read(path: &std::path::Path) -> Result<Vec<u8>, RunnerError> {
    fs::read(path).map_err(RunnerError::io(format!("reading {}", path.display())))
}

fn reproducibility() -> Result<(bool, String), RunnerError> {
    let mut cfg = standard_config(Regime::C, 16, 0.01, 0.15);
    cfg.amplitude = 0.2;
    cfg.swirl = 0.05;
    cfg.checkpoint_every = 5;
    let dir_a = scratch_dir("repro")?;
    let dir_b = scratch_dir("repro")?;
    let mut problems = Vec::new();

    let mut ca = cfg.clone();
    ca.out_dir = dir_a.clone();
    let mut cb = cfg.clone();
    cb.out_dir = dir_b.clone();
    let sa = run(&ca)?;
    run(&cb)?;
    let table_a = read(&ca.csv_path())?;
    if table_a != read(&cb.csv_path())? {
        problems.push("two identical runs wrote different tables".to_string());
    }

    // restart from step 5 and redo the 10 steps after it
    let ck5 = dir_a.join("checkpoint_000005.mcck");
    let resumed = resume(&ck5, Some(&ca))?;
    if resumed.step_index != sa.step_index || read(&ca.csv_path())? != table_a {
        problems.push("resumed run differs from the uninterrupted one".to_string());
    }
    let final_a = Checkpoint::load(&dir_a.join("checkpoint_000015.mcck"))?;
    let final_b = Checkpoint::load(&dir_b.join("checkpoint_000015.mcck"))?;
    if final_a.state != final_b.state {
        problems.push("final states differ".to_string());
    }

    let mut other = ca.clone();
    other.params.c0 *= 1.5;
    match resume(&ck5, Some(&other)) {
        Err(RunnerError::HashMismatch) => {}
        Err(e) => problems.push(format!("mismatched config gave {e}")),
        Ok(_) => problems.push("mismatched config was accepted".to_string()),
    }

    let ck0 = Checkpoint::load(&dir_a.join("checkpoint_000000.mcck"))?;
    if ck0.state != initial_state(&ca)? || ck0.prev.is_some() {
        problems.push("t = 0 checkpoint does not reproduce the initial state".to_string());
    }

    let _ = fs::remove_dir_all(&dir_a);
    let _ = fs::remove_dir_all(&dir_b);
    let detail = match problems.first() {
        None => format!("{} steps reproduced, resume from step 5 byte-identical, hash mismatch refused", sa.step_index),
        Some(p) => p.clone(),
    };
    Ok((problems.is_empty(), detail))
}

pub fn c12() -> Result<Criterion, RunnerError> {
    let (ok, detail) = reproducibility()?;
    Ok(criterion("C12", "determinism and checkpointing", ok, detail))
}
