use super::momentum::momentum_step_linearized;
use super::state::{c0_grad_psi, residual_divergence_constraint, residual_solenoidal};
use super::transport::mass_step_linearized;
use super::{FluidState, Forcing, ModelError, ModelParams, StepControls};
use crate::grid::{gradient_full, inner_scalar, inner_vector, ScalarField, VectorField};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PicardReport {
    pub iterations: usize,
    pub deltas: Vec<f64>,
    pub converged: bool,
}

/// Discrete `H^1` norm of a center field whose ghosts are already filled.
pub fn h1_norm(f: &ScalarField) -> f64 {
    let l2 = inner_scalar(f, f).unwrap_or(f64::NAN);
    let g = gradient_full(f).map(|g| inner_vector(&g, &g).unwrap_or(f64::NAN)).unwrap_or(f64::NAN);
    (l2 + g).sqrt()
}

pub fn vector_l2(v: &VectorField) -> f64 {
    inner_vector(v, v).unwrap_or(f64::NAN).sqrt()
}

/// `|| rho_a - rho_b ||_{H^1,h} + || u_a - u_b ||_2`.
pub fn iterate_delta(rho_a: &ScalarField, u_a: &VectorField, rho_b: &ScalarField, u_b: &VectorField) -> f64 {
    let dr = rho_a.zip_with(rho_b, |a, b| a - b).expect("same grid");
    h1_norm(&dr) + vector_l2(&u_a.sub(u_b))
}

/// One time step by fixed-point iteration on the frozen-coefficient
/// problem, started from the previous time level.
pub fn picard_step(
    state: &FluidState,
    controls: &StepControls,
    params: &ModelParams,
    forcing: Option<&dyn Forcing>,
) -> Result<(FluidState, PicardReport), ModelError> {
    controls.validate()?;
    let dt = controls.dt;
    let grid = state.grid();
    let regime = grid.regime;
    let t_new = state.t + dt;
    let f_mass = forcing.and_then(|f| f.mass(&grid, t_new));
    let f_mom = forcing.and_then(|f| f.momentum(&grid, t_new));
    let mut rho_prev = state.rho.clone();
    let mut u_prev = state.u.clone();
    let mut pressure_guess = match regime {
        crate::grid::Regime::C => state.pi.clone(),
        _ => state.pi1.clone(),
    };
    let mut report = PicardReport::default();
    let mut last = None;
    for k in 1..=controls.pic_max {
        let adv = u_prev.sub(&c0_grad_psi(&rho_prev, params)?);
        let rho = mass_step_linearized(
            &state.rho,
            &adv,
            &rho_prev,
            dt,
            regime,
            params,
            &controls.solver,
            f_mass.as_ref(),
        )?;
        let up = momentum_step_linearized(
            state,
            &rho,
            &u_prev,
            dt,
            params,
            &controls.solver,
            f_mom.as_ref(),
            Some(&pressure_guess),
        )?;
        let delta = iterate_delta(&rho, &up.u, &rho_prev, &u_prev);
        report.iterations = k;
        report.deltas.push(delta);
        if !delta.is_finite() {
            return Err(ModelError::PicardDiverged(report.deltas));
        }
        pressure_guess = match regime {
            crate::grid::Regime::C => up.pi.clone(),
            _ => up.pi1.clone(),
        };
        rho_prev = rho;
        u_prev = up.u.clone();
        last = Some(up);
        if delta <= controls.pic_tol {
            report.converged = true;
            break;
        }
        // clear blow-up of the iteration: stop early
        if k >= 3 && delta > 1e3 * report.deltas[0] {
            return Err(ModelError::PicardDiverged(report.deltas));
        }
    }
    if !report.converged {
        return Err(ModelError::PicardDiverged(report.deltas));
    }
    let up = last.expect("at least one iteration");
    let new = FluidState {
        t: t_new,
        rho: rho_prev,
        u: up.u,
        pi: up.pi,
        pi1: up.pi1,
        v: up.v,
        q: up.q,
    };
    let slack = 10.0 * controls.pic_tol;
    let (lo, hi) = new.rho.min_max();
    if lo < params.alpha - slack || hi > params.beta + slack {
        return Err(ModelError::BoundsViolated { min: lo, max: hi });
    }
    let rc = residual_divergence_constraint(&new, params);
    let rs = residual_solenoidal(&new);
    if !(rc <= controls.constraint_tol && rs <= controls.constraint_tol) {
        return Err(ModelError::ConstraintViolated(rc.max(rs)));
    }
    Ok((new, report))
}
