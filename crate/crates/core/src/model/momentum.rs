//! Linearized momentum step in the solenoidal variable of each regime.

use super::state::{c0_grad_psi, c0_lap_psi, inverse_density};
use super::{FluidState, ModelError, ModelParams};
use crate::elliptic::{bogovskii, solve_stokes_with, viscous_operator, SolverSettings, StokesSystem};
use crate::grid::{apply_scalar_bc, BoundarySpec, Regime, ScalarField, VectorField};

/// Centered advective derivative `a . grad(u)` on interior faces.
pub fn advection(a: &VectorField, u: &VectorField) -> VectorField {
    let g = u.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let (tx, ty) = (0.5 / g.hx, 0.5 / g.hy);
    let mut out = VectorField::zeros(&g);
    for j in 0..ny {
        for i in 1..nx {
            let a1 = a.x.at(i, j);
            let a2 = 0.25 * (a.y.at(i - 1, j) + a.y.at(i, j) + a.y.at(i - 1, j + 1) + a.y.at(i, j + 1));
            let d1 = (u.x.at(i + 1, j) - u.x.at(i - 1, j)) * tx;
            let d2 = (u.x.at(i, j + 1) - u.x.at(i, j - 1)) * ty;
            out.x.set(i, j, a1 * d1 + a2 * d2);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let a1 = 0.25 * (a.x.at(i, j - 1) + a.x.at(i + 1, j - 1) + a.x.at(i, j) + a.x.at(i + 1, j));
            let a2 = a.y.at(i, j);
            let d1 = (u.y.at(i + 1, j) - u.y.at(i - 1, j)) * tx;
            let d2 = (u.y.at(i, j + 1) - u.y.at(i, j - 1)) * ty;
            out.y.set(i, j, a1 * d1 + a2 * d2);
        }
    }
    out
}

/// Arithmetic face average of a center field, on interior faces.
pub fn face_average(rho: &ScalarField) -> VectorField {
    let g = rho.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let mut out = VectorField::zeros(&g);
    for j in -1..=ny {
        for i in 0..=nx {
            out.x.set(i, j, 0.5 * (rho.at(i - 1, j) + rho.at(i, j)));
        }
    }
    for j in 0..=ny {
        for i in -1..=nx {
            out.y.set(i, j, 0.5 * (rho.at(i, j - 1) + rho.at(i, j)));
        }
    }
    out
}

/// Face-wise product of two vector fields.
fn hadamard(a: &VectorField, b: &VectorField) -> VectorField {
    let mut out = a.clone();
    out.x.data_mut().iter_mut().zip(b.x.data()).for_each(|(o, v)| *o *= v);
    out.y.data_mut().iter_mut().zip(b.y.data()).for_each(|(o, v)| *o *= v);
    out
}

#[derive(Debug, Clone)]
pub struct MomentumUpdate {
    pub u: VectorField,
    pub v: VectorField,
    pub q: Option<VectorField>,
    pub pi: ScalarField,
    pub pi1: ScalarField,
    pub stokes_iterations: usize,
}

/// Backward-Euler momentum solve for the new density `rho_new`, with the
/// advective term frozen at `a` (the previous Picard iterate).
///
/// Regimes A/B solve for `v = u - c0 grad(1/rho)` and the modified pressure;
/// regime C solves for `w = u - Q`. `source` is an optional momentum forcing.
#[allow(clippy::too_many_arguments)]
pub fn momentum_step_linearized(
    old: &FluidState,
    rho_new: &ScalarField,
    a: &VectorField,
    dt: f64,
    params: &ModelParams,
    settings: &SolverSettings,
    source: Option<&VectorField>,
    pressure_guess: Option<&ScalarField>,
) -> Result<MomentumUpdate, ModelError> {
    let grid = rho_new.grid;
    let regime = grid.regime;
    let mu = params.viscosity(rho_new);
    let rho_f = face_average(rho_new);
    let mass = rho_f.scaled(1.0 / dt);
    // -rho_f (a . grad) a  (+ forcing)
    let mut rhs = hadamard(&rho_f, &advection(a, a)).scaled(-1.0);
    if let Some(f) = source {
        rhs.axpy(1.0, f);
    }
    let log_rate = rho_new
        .zip_with(&old.rho, |n, o| params.c0 * (n.ln() - o.ln()) / dt)
        .map_err(ModelError::from)?;
    let ncell = grid.cell_count() as f64;
    match regime {
        Regime::A | Regime::B => {
            let gpsi = c0_grad_psi(rho_new, params)?;
            // rho_f v_old / dt - K(c0 grad psi) + c0 (psi_t)_f (grad rho)_f
            rhs.axpy(1.0, &hadamard(&mass, &old.v));
            rhs.axpy(-1.0, &viscous_operator(&mu, &gpsi));
            let psi_new = inverse_density(rho_new, params)?;
            let psi_old = inverse_density(&old.rho, params)?;
            let psi_t = psi_new.zip_with(&psi_old, |n, o| (n - o) / dt)?;
            let psi_t_f = face_average(&psi_t);
            let grad_rho = crate::grid::gradient_full(rho_new)?;
            rhs.axpy(params.c0, &hadamard(&psi_t_f, &grad_rho));
            let bc = match regime {
                Regime::A => BoundarySpec::SlipFriction {
                    friction: params.friction,
                    shift: Some(Box::new(gpsi.clone())),
                },
                _ => BoundarySpec::NoSlip,
            };
            let sys = StokesSystem { mu: &mu, mass: Some(&mass), bc: &bc };
            let zero = ScalarField::centers(&grid);
            let sol = solve_stokes_with(&sys, &rhs, &zero, pressure_guess, settings)?;
            let v = sol.velocity;
            let u = v.add(&gpsi);
            let pi1 = sol.pressure;
            let mut pi = pi1.zip_with(&log_rate, |p, l| p + l)?;
            let m = pi.interior_vec().iter().sum::<f64>() / ncell;
            pi.shift(-m);
            apply_scalar_bc(&mut pi, &BoundarySpec::NeumannZero)?;
            Ok(MomentumUpdate {
                u,
                v,
                q: None,
                pi,
                pi1,
                stokes_iterations: sol.report.iterations,
            })
        }
        Regime::C => {
            let f = c0_lap_psi(rho_new, params)?;
            let (q, _) = bogovskii(&f, settings)?;
            let q_old = match &old.q {
                Some(q) => q.clone(),
                None => return Err(ModelError::MissingCache("Q")),
            };
            let w_old = old.u.sub(&q_old);
            rhs.axpy(1.0, &hadamard(&mass, &w_old));
            rhs.axpy(-1.0, &hadamard(&mass, &q.sub(&q_old)));
            rhs.axpy(-1.0, &viscous_operator(&mu, &q));
            let bc = BoundarySpec::NoSlip;
            let sys = StokesSystem { mu: &mu, mass: Some(&mass), bc: &bc };
            let zero = ScalarField::centers(&grid);
            let sol = solve_stokes_with(&sys, &rhs, &zero, pressure_guess, settings)?;
            let u = sol.velocity.add(&q);
            let v = u.sub(&c0_grad_psi(rho_new, params)?);
            let pi = sol.pressure;
            let mut pi1 = pi.zip_with(&log_rate, |p, l| p - l)?;
            let m = pi1.interior_vec().iter().sum::<f64>() / ncell;
            pi1.shift(-m);
            apply_scalar_bc(&mut pi1, &BoundarySpec::NeumannZero)?;
            Ok(MomentumUpdate {
                u,
                v,
                q: Some(q),
                pi,
                pi1,
                stokes_iterations: sol.report.iterations,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Friction, Grid, Location};
    use crate::model::{MuLaw, StepControls};

    #[test]
    fn rest_state_stays_at_rest() {
        for regime in [Regime::A, Regime::B, Regime::C] {
            let g = Grid::unit(8, regime).unwrap();
            let params = ModelParams {
                c0: 0.1,
                mu_law: MuLaw::Constant(1.0),
                alpha: 1.0,
                beta: 2.0,
                rho_tilde: 1.2,
                friction: Friction::Constant(0.5),
            };
            let mut rho = ScalarField::constant(&g, Location::Center, 1.2);
            crate::model::state::fill_density(&mut rho, &params).unwrap();
            let st = crate::model::rest_state(&g, 1.2, &params).unwrap();
            let c = StepControls::new(0.01);
            let up = momentum_step_linearized(&st, &rho, &st.u, 0.01, &params, &c.solver, None, None).unwrap();
            assert!(up.u.max_abs() < 1e-14);
            assert!(crate::grid::lp_norm(&up.pi, f64::INFINITY).unwrap() < 1e-12);
        }
    }

    #[test]
    fn advection_of_linear_field_is_exact() {
        let g = Grid::unit(8, Regime::C).unwrap();
        let a = VectorField::from_fn(&g, |_, _| (2.0, -1.0));
        let u = VectorField::from_fn(&g, |x, y| (x + 3.0 * y, 0.5 * x));
        let n = advection(&a, &u);
        assert!((n.x.at(3, 3) - (2.0 - 3.0)).abs() < 1e-12);
        assert!((n.y.at(3, 3) - 1.0).abs() < 1e-12);
    }
}
