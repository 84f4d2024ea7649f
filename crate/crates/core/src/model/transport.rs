//! Backward-Euler mass step with frozen advector and diffusivity.
//!
//! Neumann regimes use the conservative flux form, so the discrete mean is
//! preserved exactly; the Dirichlet regime advances `log rho`.

use super::{ModelError, ModelParams};
use crate::elliptic::krylov::{bicgstab, wnorm, Stop};
use crate::elliptic::scalar_op::{Dir, FivePoint, WallKind};
use crate::elliptic::{SolveReport, SolverSettings};
use crate::grid::{apply_scalar_bc, BoundarySpec, Grid, Location, Regime, ScalarField, VectorField};

/// Cell Peclet number above which a face switches to upwinding.
const PECLET_SWITCH: f64 = 2.0;

/// Conservative transport operator `div(F rho) - c0 div(kappa grad rho)`,
/// `kappa` the face average of `1/phi`, zero flux at the walls.
pub fn conservative_operator(adv: &VectorField, phi: &ScalarField, c0: f64) -> FivePoint {
    let g = adv.grid;
    let mut op = FivePoint::zeros(&g);
    let kx = |i: usize, j: usize| {
        let (i, j) = (i as isize, j as isize);
        0.5 * (1.0 / phi.at(i - 1, j) + 1.0 / phi.at(i, j))
    };
    let ky = |i: usize, j: usize| {
        let (i, j) = (i as isize, j as isize);
        0.5 * (1.0 / phi.at(i, j - 1) + 1.0 / phi.at(i, j))
    };
    let mut dummy = vec![0.0; g.cell_count()];
    op.add_diffusion(&g, |i, j| c0 * kx(i, j), |i, j| c0 * ky(i, j), WallKind::Neumann, &mut dummy);
    let (nx, ny) = (g.nx, g.ny);
    for j in 0..ny {
        for i in 1..nx {
            let f = adv.x.at(i as isize, j as isize);
            let d = c0 * kx(i, j);
            let (l, r) = (op.idx(i - 1, j), op.idx(i, j));
            add_face_flux(&mut op, l, r, Dir::E, Dir::W, f / g.hx, f.abs() * g.hx / d);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let f = adv.y.at(i as isize, j as isize);
            let d = c0 * ky(i, j);
            let (b, t) = (op.idx(i, j - 1), op.idx(i, j));
            add_face_flux(&mut op, b, t, Dir::N, Dir::S, f / g.hy, f.abs() * g.hy / d);
        }
    }
    op
}

/// Flux `f * rho_face` leaving cell `a` into cell `b` (`f` already divided by h).
fn add_face_flux(op: &mut FivePoint, a: usize, b: usize, a_to_b: Dir, b_to_a: Dir, f: f64, peclet: f64) {
    if peclet <= PECLET_SWITCH {
        let h = 0.5 * f;
        op.add_diag(a, h);
        op.add_off(a, a_to_b, h);
        op.add_diag(b, -h);
        op.add_off(b, b_to_a, -h);
    } else if f > 0.0 {
        op.add_diag(a, f);
        op.add_off(b, b_to_a, -f);
    } else {
        op.add_off(a, a_to_b, f);
        op.add_diag(b, -f);
    }
}

/// Advective log-density operator `Phi . grad(l) - (c0/phi) laplacian(l)`
/// with Dirichlet wall value `g` folded into `rhs`.
pub fn log_operator(adv: &VectorField, phi: &ScalarField, c0: f64, wall: f64, rhs: &mut [f64]) -> FivePoint {
    let grid = adv.grid;
    let mut op = FivePoint::zeros(&grid);
    let (nx, ny) = (grid.nx, grid.ny);
    for j in 0..ny {
        for i in 0..nx {
            let k = op.idx(i, j);
            let (ii, jj) = (i as isize, j as isize);
            let (a1, a2) = adv.center_components(ii, jj);
            let diff = c0 / phi.at(ii, jj);
            let dirs = [
                (a1, grid.hx, i == 0, i + 1 == nx, Dir::W, Dir::E),
                (a2, grid.hy, j == 0, j + 1 == ny, Dir::S, Dir::N),
            ];
            for (a, h, lo_wall, hi_wall, lo, hi) in dirs {
                let kd = diff / (h * h);
                // (low neighbor, high neighbor) coefficients
                let (mut cl, mut cc, mut ch) = (-kd, 2.0 * kd, -kd);
                if a.abs() * h / diff <= PECLET_SWITCH {
                    cl -= 0.5 * a / h;
                    ch += 0.5 * a / h;
                } else if a > 0.0 {
                    cl -= a / h;
                    cc += a / h;
                } else {
                    ch += a / h;
                    cc -= a / h;
                }
                op.add_diag(k, cc);
                // ghost = 2 g - interior
                if lo_wall {
                    op.add_diag(k, -cl);
                    rhs[k] -= 2.0 * cl * wall;
                } else {
                    op.add_off(k, lo, cl);
                }
                if hi_wall {
                    op.add_diag(k, -ch);
                    rhs[k] -= 2.0 * ch * wall;
                } else {
                    op.add_off(k, hi, ch);
                }
            }
        }
    }
    op
}

fn solve_nonsym(op: &FivePoint, b: &[f64], x: &mut [f64], grid: &Grid, settings: &SolverSettings) -> SolveReport {
    let inv = op.jacobi();
    let stop = Stop {
        target: settings.target(wnorm(b, grid.cell_area())),
        max_iter: settings.iteration_cap(grid),
        weight: grid.cell_area(),
    };
    bicgstab(
        |v, y| op.apply(v, y),
        |r, z| {
            for k in 0..r.len() {
                z[k] = inv[k] * r[k];
            }
        },
        b,
        x,
        stop,
    )
}

/// One linearized mass step. `adv` is the frozen advector, `phi` the frozen
/// density in the diffusion coefficient (ghosts filled), `source` an
/// optional forcing of the density equation.
#[allow(clippy::too_many_arguments)]
pub fn mass_step_linearized(
    rho_old: &ScalarField,
    adv: &VectorField,
    phi: &ScalarField,
    dt: f64,
    regime: Regime,
    params: &ModelParams,
    settings: &SolverSettings,
    source: Option<&ScalarField>,
) -> Result<ScalarField, ModelError> {
    rho_old.expect(Location::Center)?;
    let grid = rho_old.grid;
    let (plo, _) = phi.min_max();
    if !(plo > 0.0) {
        return Err(ModelError::DensityFloor { min: plo, floor: 0.0 });
    }
    let n = grid.cell_count();
    let src = source.map(|s| s.interior_vec()).unwrap_or_else(|| vec![0.0; n]);
    let mut rho = match regime {
        Regime::A | Regime::C => {
            let mut op = conservative_operator(adv, phi, params.c0);
            let old = rho_old.interior_vec();
            let mut t_old = vec![0.0; n];
            op.apply(&old, &mut t_old);
            let b: Vec<f64> = (0..n).map(|k| src[k] - t_old[k]).collect();
            op.diag.iter_mut().for_each(|d| *d += 1.0 / dt);
            let mut delta = vec![0.0; n];
            let rep = solve_nonsym(&op, &b, &mut delta, &grid, settings);
            if !rep.converged {
                return Err(ModelError::Solver(crate::elliptic::EllipticError::NotConverged(rep)));
            }
            // the transport part has zero column sums, so spreading the mean
            // residual restores exact discrete conservation
            let mut ad = vec![0.0; n];
            op.apply(&delta, &mut ad);
            let r: Vec<f64> = (0..n).map(|k| b[k] - ad[k]).collect();
            let corr = dt * r.iter().sum::<f64>() / n as f64;
            let vals: Vec<f64> = (0..n).map(|k| old[k] + delta[k] + corr).collect();
            let mut out = ScalarField::centers(&grid);
            out.set_interior(&vals);
            out
        }
        Regime::B => {
            let wall = params.rho_tilde.ln();
            let mut b: Vec<f64> = vec![0.0; n];
            let mut op = log_operator(adv, phi, params.c0, wall, &mut b);
            let old: Vec<f64> = rho_old.interior_vec().iter().map(|r| r.ln()).collect();
            let ph = phi.interior_vec();
            for k in 0..n {
                b[k] += old[k] / dt + src[k] / ph[k];
                op.diag[k] += 1.0 / dt;
            }
            let mut l = old.clone();
            let rep = solve_nonsym(&op, &b, &mut l, &grid, settings);
            if !rep.converged {
                return Err(ModelError::Solver(crate::elliptic::EllipticError::NotConverged(rep)));
            }
            let vals: Vec<f64> = l.iter().map(|v| v.exp()).collect();
            let mut out = ScalarField::centers(&grid);
            out.set_interior(&vals);
            out
        }
    };
    let bc = match regime {
        Regime::B => BoundarySpec::DirichletConst(params.rho_tilde),
        _ => BoundarySpec::NeumannZero,
    };
    apply_scalar_bc(&mut rho, &bc)?;
    if !rho.all_finite() {
        return Err(ModelError::NonFinite("density"));
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Friction, Regime};
    use crate::model::MuLaw;
    use std::f64::consts::PI;

    fn params() -> ModelParams {
        ModelParams {
            c0: 0.05,
            mu_law: MuLaw::Constant(1.0),
            alpha: 1.0,
            beta: 2.0,
            rho_tilde: 1.5,
            friction: Friction::Zero,
        }
    }

    fn swirl(g: &Grid, amp: f64) -> VectorField {
        let psi = ScalarField::from_fn(g, Location::Corner, |x, y| amp * (PI * x).sin().powi(2) * (PI * y).sin().powi(2));
        crate::grid::perp_gradient(&psi).unwrap()
    }

    fn bumpy(g: &Grid, regime: Regime) -> ScalarField {
        let mut r = ScalarField::from_fn(g, Location::Center, |x, y| {
            1.5 + 0.45 * (3.0 * PI * x).cos() * (2.0 * PI * y).sin()
        });
        let bc = if regime == Regime::B { BoundarySpec::DirichletConst(1.5) } else { BoundarySpec::NeumannZero };
        apply_scalar_bc(&mut r, &bc).unwrap();
        r
    }

    #[test]
    fn constants_are_steady() {
        let g = Grid::unit(12, Regime::A).unwrap();
        let c = ScalarField::constant(&g, Location::Center, 1.3);
        let out = mass_step_linearized(&c, &VectorField::zeros(&g), &c, 0.01, Regime::A, &params(), &SolverSettings::default(), None)
            .unwrap();
        let (lo, hi) = out.min_max();
        assert!((lo - 1.3).abs() < 1e-14 && (hi - 1.3).abs() < 1e-14);
    }

    #[test]
    fn neumann_step_conserves_mean_and_bounds() {
        for regime in [Regime::A, Regime::C] {
            let g = Grid::unit(16, regime).unwrap();
            let rho = bumpy(&g, regime);
            let adv = swirl(&g, 3.0);
            let out = mass_step_linearized(&rho, &adv, &rho, 0.01, regime, &params(), &SolverSettings::default(), None).unwrap();
            assert!((out.mean() - rho.mean()).abs() < 1e-12);
            let (lo, hi) = out.min_max();
            assert!(lo >= 1.0 - 1e-10 && hi <= 2.0 + 1e-10);
            let op = conservative_operator(&adv, &rho, 0.05);
            assert!(op.is_m_matrix());
        }
    }

    #[test]
    fn log_step_respects_bounds() {
        let g = Grid::unit(16, Regime::B).unwrap();
        let rho = bumpy(&g, Regime::B);
        let adv = swirl(&g, 5.0);
        let out = mass_step_linearized(&rho, &adv, &rho, 0.02, Regime::B, &params(), &SolverSettings::default(), None).unwrap();
        let (lo, hi) = out.min_max();
        assert!(lo >= 1.0 - 1e-10 && hi <= 2.0 + 1e-10, "{lo} {hi}");
        let mut rhs = vec![0.0; g.cell_count()];
        assert!(log_operator(&adv, &rho, 0.05, 0.0, &mut rhs).is_m_matrix());
    }
}
