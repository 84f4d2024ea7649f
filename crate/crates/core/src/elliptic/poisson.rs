use super::krylov::{pcg, remove_mean, Stop};
use super::scalar_op::{field_from_cells, FivePoint, WallKind};
use super::{EllipticError, SolveReport, SolverSettings};
use crate::grid::{apply_scalar_bc, lp_norm, BoundarySpec, Grid, Location, ScalarField};

pub(crate) fn wall_kind(bc: &BoundarySpec) -> Result<WallKind, EllipticError> {
    match bc {
        BoundarySpec::NeumannZero => Ok(WallKind::Neumann),
        BoundarySpec::DirichletConst(g) => Ok(WallKind::Dirichlet(*g)),
        other => Err(EllipticError::UnsupportedBc(other.name())),
    }
}

/// Tolerance on the mean of Neumann data.
pub(crate) fn compat_tol(settings: &SolverSettings, scale: f64) -> f64 {
    settings.abs_tol.max(settings.rel_tol * scale)
}

/// Checks `<f, 1> = 0` (as a mean, relative to `max|f|`).
pub fn check_zero_mean(f: &ScalarField, settings: &SolverSettings) -> Result<(), EllipticError> {
    let mean = f.mean();
    let scale = lp_norm(f, f64::INFINITY).unwrap_or(0.0);
    let tol = compat_tol(settings, scale);
    if mean.abs() > tol {
        Err(EllipticError::Incompatible { mean, tol })
    } else {
        Ok(())
    }
}

/// Solves `laplacian(sol) = rhs` on cell centers. Neumann solutions are
/// returned with zero mean; ghosts of the result are filled under `bc`.
pub fn solve_poisson(
    rhs: &ScalarField,
    bc: &BoundarySpec,
    settings: &SolverSettings,
) -> Result<(ScalarField, SolveReport), EllipticError> {
    solve_poisson_from(rhs, bc, settings, None)
}

/// As [`solve_poisson`], starting from `guess`.
pub fn solve_poisson_from(
    rhs: &ScalarField,
    bc: &BoundarySpec,
    settings: &SolverSettings,
    guess: Option<&ScalarField>,
) -> Result<(ScalarField, SolveReport), EllipticError> {
    rhs.expect(Location::Center)?;
    let grid = rhs.grid;
    let wall = wall_kind(bc)?;
    let neumann = wall == WallKind::Neumann;
    if neumann {
        check_zero_mean(rhs, settings)?;
    }
    let mut b: Vec<f64> = rhs.interior_vec().iter().map(|v| -v).collect();
    if neumann {
        remove_mean(&mut b);
    }
    let mut op = FivePoint::zeros(&grid);
    op.add_diffusion(&grid, |_, _| 1.0, |_, _| 1.0, wall, &mut b);
    let mut x = match guess {
        Some(g) => {
            g.expect(Location::Center)?;
            g.interior_vec()
        }
        None => vec![0.0; op.len()],
    };
    let report = solve_assembled(&op, &b, &mut x, neumann, &grid, settings, rhs_norm(rhs, neumann));
    finish(&grid, &x, bc, report)
}

fn rhs_norm(rhs: &ScalarField, neumann: bool) -> f64 {
    let mut r = rhs.clone();
    if neumann {
        r.shift(-rhs.mean());
    }
    lp_norm(&r, 2.0).unwrap_or(0.0)
}

/// Jacobi-preconditioned CG on an assembled symmetric operator.
pub(crate) fn solve_assembled(
    op: &FivePoint,
    b: &[f64],
    x: &mut [f64],
    neumann: bool,
    grid: &Grid,
    settings: &SolverSettings,
    b_norm: f64,
) -> SolveReport {
    let inv = op.jacobi();
    let stop = Stop {
        target: settings.target(b_norm),
        max_iter: settings.iteration_cap(grid),
        weight: grid.cell_area(),
    };
    pcg(
        |v, y| op.apply(v, y),
        |r, z| {
            for k in 0..r.len() {
                z[k] = inv[k] * r[k];
            }
        },
        b,
        x,
        stop,
        neumann,
    )
}

fn finish(
    grid: &Grid,
    x: &[f64],
    bc: &BoundarySpec,
    report: SolveReport,
) -> Result<(ScalarField, SolveReport), EllipticError> {
    if !report.converged {
        return Err(EllipticError::NotConverged(report));
    }
    let mut sol = field_from_cells(grid, x);
    apply_scalar_bc(&mut sol, bc)?;
    Ok((sol, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{laplacian, Regime};
    use std::f64::consts::PI;

    #[test]
    fn zero_rhs_gives_zero() {
        let g = Grid::unit(16, Regime::A).unwrap();
        let (s, rep) = solve_poisson(&ScalarField::centers(&g), &BoundarySpec::NeumannZero, &SolverSettings::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(lp_norm(&s, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn constant_neumann_data_is_rejected() {
        let g = Grid::unit(8, Regime::A).unwrap();
        let one = ScalarField::constant(&g, Location::Center, 1.0);
        let err = solve_poisson(&one, &BoundarySpec::NeumannZero, &SolverSettings::default()).unwrap_err();
        assert!(matches!(err, EllipticError::Incompatible { .. }));
    }

    #[test]
    fn dirichlet_sine_converges_at_second_order() {
        let err = |n: usize| {
            let g = Grid::unit(n, Regime::B).unwrap();
            let k = 2.0 * PI;
            let rhs = ScalarField::from_fn(&g, Location::Center, |x, y| -2.0 * k * k * (k * x).sin() * (k * y).sin());
            let (s, _) = solve_poisson(&rhs, &BoundarySpec::DirichletConst(0.0), &SolverSettings::default()).unwrap();
            let exact = ScalarField::from_fn(&g, Location::Center, |x, y| (k * x).sin() * (k * y).sin());
            lp_norm(&s.zip_with(&exact, |a, b| a - b).unwrap(), 2.0).unwrap()
        };
        let (e1, e2) = (err(32), err(64));
        assert!((e1 / e2).log2() > 1.9, "{e1} {e2}");
    }

    #[test]
    fn residual_bound_holds_on_recomputation() {
        let g = Grid::new(24, 16, 1.5, 1.0, Regime::A).unwrap();
        let rhs = ScalarField::from_fn(&g, Location::Center, |x, y| (PI * x / 1.5).cos() * (2.0 * PI * y).cos());
        let st = SolverSettings::default();
        let (s, rep) = solve_poisson(&rhs, &BoundarySpec::NeumannZero, &st).unwrap();
        let r = laplacian(&s, &BoundarySpec::NeumannZero).unwrap().zip_with(&rhs, |a, b| a - b).unwrap();
        let bound = st.target(lp_norm(&rhs, 2.0).unwrap());
        assert!(lp_norm(&r, 2.0).unwrap() <= bound * 1.01, "{rep:?}");
        assert!(s.mean().abs() < 1e-13);
    }

    #[test]
    fn neumann_solution_ignores_constant_in_guess() {
        let g = Grid::unit(16, Regime::C).unwrap();
        let rhs = ScalarField::from_fn(&g, Location::Center, |x, y| (PI * x).cos() + (PI * y).cos());
        let st = SolverSettings::default();
        let (a, _) = solve_poisson(&rhs, &BoundarySpec::NeumannZero, &st).unwrap();
        let guess = ScalarField::constant(&g, Location::Center, 5.0);
        let (b, _) = solve_poisson_from(&rhs, &BoundarySpec::NeumannZero, &st, Some(&guess)).unwrap();
        let d = a.zip_with(&b, |x, y| x - y).unwrap();
        assert!(lp_norm(&d, f64::INFINITY).unwrap() < 1e-9);
    }
}
