use super::{check_zero_mean, compat_tol, solve_stokes, EllipticError, SolveReport, SolverSettings};
use crate::grid::{BoundarySpec, Grid, Location, ScalarField, VectorField, WallTrace};

/// Zero-trace right inverse of the divergence: returns `Q` with
/// `divergence(Q) = f` and `Q = 0` on the walls.
pub fn bogovskii(f: &ScalarField, settings: &SolverSettings) -> Result<(VectorField, SolveReport), EllipticError> {
    f.expect(Location::Center)?;
    check_zero_mean(f, settings)?;
    let g = f.grid;
    let mu = ScalarField::constant(&g, Location::Center, 1.0);
    let s = solve_stokes(&mu, &VectorField::zeros(&g), f, &BoundarySpec::NoSlip, settings)?;
    Ok((s.velocity, s.report))
}

/// Divergence-free extension of a wall trace with zero net flux.
pub fn lift_boundary(
    grid: &Grid,
    trace: &WallTrace,
    settings: &SolverSettings,
) -> Result<(VectorField, SolveReport), EllipticError> {
    let flux = trace.net_flux(grid);
    let tol = compat_tol(settings, trace.max_normal() * grid.perimeter());
    if flux.abs() > tol {
        return Err(EllipticError::FluxMismatch { flux, tol });
    }
    let mu = ScalarField::constant(grid, Location::Center, 1.0);
    let bc = BoundarySpec::VelocityProfile(trace.clone());
    let s = solve_stokes(&mu, &VectorField::zeros(grid), &ScalarField::centers(grid), &bc, settings)?;
    Ok((s.velocity, s.report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{divergence, lp_norm, Regime};
    use std::f64::consts::PI;

    #[test]
    fn zero_data() {
        let g = Grid::unit(8, Regime::C).unwrap();
        let (q, _) = bogovskii(&ScalarField::centers(&g), &SolverSettings::default()).unwrap();
        assert_eq!(q.max_abs(), 0.0);
        let (r, _) = lift_boundary(&g, &WallTrace::zero(&g), &SolverSettings::default()).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn rejects_nonzero_mean_and_outflow() {
        let g = Grid::unit(8, Regime::C).unwrap();
        let one = ScalarField::constant(&g, Location::Center, 1.0);
        assert!(matches!(bogovskii(&one, &SolverSettings::default()), Err(EllipticError::Incompatible { .. })));
        let out = WallTrace::from_fn(&g, |x, _| (x, 0.0));
        assert!(matches!(
            lift_boundary(&g, &out, &SolverSettings::default()),
            Err(EllipticError::FluxMismatch { .. })
        ));
    }

    #[test]
    fn linearity() {
        let g = Grid::unit(16, Regime::C).unwrap();
        let st = SolverSettings::default();
        let f1 = ScalarField::from_fn(&g, Location::Center, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).sin());
        let f2 = ScalarField::from_fn(&g, Location::Center, |x, _| (PI * x).cos());
        let sum = f1.zip_with(&f2, |a, b| 2.0 * a - 3.0 * b).unwrap();
        let (q1, _) = bogovskii(&f1, &st).unwrap();
        let (q2, _) = bogovskii(&f2, &st).unwrap();
        let (qs, _) = bogovskii(&sum, &st).unwrap();
        let mut comb = q1.scaled(2.0);
        comb.axpy(-3.0, &q2);
        let d = comb.sub(&qs).max_abs();
        assert!(d < 1e-7, "{d}");
        let res = divergence(&qs).zip_with(&sum, |a, b| a - b).unwrap();
        assert!(lp_norm(&res, 2.0).unwrap() < 1e-8);
    }
}
