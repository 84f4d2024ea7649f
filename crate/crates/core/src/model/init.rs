use super::state::{c0_grad_psi, c0_lap_psi, fill_density, inverse_density};
use super::{FluidState, ModelError, ModelParams};
use crate::elliptic::{bogovskii, solve_poisson, SolverSettings};
use crate::grid::{apply_vector_bc, divergence, BoundarySpec, Grid, Location, Regime, ScalarField, VectorField, WallTrace};

/// Uniform density at rest.
pub fn rest_state(grid: &Grid, rho: f64, params: &ModelParams) -> Result<FluidState, ModelError> {
    let mut r = ScalarField::constant(grid, Location::Center, rho);
    fill_density(&mut r, params)?;
    let zero = VectorField::zeros(grid);
    Ok(FluidState {
        t: 0.0,
        rho: r,
        u: zero.clone(),
        pi: ScalarField::centers(grid),
        pi1: ScalarField::centers(grid),
        v: zero.clone(),
        q: (grid.regime == Regime::C).then_some(zero),
    })
}

fn velocity_bc(regime: Regime, params: &ModelParams) -> BoundarySpec {
    match regime {
        Regime::A => BoundarySpec::slip(params.friction),
        _ => BoundarySpec::NoSlip,
    }
}

/// Mean of `1/(sigma + s)` over cells as a function of the shift `s`.
fn shift_for_mean(sigma: &[f64], mean_rho: f64) -> Option<f64> {
    let lo = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let n = sigma.len() as f64;
    let mut s = (1.0 / mean_rho).max(-lo + 1e-12);
    for _ in 0..100 {
        let (mut g, mut dg) = (0.0, 0.0);
        for x in sigma {
            let inv = 1.0 / (x + s);
            g += inv;
            dg -= inv * inv;
        }
        let (g, dg) = (g / n - mean_rho, dg / n);
        let mut step = -g / dg;
        // keep sigma + s positive
        while s + step <= -lo {
            step *= 0.5;
        }
        s += step;
        // Newton is quadratic, so a step this small leaves only rounding;
        // a tighter test can cycle on rounding noise for large grids
        if step.abs() <= 1e-13 * s.abs().max(1.0) {
            return Some(s);
        }
    }
    None
}

/// Builds a consistent state from an initial velocity by solving
/// `c0 laplacian(sigma) = div u0` and setting `rho0 = 1/(sigma + shift)`.
///
/// `level` is the prescribed mean density in the Neumann regimes; the
/// Dirichlet regime takes the wall value `rho_tilde` from `params`.
pub fn init_from_velocity(
    u0: &VectorField,
    params: &ModelParams,
    level: f64,
    settings: &SolverSettings,
) -> Result<FluidState, ModelError> {
    params.validate()?;
    let grid = u0.grid;
    let regime = grid.regime;
    let mut u = u0.clone();
    let trace = WallTrace::of_field(&u);
    let scale = 1.0 + u.max_abs();
    if regime != Regime::B && trace.max_normal() > 1e-8 * scale {
        return Err(ModelError::Compatibility(format!(
            "initial velocity has normal component {:e} on the walls",
            trace.max_normal()
        )));
    }
    let div_u = divergence(&u).map(|d| d / params.c0);
    let sigma = match regime {
        Regime::B => solve_poisson(&div_u, &BoundarySpec::DirichletConst(1.0 / params.rho_tilde), settings)?.0,
        _ => {
            let (s, _) = solve_poisson(&div_u, &BoundarySpec::NeumannZero, settings)
                .map_err(|e| ModelError::Compatibility(e.to_string()))?;
            let vals = s.interior_vec();
            let shift = shift_for_mean(&vals, level)
                .ok_or_else(|| ModelError::Compatibility("no positive density with the requested mean".into()))?;
            s.map(|x| x + shift)
        }
    };
    let (slo, _) = sigma.min_max();
    if !(slo > 0.0) {
        return Err(ModelError::InitialBounds { min: f64::NAN, max: f64::NAN });
    }
    let mut rho = sigma.map(|x| 1.0 / x);
    fill_density(&mut rho, params)?;
    let (lo, hi) = rho.min_max();
    if lo < params.alpha || hi > params.beta {
        return Err(ModelError::InitialBounds { min: lo, max: hi });
    }
    let _ = inverse_density(&rho, params)?;
    let gpsi = c0_grad_psi(&rho, params)?;
    let bc = velocity_bc(regime, params);
    let (u, v, q) = match regime {
        Regime::C => {
            apply_vector_bc(&mut u, &bc)?;
            let (q, _) = bogovskii(&c0_lap_psi(&rho, params)?, settings)?;
            let mut w = u.sub(&q);
            let (fix, _) = bogovskii(&divergence(&w), settings)?;
            w = w.sub(&fix);
            apply_vector_bc(&mut w, &bc)?;
            let u = w.add(&q);
            let v = u.sub(&gpsi);
            (u, v, Some(q))
        }
        Regime::A => {
            let shifted = BoundarySpec::SlipFriction {
                friction: params.friction,
                shift: Some(Box::new(gpsi.clone())),
            };
            apply_vector_bc(&mut u, &bc)?;
            let mut v = u.sub(&gpsi);
            let (fix, _) = bogovskii(&divergence(&v), settings)?;
            v = v.sub(&fix);
            apply_vector_bc(&mut v, &shifted)?;
            (v.add(&gpsi), v, None)
        }
        Regime::B => {
            let mut v = u.sub(&gpsi);
            apply_vector_bc(&mut v, &bc)?;
            let (fix, _) = bogovskii(&divergence(&v), settings)?;
            v = v.sub(&fix);
            apply_vector_bc(&mut v, &bc)?;
            (v.add(&gpsi), v, None)
        }
    };
    Ok(FluidState {
        t: 0.0,
        rho,
        u,
        pi: ScalarField::centers(&grid),
        pi1: ScalarField::centers(&grid),
        v,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, perp_gradient, Friction};
    use crate::model::MuLaw;
    use std::f64::consts::PI;

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

    #[test]
    fn zero_velocity_gives_uniform_density() {
        let g = Grid::unit(8, Regime::A).unwrap();
        let s = init_from_velocity(&VectorField::zeros(&g), &params(), 1.0, &SolverSettings::default()).unwrap();
        let (lo, hi) = s.rho.min_max();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
        assert_eq!(s.v.max_abs(), 0.0);
    }

    #[test]
    fn solenoidal_velocity_keeps_density_uniform() {
        let g = Grid::unit(16, Regime::C).unwrap();
        let psi = ScalarField::from_fn(&g, Location::Corner, |x, y| ((PI * x).sin() * (PI * y).sin()).powi(2));
        let u0 = perp_gradient(&psi).unwrap();
        let s = init_from_velocity(&u0, &params(), 1.0, &SolverSettings::default()).unwrap();
        let d = s.rho.map(|r| r - 1.0);
        assert!(lp_norm(&d, f64::INFINITY).unwrap() < 1e-10);
        assert!(s.v.sub(&u0).max_abs() < 1e-8);
    }

    #[test]
    fn out_of_range_density_is_rejected() {
        let g = Grid::unit(8, Regime::A).unwrap();
        let p = ModelParams { alpha: 1.5, beta: 2.0, rho_tilde: 1.5, ..params() };
        assert!(matches!(
            init_from_velocity(&VectorField::zeros(&g), &p, 1.0, &SolverSettings::default()),
            Err(ModelError::InitialBounds { .. })
        ));
    }
}
