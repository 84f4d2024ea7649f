use super::{ModelError, ModelParams};
use crate::elliptic::{bogovskii, SolverSettings};
use crate::grid::{
    apply_scalar_bc, divergence, gradient_full, laplacian, lp_norm, BoundarySpec, Grid, Regime, ScalarField,
    VectorField,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub t: f64,
    /// Density at centers, ghosts filled under the regime's density condition.
    pub rho: ScalarField,
    /// Velocity, boundary faces and ghosts consistent with the regime.
    pub u: VectorField,
    /// Zero-mean pressure.
    pub pi: ScalarField,
    /// Modified pressure `pi - c0 (log rho)_t`.
    pub pi1: ScalarField,
    /// `u - c0 grad(1/rho)`.
    pub v: VectorField,
    /// Divergence correction (regime C only).
    pub q: Option<VectorField>,
}

impl FluidState {
    pub fn grid(&self) -> Grid {
        self.rho.grid
    }

    pub fn regime(&self) -> Regime {
        self.rho.grid.regime
    }

    /// `u - Q` in regime C.
    pub fn w(&self) -> Option<VectorField> {
        self.q.as_ref().map(|q| self.u.sub(q))
    }
}

pub fn density_bc(regime: Regime, params: &ModelParams) -> BoundarySpec {
    match regime {
        Regime::B => BoundarySpec::DirichletConst(params.rho_tilde),
        _ => BoundarySpec::NeumannZero,
    }
}

pub fn psi_bc(regime: Regime, params: &ModelParams) -> BoundarySpec {
    match regime {
        Regime::B => BoundarySpec::DirichletConst(1.0 / params.rho_tilde),
        _ => BoundarySpec::NeumannZero,
    }
}

pub fn fill_density(rho: &mut ScalarField, params: &ModelParams) -> Result<(), ModelError> {
    let regime = rho.grid.regime;
    apply_scalar_bc(rho, &density_bc(regime, params))?;
    Ok(())
}

/// `1/rho` with ghosts filled under the regime's condition for `1/rho`.
pub fn inverse_density(rho: &ScalarField, params: &ModelParams) -> Result<ScalarField, ModelError> {
    let mut psi = rho.map(|r| 1.0 / r);
    apply_scalar_bc(&mut psi, &psi_bc(rho.grid.regime, params))?;
    if rho.grid.regime == Regime::B {
        quadratic_wall_ghosts(&mut psi, 1.0 / params.rho_tilde);
    }
    Ok(psi)
}

/// Ghosts from the cubic through the wall value and the first three
/// interior cells, so the wall-normal difference is third order.
fn quadratic_wall_ghosts(f: &mut ScalarField, wall: f64) {
    let g = f.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    if nx < 3 || ny < 3 {
        return;
    }
    // written in deviations from the wall value so constants stay exact
    let ext = |a: f64, b: f64, c: f64| wall - 3.0 * (a - wall) + (b - wall) - 0.2 * (c - wall);
    for j in 0..ny {
        f.set(-1, j, ext(f.at(0, j), f.at(1, j), f.at(2, j)));
        f.set(nx, j, ext(f.at(nx - 1, j), f.at(nx - 2, j), f.at(nx - 3, j)));
    }
    for i in -1..=nx {
        f.set(i, -1, ext(f.at(i, 0), f.at(i, 1), f.at(i, 2)));
        f.set(i, ny, ext(f.at(i, ny - 1), f.at(i, ny - 2), f.at(i, ny - 3)));
    }
}

/// `c0 grad(1/rho)` over all stored faces.
pub fn c0_grad_psi(rho: &ScalarField, params: &ModelParams) -> Result<VectorField, ModelError> {
    let psi = inverse_density(rho, params)?;
    Ok(gradient_full(&psi)?.scaled(params.c0))
}

/// `c0 laplacian(1/rho)`.
pub fn c0_lap_psi(rho: &ScalarField, params: &ModelParams) -> Result<ScalarField, ModelError> {
    let psi = inverse_density(rho, params)?;
    Ok(divergence(&gradient_full(&psi)?).map(|v| params.c0 * v))
}

pub fn compute_v(state: &FluidState, params: &ModelParams) -> Result<VectorField, ModelError> {
    let (lo, _) = state.rho.min_max();
    if !(lo >= 0.5 * params.alpha) {
        return Err(ModelError::DensityFloor { min: lo, floor: 0.5 * params.alpha });
    }
    Ok(state.u.sub(&c0_grad_psi(&state.rho, params)?))
}

pub fn compute_q(state: &FluidState, params: &ModelParams, settings: &SolverSettings) -> Result<VectorField, ModelError> {
    let f = c0_lap_psi(&state.rho, params)?;
    let (q, _) = bogovskii(&f, settings)?;
    Ok(q)
}

/// `|| div u - c0 laplacian(1/rho) ||_2`.
pub fn residual_divergence_constraint(state: &FluidState, params: &ModelParams) -> f64 {
    let Ok(lap) = c0_lap_psi(&state.rho, params) else {
        return f64::INFINITY;
    };
    let r = divergence(&state.u).zip_with(&lap, |a, b| a - b);
    r.and_then(|r| lp_norm(&r, 2.0)).unwrap_or(f64::INFINITY)
}

/// Norm of the divergence of the solenoidal variable (`v` or `w`).
pub fn residual_solenoidal(state: &FluidState) -> f64 {
    let field = match &state.q {
        Some(q) => state.u.sub(q),
        None => state.v.clone(),
    };
    lp_norm(&divergence(&field), 2.0).unwrap_or(f64::INFINITY)
}

/// Laplacian of the density with the regime's ghosts.
pub fn density_laplacian(rho: &ScalarField, params: &ModelParams) -> Result<ScalarField, ModelError> {
    Ok(laplacian(rho, &density_bc(rho.grid.regime, params))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Friction, Location};
    use crate::model::MuLaw;

    #[test]
    fn dirichlet_ghosts_of_inverse_density_are_exact_for_quadratics() {
        let g = Grid::new(8, 6, 1.0, 0.75, Regime::B).unwrap();
        let params = ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Constant(1.0),
            alpha: 0.5,
            beta: 2.0,
            rho_tilde: 1.25,
            friction: Friction::Zero,
        };
        let psi = |x: f64, y: f64| 0.8 + 0.3 * x * (1.0 - x) * y * (0.75 - y);
        let rho = ScalarField::from_fn(&g, Location::Center, |x, y| 1.0 / psi(x, y));
        let out = inverse_density(&rho, &params).unwrap();
        let exact = ScalarField::from_fn(&g, Location::Center, |x, y| psi(x, y));
        for j in -1..=6 {
            for i in -1..=8 {
                assert!((out.at(i, j) - exact.at(i, j)).abs() < 1e-13, "{i} {j}");
            }
        }
    }
}
