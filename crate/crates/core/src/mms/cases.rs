//! Catalog of manufactured solutions.
//!
//! Every case is built from a density `rho*`, a stream function `s*` and a
//! pressure `pi*`, with velocity `u* = c0 grad(1/rho*) + perp_grad(s*)` so
//! that `div u* = c0 lap(1/rho*)` holds identically. The forcings are the
//! residuals of the mass and momentum equations at the exact fields:
//!
//! * `f_mass = rho_t + u . grad(rho) + rho div(u)`
//! * `f_mom = rho (u_t + (u . grad) u) - mu (lap u + grad div u)
//!   - mu'(rho) (grad(u) + grad(u)^T) grad(rho) + grad(pi)`
//!
//! where the viscous term expands `div(2 mu D(u))` with `mu = mu(rho)`.
//! Derivatives of `1/rho` follow from the chain rule in [`Jet::compose`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::fields::{Jet, VelocityJet, Wave};
use super::MmsError;
use crate::grid::{
    apply_scalar_bc, apply_vector_bc, gradient_full, inner_vector, lp_norm, perp_gradient, BoundarySpec, Friction,
    Grid, Location, Regime, ScalarField, VectorField,
};
use crate::model::state::{fill_density, inverse_density};
use crate::model::{FluidState, Forcing, ModelParams, MuLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    ConstDensityTaylorGreen,
    DiffusingBumpNeumann,
    DirichletRelax,
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [CaseId::ConstDensityTaylorGreen, CaseId::DiffusingBumpNeumann, CaseId::DirichletRelax];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::ConstDensityTaylorGreen => "const_density_taylor_green",
            CaseId::DiffusingBumpNeumann => "diffusing_bump_neumann",
            CaseId::DirichletRelax => "dirichlet_relax",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = MmsError;
    fn from_str(s: &str) -> Result<Self, MmsError> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| MmsError::UnknownCase(s.to_string()))
    }
}

/// A manufactured solution on the box `[0, lx] x [0, ly]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub id: CaseId,
    pub regime: Regime,
    pub params: ModelParams,
    pub lx: f64,
    pub ly: f64,
    /// Density perturbation amplitude and its decay rate.
    pub amp: f64,
    pub decay: f64,
    /// Stream function amplitude, decaying like `exp(-t)`.
    pub swirl: f64,
    /// Pressure amplitude, decaying like `exp(-t)`.
    pub press: f64,
}

pub fn manufactured_case(id: &str) -> Result<ManufacturedCase, MmsError> {
    Ok(ManufacturedCase::new(id.parse()?))
}

impl ManufacturedCase {
    pub fn new(id: CaseId) -> Self {
        let base = ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Affine(0.5, 0.5),
            alpha: 0.5,
            beta: 2.0,
            rho_tilde: 1.0,
            friction: Friction::Zero,
        };
        match id {
            // rho = 1, u = exp(-t) (sin(pi x) cos(pi y), -cos(pi x) sin(pi y))
            CaseId::ConstDensityTaylorGreen => ManufacturedCase {
                id,
                regime: Regime::A,
                params: ModelParams { mu_law: MuLaw::Constant(1.0), ..base },
                lx: 1.0,
                ly: 1.0,
                amp: 0.0,
                decay: 0.0,
                swirl: 1.0 / PI,
                press: 0.5,
            },
            // rho = 1 + a exp(-t) cos(pi x) cos(pi y): zero normal derivative
            CaseId::DiffusingBumpNeumann => ManufacturedCase {
                id,
                regime: Regime::A,
                params: base,
                lx: 1.0,
                ly: 1.0,
                amp: 0.2,
                decay: 1.0,
                swirl: 0.1,
                press: 0.5,
            },
            // rho = 1 + a exp(-t) sin(pi x) sin(pi y): equals rho_tilde on the walls
            CaseId::DirichletRelax => ManufacturedCase {
                id,
                regime: Regime::B,
                params: base,
                lx: 1.0,
                ly: 1.0,
                amp: 0.05,
                decay: 1.0,
                swirl: 0.1,
                press: 0.5,
            },
        }
    }

    /// Same fields rescaled to another box.
    pub fn on_box(mut self, lx: f64, ly: f64) -> Self {
        self.lx = lx;
        self.ly = ly;
        self
    }

    pub fn grid(&self, nx: usize, ny: usize) -> Result<Grid, MmsError> {
        Ok(Grid::new(nx, ny, self.lx, self.ly, self.regime)?)
    }

    fn k(&self) -> (f64, f64) {
        (PI / self.lx, PI / self.ly)
    }

    pub fn rho(&self, x: f64, y: f64, t: f64) -> Jet {
        let (kx, ky) = self.k();
        let a = self.amp * (-self.decay * t).exp();
        let w = match self.regime {
            Regime::B => Wave::Sin,
            _ => Wave::Cos,
        };
        let base = match self.regime {
            Regime::B => self.params.rho_tilde,
            _ => 1.0,
        };
        Jet::constant(base) + Jet::separable(a, -self.decay * a, w, kx, w, ky, x, y)
    }

    pub fn stream(&self, x: f64, y: f64, t: f64) -> Jet {
        let (kx, ky) = self.k();
        let a = self.swirl * (-t).exp();
        match self.regime {
            // sin^2 sin^2 = (1 - cos 2kx)(1 - cos 2ky) / 4: zero trace and zero normal derivative
            Regime::B => {
                let q = 0.25 * a;
                let term = |c: f64, kx: f64, ky: f64| Jet::separable(c * q, -c * q, Wave::Cos, kx, Wave::Cos, ky, x, y);
                term(1.0, 0.0, 0.0) + term(-1.0, 2.0 * kx, 0.0) + term(-1.0, 0.0, 2.0 * ky) + term(1.0, 2.0 * kx, 2.0 * ky)
            }
            _ => Jet::separable(a, -a, Wave::Sin, kx, Wave::Sin, ky, x, y),
        }
    }

    /// `(pi, d_x pi, d_y pi)`; zero mean over the box.
    pub fn pressure(&self, x: f64, y: f64, t: f64) -> (f64, f64, f64) {
        let (kx, ky) = self.k();
        let p = Jet::separable(self.press * (-t).exp(), 0.0, Wave::Cos, kx, Wave::Cos, ky, x, y);
        (p.v, p.x, p.y)
    }

    pub fn velocity(&self, x: f64, y: f64, t: f64) -> VelocityJet {
        let psi = self.rho(x, y, t).recip();
        VelocityJet::new(self.params.c0, &psi, &self.stream(x, y, t))
    }

    pub fn f_mass(&self, x: f64, y: f64, t: f64) -> f64 {
        let r = self.rho(x, y, t);
        let u = self.velocity(x, y, t);
        r.t + u.u[0] * r.x + u.u[1] * r.y + r.v * u.div()
    }

    pub fn f_mom(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let r = self.rho(x, y, t);
        let u = self.velocity(x, y, t);
        let (_, px, py) = self.pressure(x, y, t);
        let mu = self.params.mu_law.value(r.v);
        let dmu = self.params.mu_law.derivative(r.v);
        let gr = [r.x, r.y];
        let gp = [px, py];
        let mut f = [0.0; 2];
        for i in 0..2 {
            let adv = u.u[0] * u.du[i][0] + u.u[1] * u.du[i][1];
            let strain: f64 = (0..2).map(|j| gr[j] * (u.du[i][j] + u.du[j][i])).sum();
            f[i] = r.v * (u.ut[i] + adv) - mu * (u.lap[i] + u.grad_div[i]) - dmu * strain + gp[i];
        }
        f
    }

    /// Discrete state sampled from the exact fields at time `t`.
    ///
    /// The solenoidal part comes from the stream function at corners, so the
    /// discrete divergence constraint holds to rounding.
    pub fn state_at(&self, grid: &Grid, t: f64) -> Result<FluidState, MmsError> {
        if grid.regime != self.regime {
            return Err(MmsError::RegimeMismatch { case: self.regime, grid: grid.regime });
        }
        let p = &self.params;
        let mut rho = ScalarField::from_fn(grid, Location::Center, |x, y| self.rho(x, y, t).v);
        fill_density(&mut rho, p)?;
        let sf = ScalarField::from_fn(grid, Location::Corner, |x, y| self.stream(x, y, t).v);
        let mut v = perp_gradient(&sf)?;
        let gpsi = gradient_full(&inverse_density(&rho, p)?)?.scaled(p.c0);
        let bc = match self.regime {
            Regime::A => BoundarySpec::SlipFriction { friction: p.friction, shift: Some(Box::new(gpsi.clone())) },
            _ => BoundarySpec::NoSlip,
        };
        apply_vector_bc(&mut v, &bc)?;
        let u = v.add(&gpsi);
        let mut pi = ScalarField::from_fn(grid, Location::Center, |x, y| self.pressure(x, y, t).0);
        let m = pi.interior_vec().iter().sum::<f64>() / grid.cell_count() as f64;
        pi.shift(-m);
        apply_scalar_bc(&mut pi, &BoundarySpec::NeumannZero)?;
        Ok(FluidState { t, rho, u, pi: pi.clone(), pi1: pi, v, q: None })
    }

    /// `L^2` errors of `(rho, u, pi)` against the exact fields at `state.t`.
    ///
    /// Velocity errors are taken over interior faces, where every scheme
    /// value is a centered approximation; pressure is compared up to its mean.
    pub fn errors(&self, state: &FluidState) -> Result<[f64; 3], MmsError> {
        let grid = state.grid();
        let t = state.t;
        let exact_rho = ScalarField::from_fn(&grid, Location::Center, |x, y| self.rho(x, y, t).v);
        let e_rho = lp_norm(&state.rho.zip_with(&exact_rho, |a, b| a - b)?, 2.0)?;
        let exact_u = VectorField::from_fn(&grid, |x, y| {
            let u = self.velocity(x, y, t).u;
            (u[0], u[1])
        });
        let mut du = state.u.sub(&exact_u);
        let (nx, ny) = (grid.nx as isize, grid.ny as isize);
        for j in -1..=ny {
            du.x.set(0, j, 0.0);
            du.x.set(nx, j, 0.0);
        }
        for i in -1..=nx {
            du.y.set(i, 0, 0.0);
            du.y.set(i, ny, 0.0);
        }
        let e_u = inner_vector(&du, &du)?.sqrt();
        let mut exact_pi = ScalarField::from_fn(&grid, Location::Center, |x, y| self.pressure(x, y, t).0);
        let m = exact_pi.interior_vec().iter().sum::<f64>() / grid.cell_count() as f64;
        exact_pi.shift(-m);
        let mut dp = state.pi.zip_with(&exact_pi, |a, b| a - b)?;
        let m = dp.interior_vec().iter().sum::<f64>() / grid.cell_count() as f64;
        dp.shift(-m);
        let e_pi = lp_norm(&dp, 2.0)?;
        Ok([e_rho, e_u, e_pi])
    }

    pub fn forcing(&self) -> CaseForcing {
        CaseForcing { case: *self }
    }
}

/// Forcing of a manufactured case sampled on the grid.
#[derive(Debug, Clone, Copy)]
pub struct CaseForcing {
    pub case: ManufacturedCase,
}

impl Forcing for CaseForcing {
    fn mass(&self, grid: &Grid, t: f64) -> Option<ScalarField> {
        Some(ScalarField::from_fn(grid, Location::Center, |x, y| self.case.f_mass(x, y, t)))
    }

    fn momentum(&self, grid: &Grid, t: f64) -> Option<VectorField> {
        Some(VectorField::from_fn(grid, |x, y| {
            let f = self.case.f_mom(x, y, t);
            (f[0], f[1])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_lookup() {
        for id in CaseId::ALL {
            assert_eq!(manufactured_case(id.name()).unwrap().id, id);
        }
        assert!(matches!(manufactured_case("vortex_street"), Err(MmsError::UnknownCase(_))));
    }

    #[test]
    fn taylor_green_is_uncoupled() {
        let c = ManufacturedCase::new(CaseId::ConstDensityTaylorGreen);
        for &(x, y) in &[(0.1, 0.2), (0.7, 0.4)] {
            assert_eq!(c.f_mass(x, y, 0.3), 0.0);
            let u = c.velocity(x, y, 0.3);
            assert!(u.div().abs() < 1e-15);
            let e = (-0.3f64).exp();
            assert!((u.u[0] - e * (PI * x).sin() * (PI * y).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn traces_hold_exactly() {
        for id in CaseId::ALL {
            let c = ManufacturedCase::new(id).on_box(2.0, 1.0);
            let t = 0.37;
            for k in 0..=64 {
                let s = k as f64 / 64.0;
                for (x, y, nx, ny) in [(2.0 * s, 0.0, 0.0, -1.0), (2.0 * s, 1.0, 0.0, 1.0), (0.0, s, -1.0, 0.0), (2.0, s, 1.0, 0.0)] {
                    let r = c.rho(x, y, t);
                    let u = c.velocity(x, y, t);
                    match c.regime {
                        Regime::B => {
                            assert!((r.v - c.params.rho_tilde).abs() < 1e-12);
                            // u equals c0 grad(1/rho) on the wall
                            let psi = r.recip();
                            assert!((u.u[0] - c.params.c0 * psi.x).abs() < 1e-12);
                            assert!((u.u[1] - c.params.c0 * psi.y).abs() < 1e-12);
                        }
                        _ => {
                            assert!((r.x * nx + r.y * ny).abs() < 1e-12);
                            assert!((u.u[0] * nx + u.u[1] * ny).abs() < 1e-12);
                            // free slip: zero wall curl
                            assert!((u.du[1][0] - u.du[0][1]).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn density_stays_in_bounds() {
        for id in CaseId::ALL {
            let c = ManufacturedCase::new(id);
            for k in 0..=20 {
                let (x, y) = (k as f64 / 20.0, (20 - k) as f64 / 20.0 * 0.9);
                let r = c.rho(x, y, 0.0).v;
                assert!(r >= c.params.alpha && r <= c.params.beta);
            }
        }
    }

    #[test]
    fn sampled_state_satisfies_constraint() {
        for id in CaseId::ALL {
            let c = ManufacturedCase::new(id);
            let g = c.grid(16, 16).unwrap();
            let s = c.state_at(&g, 0.0).unwrap();
            assert!(crate::model::residual_divergence_constraint(&s, &c.params) < 1e-12);
            assert!(crate::model::residual_solenoidal(&s) < 1e-12);
        }
    }

    #[test]
    fn discrete_residual_matches_forcing() {
        // mass equation residual of the sampled exact fields shrinks like h^2
        let c = ManufacturedCase::new(CaseId::DiffusingBumpNeumann);
        let err = |n: usize| {
            let g = c.grid(n, n).unwrap();
            let t = 0.2;
            let s = c.state_at(&g, t).unwrap();
            let eps = 1e-6;
            let s2 = c.state_at(&g, t + eps).unwrap();
            let s1 = c.state_at(&g, t - eps).unwrap();
            let rho_t = s2.rho.zip_with(&s1.rho, |a, b| (a - b) / (2.0 * eps)).unwrap();
            // div(rho u) with face-averaged density
            let rf = crate::model::face_average(&s.rho);
            let mut flux = s.u.clone();
            flux.x.data_mut().iter_mut().zip(rf.x.data()).for_each(|(a, r)| *a *= r);
            flux.y.data_mut().iter_mut().zip(rf.y.data()).for_each(|(a, r)| *a *= r);
            let div = crate::grid::divergence(&flux);
            let f = ScalarField::from_fn(&g, Location::Center, |x, y| c.f_mass(x, y, t));
            let r = rho_t.zip_with(&div, |a, b| a + b).unwrap().zip_with(&f, |a, b| a - b).unwrap();
            lp_norm(&r, 2.0).unwrap()
        };
        let (e1, e2) = (err(32), err(64));
        assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
    }
}
