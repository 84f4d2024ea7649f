use super::boundary::boundary_functionals;
use crate::grid::{
    divergence, gradient_full, h1_seminorm_vector, inner_vector, lp_norm, vector_laplacian, vector_magnitude_lp,
    GridError, Regime, ScalarField, VectorField,
};
use crate::model::{face_average, residual_divergence_constraint, residual_solenoidal, FluidState, ModelError, ModelParams};

/// One time-row of every tracked norm and functional.
///
/// F and G use `v` in the regimes solved in the `v` variable and the full
/// velocity `u` in the no-slip regime, matching the functionals estimated
/// in each case.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub rho_l2: f64,
    pub grad_rho_l2: f64,
    pub lap_rho_l2: f64,
    pub grad_rho_l4: f64,
    pub rho_t_l2: f64,
    pub rho_dev_l2: f64,
    pub u_l2: f64,
    pub grad_u_l2: f64,
    pub v_l2: f64,
    pub v_l4: f64,
    pub grad_v_l2: f64,
    pub sqrt_rho_v_l2: f64,
    pub lap_v_l2: f64,
    pub v_t_l2: f64,
    pub grad_lap_rho_l2: f64,
    pub grad_rho_t_l2: f64,
    pub f_t: f64,
    pub g_t: f64,
    pub m1: f64,
    pub m2: f64,
    pub div_residual: f64,
    pub div_free_residual: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_mean: f64,
    pub picard_iterations: usize,
    pub serrin_grad_rho: f64,
    pub serrin_v: f64,
    pub serrin_u: f64,
    pub blowup_tripped: bool,
}

macro_rules! columns {
    ($($f:ident),* ; $($i:ident),* ; $($b:ident),*) => {
        impl DiagnosticsRecord {
            /// Column names in CSV order.
            pub const COLUMNS: &'static [&'static str] = &[$(stringify!($f),)* $(stringify!($i),)* $(stringify!($b),)*];

            /// Every real-valued entry, in column order (integers widened).
            pub fn values(&self) -> Vec<f64> {
                vec![$(self.$f,)* $(self.$i as f64,)* $(if self.$b { 1.0 } else { 0.0 },)*]
            }

            pub(crate) fn cells(&self) -> Vec<String> {
                let mut out = vec![$(super::csv::fmt_g17(self.$f),)*];
                $(out.push(self.$i.to_string());)*
                $(out.push(u8::from(self.$b).to_string());)*
                out
            }

            pub(crate) fn from_cells(cells: &[&str]) -> Option<Self> {
                let mut it = cells.iter();
                let mut r = Self::default();
                $(r.$f = it.next()?.trim().parse().ok()?;)*
                $(r.$i = it.next()?.trim().parse().ok()?;)*
                $(r.$b = it.next()?.trim() == "1";)*
                it.next().is_none().then_some(r)
            }
        }
    };
}

columns!(
    t, dt, rho_l2, grad_rho_l2, lap_rho_l2, grad_rho_l4, rho_t_l2, rho_dev_l2, u_l2, grad_u_l2, v_l2, v_l4,
    grad_v_l2, sqrt_rho_v_l2, lap_v_l2, v_t_l2, grad_lap_rho_l2, grad_rho_t_l2, f_t, g_t, m1, m2,
    div_residual, div_free_residual, rho_min, rho_max, rho_mean, serrin_grad_rho, serrin_v, serrin_u;
    picard_iterations;
    blowup_tripped
);

impl DiagnosticsRecord {
    pub fn all_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

fn vnorm(v: &VectorField) -> f64 {
    inner_vector(v, v).unwrap_or(f64::NAN).sqrt()
}

/// Norm of the gradient of a center field over interior faces only.
fn interior_gradient_l2(f: &ScalarField) -> f64 {
    let g = f.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let a = g.cell_area();
    let mut s = 0.0;
    for j in 0..ny {
        for i in 1..nx {
            let d = (f.at(i, j) - f.at(i - 1, j)) / g.hx;
            s += a * d * d;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let d = (f.at(i, j) - f.at(i, j - 1)) / g.hy;
            s += a * d * d;
        }
    }
    s.sqrt()
}

fn check_grids(a: &FluidState, b: &FluidState) -> Result<(), GridError> {
    if a.grid().same_mesh(&b.grid()) && a.regime() == b.regime() {
        Ok(())
    } else {
        Err(GridError::GridMismatch)
    }
}

/// All norms of `state`; time derivatives are backward differences against
/// `prev` over `dt` and vanish when there is no previous level.
///
/// Uses the ghost values stored in `state` as they are.
pub fn energy_record(
    state: &FluidState,
    prev: Option<&FluidState>,
    dt: f64,
    params: &ModelParams,
) -> Result<DiagnosticsRecord, ModelError> {
    if let Some(p) = prev {
        check_grids(state, p)?;
    }
    let grid = state.grid();
    let rho = &state.rho;
    let grad_rho = gradient_full(rho)?;
    let lap_rho = divergence(&grad_rho);
    let (rho_min, rho_max) = rho.min_max();
    let rho_mean = rho.mean();
    let centre = match grid.regime {
        Regime::B => params.rho_tilde,
        _ => rho_mean,
    };
    let dev = rho.map(|r| r - centre);
    // the functionals are built on v, or on u when the velocity is no-slip
    let kin = match grid.regime {
        Regime::C => &state.u,
        _ => &state.v,
    };
    let rho_f = face_average(rho);
    let mut rv = state.v.clone();
    rv.x.data_mut().iter_mut().zip(rho_f.x.data()).for_each(|(a, r)| *a *= r);
    rv.y.data_mut().iter_mut().zip(rho_f.y.data()).for_each(|(a, r)| *a *= r);
    let sqrt_rho_v = inner_vector(&rv, &state.v)?.max(0.0).sqrt();

    let (rho_t_l2, grad_rho_t_l2, v_t_l2) = match prev.filter(|_| dt > 0.0) {
        Some(p) => {
            let rt = rho.zip_with(&p.rho, |a, b| (a - b) / dt)?;
            let kin_prev = match grid.regime {
                Regime::C => &p.u,
                _ => &p.v,
            };
            (
                lp_norm(&rt, 2.0)?,
                vnorm(&gradient_full(&rt)?),
                vnorm(&kin.sub(kin_prev).scaled(1.0 / dt)),
            )
        }
        None => (0.0, 0.0, 0.0),
    };

    let grad_kin = h1_seminorm_vector(kin);
    let lap_kin = vnorm(&vector_laplacian(kin));
    let lap_rho_l2 = lp_norm(&lap_rho, 2.0)?;
    let grad_lap_rho_l2 = interior_gradient_l2(&lap_rho);
    let f_t = grad_kin * grad_kin + lap_rho_l2 * lap_rho_l2 + rho_t_l2 * rho_t_l2;
    let g_t = lap_kin * lap_kin + v_t_l2 * v_t_l2 + grad_lap_rho_l2 * grad_lap_rho_l2 + grad_rho_t_l2 * grad_rho_t_l2;
    let (m1, m2) = boundary_functionals(state, params)?;

    Ok(DiagnosticsRecord {
        t: state.t,
        dt,
        rho_l2: lp_norm(rho, 2.0)?,
        grad_rho_l2: vnorm(&grad_rho),
        lap_rho_l2,
        grad_rho_l4: vector_magnitude_lp(&grad_rho, 4.0)?,
        rho_t_l2,
        rho_dev_l2: lp_norm(&dev, 2.0)?,
        u_l2: vnorm(&state.u),
        grad_u_l2: h1_seminorm_vector(&state.u),
        v_l2: vnorm(&state.v),
        v_l4: vector_magnitude_lp(&state.v, 4.0)?,
        grad_v_l2: h1_seminorm_vector(&state.v),
        sqrt_rho_v_l2: sqrt_rho_v,
        lap_v_l2: lap_kin,
        v_t_l2,
        grad_lap_rho_l2,
        grad_rho_t_l2,
        f_t,
        g_t,
        m1,
        m2,
        div_residual: residual_divergence_constraint(state, params),
        div_free_residual: residual_solenoidal(state),
        rho_min,
        rho_max,
        rho_mean,
        ..Default::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Friction, Grid, Location};
    use crate::model::{rest_state, MuLaw};
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
    fn rest_record() {
        let g = Grid::unit(8, Regime::A).unwrap();
        let s = rest_state(&g, 1.3, &params()).unwrap();
        let r = energy_record(&s, Some(&s), 0.1, &params()).unwrap();
        assert_eq!(r.u_l2, 0.0);
        assert_eq!(r.v_l2, 0.0);
        assert_eq!(r.grad_v_l2, 0.0);
        assert_eq!(r.f_t, 0.0);
        assert_eq!(r.g_t, 0.0);
        assert!((r.rho_l2 - 1.3).abs() < 1e-14);
        assert!(r.all_finite());
    }

    #[test]
    fn gradient_norm_matches_integral() {
        let g = Grid::unit(64, Regime::A).unwrap();
        let mut s = rest_state(&g, 1.0, &params()).unwrap();
        s.rho = ScalarField::from_fn(&g, Location::Center, |x, y| 1.0 + 0.1 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos());
        s.v = VectorField::zeros(&g);
        let r = energy_record(&s, None, 0.0, &params()).unwrap();
        let exact = 0.1 * PI * 2f64.sqrt();
        assert!((r.grad_rho_l2 - exact).abs() < 1e-3, "{} vs {exact}", r.grad_rho_l2);
        assert!(r.f_t >= 0.0 && r.g_t >= 0.0);
    }

    #[test]
    fn cells_round_trip() {
        let r = DiagnosticsRecord { t: 0.1, m1: -2.5e-7, picard_iterations: 4, blowup_tripped: true, ..Default::default() };
        let cells = r.cells();
        let refs: Vec<&str> = cells.iter().map(|s| s.as_str()).collect();
        assert_eq!(DiagnosticsRecord::from_cells(&refs), Some(r));
        assert_eq!(cells.len(), DiagnosticsRecord::COLUMNS.len());
    }
}
