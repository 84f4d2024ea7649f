use crate::elliptic::corner_viscosity;
use crate::grid::{Regime, ScalarField};
use crate::model::state::inverse_density;
use crate::model::{FluidState, ModelError, ModelParams};

fn trapezoid(k: usize, n: usize) -> f64 {
    if k == 0 || k == n {
        0.5
    } else {
        1.0
    }
}

/// Wall friction energy `M1` and the coupling functional `M2`; both vanish
/// outside the slip regime.
///
/// `M1` integrates `b mu |v.tau|^2` along the walls with the wall value of
/// the tangential velocity taken as the mean of the first interior sample
/// and its ghost. `M2` integrates `c0 mu b d_n(v.tau) d_tau(1/rho)` over the
/// cells, with `n`, `tau` and `b` taken from the nearest wall.
pub fn boundary_functionals(state: &FluidState, params: &ModelParams) -> Result<(f64, f64), ModelError> {
    let grid = state.grid();
    if grid.regime != Regime::A || params.friction.is_zero() {
        return Ok((0.0, 0.0));
    }
    let b = params.friction;
    let mu = params.viscosity(&state.rho);
    let mc = corner_viscosity(&mu);
    let v = &state.v;
    let (nx, ny) = (grid.nx, grid.ny);
    let (hx, hy) = (grid.hx, grid.hy);
    let (ix, iy) = (nx as isize, ny as isize);

    let mut m1 = 0.0;
    for i in 0..=nx {
        let ii = i as isize;
        let x = i as f64 * hx;
        let w = hx * trapezoid(i, nx);
        let bottom = 0.5 * (v.x.at(ii, 0) + v.x.at(ii, -1));
        let top = 0.5 * (v.x.at(ii, iy - 1) + v.x.at(ii, iy));
        m1 += w * b.at(x, 0.0) * mc.at(ii, 0) * bottom * bottom;
        m1 += w * b.at(x, grid.ly) * mc.at(ii, iy) * top * top;
    }
    for j in 0..=ny {
        let jj = j as isize;
        let y = j as f64 * hy;
        let w = hy * trapezoid(j, ny);
        let left = 0.5 * (v.y.at(0, jj) + v.y.at(-1, jj));
        let right = 0.5 * (v.y.at(ix - 1, jj) + v.y.at(ix, jj));
        m1 += w * b.at(0.0, y) * mc.at(0, jj) * left * left;
        m1 += w * b.at(grid.lx, y) * mc.at(ix, jj) * right * right;
    }

    let psi = inverse_density(&state.rho, params)?;
    let m2 = coupling(&psi, v, &mu, params.c0, |x, y| b.at(x, y));
    Ok((m1, m2))
}

fn coupling(psi: &ScalarField, v: &crate::grid::VectorField, mu: &ScalarField, c0: f64, b: impl Fn(f64, f64) -> f64) -> f64 {
    let grid = psi.grid;
    let (hx, hy) = (grid.hx, grid.hy);
    let mut m2 = 0.0;
    for j in 0..grid.ny as isize {
        for i in 0..grid.nx as isize {
            let (x, y) = ((i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy);
            // center derivatives of the velocity components and of psi
            let d2v1 = 0.25 * (v.x.at(i, j + 1) - v.x.at(i, j - 1) + v.x.at(i + 1, j + 1) - v.x.at(i + 1, j - 1)) / hy;
            let d1v2 = 0.25 * (v.y.at(i + 1, j) - v.y.at(i - 1, j) + v.y.at(i + 1, j + 1) - v.y.at(i - 1, j + 1)) / hx;
            let d1p = 0.5 * (psi.at(i + 1, j) - psi.at(i - 1, j)) / hx;
            let d2p = 0.5 * (psi.at(i, j + 1) - psi.at(i, j - 1)) / hy;
            let dists = [y, grid.ly - y, x, grid.lx - x];
            let wall = (0..4).fold(0, |k, w| if dists[w] < dists[k] { w } else { k });
            let (val, bw) = match wall {
                0 => (-d2v1 * d1p, b(x, 0.0)),
                1 => (d2v1 * d1p, b(x, grid.ly)),
                2 => (-d1v2 * d2p, b(0.0, y)),
                _ => (d1v2 * d2p, b(grid.lx, y)),
            };
            m2 += grid.cell_area() * c0 * mu.at(i, j) * bw * val;
        }
    }
    m2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Friction, Grid, VectorField};
    use crate::model::{rest_state, MuLaw};

    fn params(friction: Friction) -> ModelParams {
        ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Constant(1.0),
            alpha: 0.5,
            beta: 2.0,
            rho_tilde: 1.0,
            friction,
        }
    }

    #[test]
    fn free_slip_gives_zero() {
        let g = Grid::unit(8, Regime::A).unwrap();
        let mut s = rest_state(&g, 1.0, &params(Friction::Zero)).unwrap();
        s.v = VectorField::from_fn(&g, |_, _| (1.0, 1.0));
        assert_eq!(boundary_functionals(&s, &params(Friction::Zero)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn unit_tangential_flow_gives_perimeter() {
        let g = Grid::new(8, 16, 2.0, 1.0, Regime::A).unwrap();
        let p = params(Friction::Constant(1.0));
        let mut s = rest_state(&g, 1.0, &p).unwrap();
        s.v = VectorField::from_fn(&g, |_, _| (1.0, 1.0));
        let (m1, m2) = boundary_functionals(&s, &p).unwrap();
        assert!((m1 - 6.0).abs() < 1e-12, "{m1}");
        assert_eq!(m2, 0.0);
    }

    #[test]
    fn other_regimes_give_zero() {
        let g = Grid::unit(8, Regime::C).unwrap();
        let p = params(Friction::Constant(1.0));
        let mut s = rest_state(&g, 1.0, &p).unwrap();
        s.v = VectorField::from_fn(&g, |x, _| (x, 1.0));
        assert_eq!(boundary_functionals(&s, &p).unwrap(), (0.0, 0.0));
    }
}
