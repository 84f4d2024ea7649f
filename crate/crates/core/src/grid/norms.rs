use super::{Grid, GridError, Location, ScalarField, VectorField};

/// Norm exponent in `[1, inf]`.
pub type Exponent = f64;

#[inline]
fn edge_factor(k: isize, n: usize) -> f64 {
    if k == 0 || k == n as isize {
        0.5
    } else {
        1.0
    }
}

/// Trapezoid-corrected quadrature weight of a physical sample.
///
/// Cell centers get the full cell area; samples sitting on the boundary
/// (normal faces, wall corners) get the part of their dual cell inside the
/// domain.
#[inline]
pub(crate) fn point_weight(grid: &Grid, loc: Location, i: isize, j: isize) -> f64 {
    let a = grid.cell_area();
    match loc {
        Location::Center => a,
        Location::XFace => a * edge_factor(i, grid.nx),
        Location::YFace => a * edge_factor(j, grid.ny),
        Location::Corner => a * edge_factor(i, grid.nx) * edge_factor(j, grid.ny),
    }
}

pub fn corner_weight(grid: &Grid, i: isize, j: isize) -> f64 {
    point_weight(grid, Location::Corner, i, j)
}

pub fn inner_scalar(a: &ScalarField, b: &ScalarField) -> Result<f64, GridError> {
    a.expect(b.loc)?;
    if !a.grid.same_mesh(&b.grid) {
        return Err(GridError::GridMismatch);
    }
    Ok(a.physical_indices()
        .map(|(i, j)| point_weight(&a.grid, a.loc, i, j) * a.at(i, j) * b.at(i, j))
        .sum())
}

pub fn inner_vector(a: &VectorField, b: &VectorField) -> Result<f64, GridError> {
    if !a.grid.same_mesh(&b.grid) {
        return Err(GridError::GridMismatch);
    }
    let g = &a.grid;
    let sx: f64 = a
        .x_physical()
        .map(|(i, j)| point_weight(g, Location::XFace, i, j) * a.x.at(i, j) * b.x.at(i, j))
        .sum();
    let sy: f64 = a
        .y_physical()
        .map(|(i, j)| point_weight(g, Location::YFace, i, j) * a.y.at(i, j) * b.y.at(i, j))
        .sum();
    Ok(sx + sy)
}

fn check_exponent(p: Exponent) -> Result<(), GridError> {
    if p.is_nan() || p < 1.0 {
        Err(GridError::BadExponent(p))
    } else {
        Ok(())
    }
}

fn weighted_lp(samples: impl Iterator<Item = (f64, f64)>, p: Exponent) -> f64 {
    if p.is_infinite() {
        samples.fold(0.0, |m, (_, v)| m.max(v.abs()))
    } else if p == 2.0 {
        samples.map(|(w, v)| w * v * v).sum::<f64>().sqrt()
    } else {
        samples
            .map(|(w, v)| w * v.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Midpoint-rule `L^p` norm of a scalar field; grid max for `p = inf`.
pub fn lp_norm(f: &ScalarField, p: Exponent) -> Result<f64, GridError> {
    check_exponent(p)?;
    let g = f.grid;
    Ok(weighted_lp(
        f.physical_indices()
            .map(|(i, j)| (point_weight(&g, f.loc, i, j), f.at(i, j))),
        p,
    ))
}

/// `L^p` norm of the pointwise magnitude of a staggered vector field,
/// with components averaged to cell centers.
pub fn vector_magnitude_lp(f: &VectorField, p: Exponent) -> Result<f64, GridError> {
    check_exponent(p)?;
    let g = f.grid;
    let a = g.cell_area();
    let it = (0..g.ny as isize).flat_map(move |j| {
        (0..g.nx as isize).map(move |i| {
            let (cx, cy) = f.center_components(i, j);
            (a, cx.hypot(cy))
        })
    });
    Ok(weighted_lp(it, p))
}

/// Squared discrete `H^1` seminorm of a staggered vector field.
///
/// Normal derivatives live at cell centers, cross derivatives at corners;
/// ghost values must already encode the boundary condition.
pub fn gradient_energy(f: &VectorField) -> f64 {
    let g = f.grid;
    let (hx, hy) = (g.hx, g.hy);
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let mut s = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let d1 = (f.x.at(i + 1, j) - f.x.at(i, j)) / hx;
            let d2 = (f.y.at(i, j + 1) - f.y.at(i, j)) / hy;
            s += g.cell_area() * (d1 * d1 + d2 * d2);
        }
    }
    for j in 0..=ny {
        for i in 0..=nx {
            let d21 = (f.x.at(i, j) - f.x.at(i, j - 1)) / hy;
            let d12 = (f.y.at(i, j) - f.y.at(i - 1, j)) / hx;
            s += corner_weight(&g, i, j) * (d21 * d21 + d12 * d12);
        }
    }
    s
}

pub fn h1_seminorm_vector(f: &VectorField) -> f64 {
    gradient_energy(f).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Regime;
    use std::f64::consts::PI;

    #[test]
    fn constant_fields() {
        let g = Grid::unit(16, Regime::C).unwrap();
        let two = ScalarField::constant(&g, Location::Center, 2.0);
        assert!((lp_norm(&two, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let m3 = ScalarField::constant(&g, Location::Center, -3.0);
        assert_eq!(lp_norm(&m3, f64::INFINITY).unwrap(), 3.0);
        assert!(matches!(lp_norm(&m3, 0.5), Err(GridError::BadExponent(_))));
    }

    #[test]
    fn sine_l2_norm() {
        // analytic: int_0^1 sin^2(2 pi x) dx = 1/2
        let g = Grid::unit(64, Regime::C).unwrap();
        let f = ScalarField::from_fn(&g, Location::Center, |x, _| (2.0 * PI * x).sin());
        let n = lp_norm(&f, 2.0).unwrap();
        assert!((n - 0.5f64.sqrt()).abs() < 1e-3, "{n}");
    }

    #[test]
    fn l2_matches_inner_product() {
        let g = Grid::new(9, 7, 1.3, 0.7, Regime::A).unwrap();
        let f = ScalarField::from_fn(&g, Location::Corner, |x, y| (3.0 * x).cos() + y * y);
        let n = lp_norm(&f, 2.0).unwrap();
        let ip = inner_scalar(&f, &f).unwrap();
        assert!((n * n - ip).abs() <= 1e-14 * ip);
    }

    #[test]
    fn corner_weights_tile_the_domain() {
        let g = Grid::new(5, 6, 2.0, 3.0, Regime::A).unwrap();
        let one = ScalarField::constant(&g, Location::Corner, 1.0);
        let total = inner_scalar(&one, &one).unwrap();
        assert!((total - g.area()).abs() < 1e-12);
    }
}
