use super::bc::apply_scalar_bc;
use super::{BoundarySpec, GridError, Location, ScalarField, VectorField};

/// Face differences of a center field using whatever its ghosts hold.
///
/// Every stored face value is produced, including the tangential ghost rows,
/// so the result can feed corner stencils directly.
pub fn gradient_full(f: &ScalarField) -> Result<VectorField, GridError> {
    f.expect(Location::Center)?;
    let g = f.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let mut out = VectorField::zeros(&g);
    for j in -1..=ny {
        for i in 0..=nx {
            out.x.set(i, j, (f.at(i, j) - f.at(i - 1, j)) / g.hx);
        }
    }
    for j in 0..=ny {
        for i in -1..=nx {
            out.y.set(i, j, (f.at(i, j) - f.at(i, j - 1)) / g.hy);
        }
    }
    Ok(out)
}

/// Gradient of a cell-centered scalar after filling its ghosts under `bc`.
pub fn gradient(f: &ScalarField, bc: &BoundarySpec) -> Result<VectorField, GridError> {
    f.expect(Location::Center)?;
    let mut f = f.clone();
    apply_scalar_bc(&mut f, bc)?;
    gradient_full(&f)
}

/// Cell-centered divergence. Reads only physical face values, so no
/// boundary condition is involved.
pub fn divergence(v: &VectorField) -> ScalarField {
    let g = v.grid;
    let mut out = ScalarField::centers(&g);
    for j in 0..g.ny as isize {
        for i in 0..g.nx as isize {
            let d = (v.x.at(i + 1, j) - v.x.at(i, j)) / g.hx + (v.y.at(i, j + 1) - v.y.at(i, j)) / g.hy;
            out.set(i, j, d);
        }
    }
    out
}

/// Five-point Laplacian, identical to `divergence(gradient(f, bc))`.
pub fn laplacian(f: &ScalarField, bc: &BoundarySpec) -> Result<ScalarField, GridError> {
    Ok(divergence(&gradient(f, bc)?))
}

/// `(d2 f, -d1 f)` from a corner field. Center fields are first averaged to
/// corners (ghosts included), which keeps `divergence(perp_gradient(f)) = 0`.
pub fn perp_gradient(f: &ScalarField) -> Result<VectorField, GridError> {
    let psi = match f.loc {
        Location::Corner => f.clone(),
        Location::Center => {
            let mut c = ScalarField::corners(&f.grid);
            for j in 0..=f.grid.ny as isize {
                for i in 0..=f.grid.nx as isize {
                    let v = 0.25 * (f.at(i, j) + f.at(i - 1, j) + f.at(i, j - 1) + f.at(i - 1, j - 1));
                    c.set(i, j, v);
                }
            }
            c
        }
        found => {
            return Err(GridError::LocationMismatch {
                expected: Location::Corner,
                found,
            })
        }
    };
    let g = f.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let mut out = VectorField::zeros(&g);
    for j in 0..ny {
        for i in 0..=nx {
            out.x.set(i, j, (psi.at(i, j + 1) - psi.at(i, j)) / g.hy);
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            out.y.set(i, j, -(psi.at(i + 1, j) - psi.at(i, j)) / g.hx);
        }
    }
    // Tangential ghosts by linear extrapolation keep wall curls consistent.
    for i in 0..=nx {
        out.x.set(i, -1, 2.0 * out.x.at(i, 0) - out.x.at(i, 1));
        out.x.set(i, ny, 2.0 * out.x.at(i, ny - 1) - out.x.at(i, ny - 2));
    }
    for j in 0..=ny {
        out.y.set(-1, j, 2.0 * out.y.at(0, j) - out.y.at(1, j));
        out.y.set(nx, j, 2.0 * out.y.at(nx - 1, j) - out.y.at(nx - 2, j));
    }
    Ok(out)
}

/// Corner curl `d1 F2 - d2 F1`; wall corners use the ghost rows of `F`.
pub fn curl2d(v: &VectorField) -> Result<ScalarField, GridError> {
    let g = v.grid;
    let mut out = ScalarField::corners(&g);
    for j in 0..=g.ny as isize {
        for i in 0..=g.nx as isize {
            let c = (v.y.at(i, j) - v.y.at(i - 1, j)) / g.hx - (v.x.at(i, j) - v.x.at(i, j - 1)) / g.hy;
            out.set(i, j, c);
        }
    }
    Ok(out)
}

/// Component-wise five-point Laplacian on interior faces; boundary normal
/// faces are left at zero.
pub fn vector_laplacian(v: &VectorField) -> VectorField {
    let g = v.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let (ax, ay) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let mut out = VectorField::zeros(&g);
    for j in 0..ny {
        for i in 1..nx {
            let c = v.x.at(i, j);
            let l = ax * (v.x.at(i + 1, j) - 2.0 * c + v.x.at(i - 1, j))
                + ay * (v.x.at(i, j + 1) - 2.0 * c + v.x.at(i, j - 1));
            out.x.set(i, j, l);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let c = v.y.at(i, j);
            let l = ax * (v.y.at(i + 1, j) - 2.0 * c + v.y.at(i - 1, j))
                + ay * (v.y.at(i, j + 1) - 2.0 * c + v.y.at(i, j - 1));
            out.y.set(i, j, l);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{apply_bc, inner_scalar, inner_vector, Grid, Regime};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn bump(x: f64, y: f64) -> f64 {
        // vanishes with its derivatives near the walls of [0,1]^2
        let s = |t: f64| if t > 0.2 && t < 0.8 { (PI * (t - 0.2) / 0.6).sin().powi(4) } else { 0.0 };
        s(x) * s(y)
    }

    #[test]
    fn linear_exactness() {
        let g = Grid::unit(8, Regime::C).unwrap();
        let f = ScalarField::from_fn(&g, Location::Center, |x, _| x);
        let gr = gradient_full(&f).unwrap();
        for (i, j) in gr.x_physical() {
            assert!((gr.x.at(i, j) - 1.0).abs() < 1e-12);
        }
        let f = ScalarField::from_fn(&g, Location::Center, |x, y| x * x + y * y);
        let l = divergence(&gradient_full(&f).unwrap());
        for (i, j) in l.physical_indices() {
            assert!((l.at(i, j) - 4.0).abs() < 1e-9);
        }
        let v = VectorField::from_fn(&g, |x, y| (x, y));
        let d = divergence(&v);
        assert!(d.physical_indices().all(|(i, j)| (d.at(i, j) - 2.0).abs() < 1e-12));
        let rot = VectorField::from_fn(&g, |x, y| (-y, x));
        let c = curl2d(&rot).unwrap();
        assert!(c.physical_indices().all(|(i, j)| (c.at(i, j) - 2.0).abs() < 1e-12));
        let p = perp_gradient(&ScalarField::from_fn(&g, Location::Corner, |_, y| y)).unwrap();
        assert!(p.x_physical().all(|(i, j)| (p.x.at(i, j) - 1.0).abs() < 1e-12));
        let p = perp_gradient(&ScalarField::from_fn(&g, Location::Corner, |x, _| x)).unwrap();
        assert!(p.y_physical().all(|(i, j)| (p.y.at(i, j) + 1.0).abs() < 1e-12));
    }

    #[test]
    fn constant_fields_are_annihilated() {
        let g = Grid::unit(6, Regime::A).unwrap();
        let f = ScalarField::constant(&g, Location::Center, 7.0);
        let gr = gradient(&f, &BoundarySpec::NeumannZero).unwrap();
        assert_eq!(gr.max_abs(), 0.0);
        let v = VectorField::from_fn(&g, |_, _| (3.0, 3.0));
        assert_eq!(divergence(&v).min_max(), (0.0, 0.0));
        assert!(curl2d(&v).unwrap().min_max().1.abs() < 1e-12);
    }

    #[test]
    fn gradient_rejects_corner_input() {
        let g = Grid::unit(6, Regime::A).unwrap();
        let f = ScalarField::corners(&g);
        assert!(gradient(&f, &BoundarySpec::NeumannZero).is_err());
    }

    #[test]
    fn neumann_laplacian_sums_to_zero() {
        let g = Grid::new(13, 9, 1.0, 0.6, Regime::A).unwrap();
        let f = ScalarField::from_fn(&g, Location::Center, |x, y| (5.0 * x * y).sin() + x.powi(3));
        let l = laplacian(&f, &BoundarySpec::NeumannZero).unwrap();
        let one = ScalarField::constant(&g, Location::Center, 1.0);
        assert!(inner_scalar(&l, &one).unwrap().abs() < 1e-11);
    }

    fn second_order_rate(err: impl Fn(usize) -> f64) -> f64 {
        let (e1, e2) = (err(32), err(64));
        (e1 / e2).log2()
    }

    #[test]
    fn gradient_is_second_order() {
        let rate = second_order_rate(|n| {
            let g = Grid::unit(n, Regime::A).unwrap();
            let f = ScalarField::from_fn(&g, Location::Center, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).cos());
            let gr = gradient_full(&f).unwrap();
            gr.x_physical()
                .map(|(i, j)| {
                    let (x, y) = g.coords(Location::XFace, i, j);
                    (gr.x.at(i, j) - 2.0 * PI * (2.0 * PI * x).cos() * (2.0 * PI * y).cos()).abs()
                })
                .fold(0.0, f64::max)
        });
        assert!(rate > 1.9, "{rate}");
    }

    #[test]
    fn adjoint_pair_on_interior_support() {
        for g in [Grid::unit(16, Regime::C).unwrap(), Grid::new(33, 17, 1.0, 1.0, Regime::C).unwrap()] {
            let f = ScalarField::from_fn(&g, Location::Center, bump);
            let v = VectorField::from_fn(&g, |x, y| (bump(x, y) * (3.0 * y).cos(), bump(y, x) + x * bump(x, y)));
            let lhs = inner_vector(&gradient_full(&f).unwrap(), &v).unwrap();
            let rhs = inner_scalar(&f, &divergence(&v)).unwrap();
            assert!((lhs + rhs).abs() < 1e-13 * (1.0 + lhs.abs()), "{lhs} {rhs}");
        }
    }

    proptest! {
        #[test]
        fn discrete_identities_hold(seed in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let g = Grid::new(11, 7, 1.3, 0.9, Regime::A).unwrap();
            let s = seed.clone();
            let f = ScalarField::from_fn(&g, Location::Center, move |x, y| {
                s[0] * (3.0 * x + s[1]).sin() * (2.0 * y).cos() + s[2] * x * y * y + s[3]
            });
            let f = apply_bc(&f, &BoundarySpec::DirichletConst(seed[4])).unwrap();
            let c = curl2d(&gradient_full(&f).unwrap()).unwrap();
            prop_assert!(c.min_max().0.abs() < 1e-9 && c.min_max().1.abs() < 1e-9);
            let s = seed.clone();
            let psi = ScalarField::from_fn(&g, Location::Corner, move |x, y| s[5] * (x * 4.0).cos() * y * y);
            let d = divergence(&perp_gradient(&psi).unwrap());
            prop_assert!(d.min_max().0.abs() < 1e-10 && d.min_max().1.abs() < 1e-10);
            let d = divergence(&perp_gradient(&f).unwrap());
            prop_assert!(d.min_max().0.abs() < 1e-10 && d.min_max().1.abs() < 1e-10);
        }
    }
}
