//! Discrete operator identities and stencil orders.

use super::{criterion, Criterion};
use crate::grid::{
    curl2d, divergence, gradient_full, inner_scalar, inner_vector, laplacian, perp_gradient, vector_laplacian,
    BoundarySpec, Grid, Location, Regime, ScalarField, VectorField,
};
use crate::mms::fit_order;
use crate::runner::RunnerError;

const LEVELS: [usize; 3] = [16, 32, 64];
const MIN_ORDER: f64 = 1.9;

fn f(x: f64, y: f64) -> f64 {
    (2.0 * x + 0.3).sin() * (3.0 * y - 0.2).cos() + x * y * y
}

fn grad_f(x: f64, y: f64) -> (f64, f64) {
    (
        2.0 * (2.0 * x + 0.3).cos() * (3.0 * y - 0.2).cos() + y * y,
        -3.0 * (2.0 * x + 0.3).sin() * (3.0 * y - 0.2).sin() + 2.0 * x * y,
    )
}

fn v(x: f64, y: f64) -> (f64, f64) {
    ((1.5 * x).sin() * (2.0 * y).cos(), (x - 2.0 * y).cos() + x * x)
}

fn sup_scalar(a: &ScalarField, exact: impl Fn(f64, f64) -> f64) -> f64 {
    a.physical_indices()
        .map(|(i, j)| {
            let (x, y) = a.grid.coords(a.loc, i, j);
            (a.at(i, j) - exact(x, y)).abs()
        })
        .fold(0.0, f64::max)
}

/// Sup error on interior faces only.
fn sup_vector_interior(a: &VectorField, exact: impl Fn(f64, f64) -> (f64, f64)) -> f64 {
    let g = a.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let mut e: f64 = 0.0;
    for j in 0..ny {
        for i in 1..nx {
            let (x, y) = g.coords(Location::XFace, i, j);
            e = e.max((a.x.at(i, j) - exact(x, y).0).abs());
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let (x, y) = g.coords(Location::YFace, i, j);
            e = e.max((a.y.at(i, j) - exact(x, y).1).abs());
        }
    }
    e
}

/// Fitted order of one operator over the level set.
fn order(err: impl Fn(&Grid) -> Result<f64, RunnerError>) -> Result<(f64, Vec<f64>), RunnerError> {
    let mut h = Vec::new();
    let mut e = Vec::new();
    for n in LEVELS {
        let g = Grid::unit(n, Regime::A)?;
        h.push(g.hx);
        e.push(err(&g)?);
    }
    Ok((fit_order(&h, &e).0, e))
}

fn identities() -> Result<(bool, String), RunnerError> {
    let mut worst_adj: f64 = 0.0;
    let mut worst_curl: f64 = 0.0;
    let mut worst_div: f64 = 0.0;
    for g in [Grid::unit(16, Regime::A)?, Grid::new(33, 17, 1.0, 1.0, Regime::A)?] {
        let s = ScalarField::from_fn(&g, Location::Center, f);
        // adjointness needs a field with zero normal trace
        let mut w = VectorField::from_fn(&g, v);
        for j in 0..g.ny as isize {
            w.x.set(0, j, 0.0);
            w.x.set(g.nx as isize, j, 0.0);
        }
        for i in 0..g.nx as isize {
            w.y.set(i, 0, 0.0);
            w.y.set(i, g.ny as isize, 0.0);
        }
        let lhs = inner_vector(&gradient_full(&s)?, &w)?;
        let rhs = inner_scalar(&s, &divergence(&w))?;
        worst_adj = worst_adj.max((lhs + rhs).abs() / (1.0 + lhs.abs()));

        let (lo, hi) = curl2d(&gradient_full(&s)?)?.min_max();
        worst_curl = worst_curl.max(lo.abs().max(hi.abs()));
        let stream = ScalarField::from_fn(&g, Location::Corner, |x, y| (2.0 * x).sin() * (y * y + x).cos());
        let (lo, hi) = divergence(&perp_gradient(&stream)?).min_max();
        worst_div = worst_div.max(lo.abs().max(hi.abs()));
    }
    let ok = worst_adj < 1e-13 && worst_curl < 1e-10 && worst_div < 1e-10;
    Ok((ok, format!("adjointness {worst_adj:.1e}, curl grad {worst_curl:.1e}, div perp_grad {worst_div:.1e}")))
}

fn orders() -> Result<(bool, String), RunnerError> {
    let pi = std::f64::consts::PI;
    let cases: Vec<(&str, (f64, Vec<f64>))> = vec![
        (
            "gradient",
            order(|g| {
                let s = ScalarField::from_fn(g, Location::Center, f);
                Ok(sup_vector_interior(&gradient_full(&s)?, grad_f))
            })?,
        ),
        (
            "divergence",
            order(|g| {
                let w = VectorField::from_fn(g, v);
                let exact = |x: f64, y: f64| 1.5 * (1.5 * x).cos() * (2.0 * y).cos() + 2.0 * (x - 2.0 * y).sin();
                Ok(sup_scalar(&divergence(&w), exact))
            })?,
        ),
        (
            "laplacian",
            order(|g| {
                let s = ScalarField::from_fn(g, Location::Center, |x, y| (pi * x).cos() * (2.0 * pi * y).cos());
                let l = laplacian(&s, &BoundarySpec::NeumannZero)?;
                Ok(sup_scalar(&l, |x, y| -5.0 * pi * pi * (pi * x).cos() * (2.0 * pi * y).cos()))
            })?,
        ),
        (
            "perp_gradient",
            order(|g| {
                let s = ScalarField::from_fn(g, Location::Corner, f);
                Ok(sup_vector_interior(&perp_gradient(&s)?, |x, y| {
                    let (fx, fy) = grad_f(x, y);
                    (fy, -fx)
                }))
            })?,
        ),
        (
            "curl",
            order(|g| {
                let w = VectorField::from_fn(g, v);
                let exact = |x: f64, y: f64| (-(x - 2.0 * y).sin() + 2.0 * x) + 2.0 * (1.5 * x).sin() * (2.0 * y).sin();
                Ok(sup_scalar(&curl2d(&w)?, exact))
            })?,
        ),
        (
            "vector_laplacian",
            order(|g| {
                let w = VectorField::from_fn(g, v);
                Ok(sup_vector_interior(&vector_laplacian(&w), |x, y| {
                    (-6.25 * (1.5 * x).sin() * (2.0 * y).cos(), -5.0 * (x - 2.0 * y).cos() + 2.0)
                }))
            })?,
        ),
    ];
    let ok = cases.iter().all(|(_, (o, e))| *o >= MIN_ORDER || e.iter().all(|e| *e < 1e-12));
    let detail = cases.iter().map(|(n, (o, _))| format!("{n} {o:.2}")).collect::<Vec<_>>().join(", ");
    Ok((ok, detail))
}

pub fn c1() -> Result<Criterion, RunnerError> {
    let (a, da) = identities()?;
    let (b, db) = orders()?;
    Ok(criterion("C1", "operator identities and orders", a && b, format!("{da}; orders {db}")))
}
