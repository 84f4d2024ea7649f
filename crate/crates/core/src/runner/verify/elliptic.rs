//! Poisson, Stokes and Bogovskii contracts, and the initial-data round trip.

use std::f64::consts::PI;

use super::{criterion, Criterion};
use crate::elliptic::{bogovskii, solve_poisson, solve_stokes, SolverSettings};
use crate::grid::{
    divergence, h1_seminorm_vector, inner_scalar, inner_vector, lp_norm, BoundarySpec, Friction, Grid, Location,
    Regime, ScalarField, VectorField, WallTrace,
};
use crate::mms::fit_order;
use crate::model::{init_from_velocity, ModelParams, MuLaw};
use crate::runner::RunnerError;

const LEVELS: [usize; 3] = [16, 32, 64];

fn settings() -> SolverSettings {
    SolverSettings { rel_tol: 1e-10, abs_tol: 1e-11, max_iter: None }
}

fn l2_scalar_error(a: &ScalarField, exact: impl Fn(f64, f64) -> f64) -> Result<f64, RunnerError> {
    let e = ScalarField::from_fn(&a.grid, a.loc, exact);
    let d = a.zip_with(&e, |p, q| p - q)?;
    Ok(inner_scalar(&d, &d)?.sqrt())
}

/// L2 error on interior faces.
fn l2_interior_faces(a: &VectorField, exact: impl Fn(f64, f64) -> (f64, f64)) -> f64 {
    let g = a.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let mut s = 0.0;
    for j in 0..ny {
        for i in 1..nx {
            let (x, y) = g.coords(Location::XFace, i, j);
            s += (a.x.at(i, j) - exact(x, y).0).powi(2);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let (x, y) = g.coords(Location::YFace, i, j);
            s += (a.y.at(i, j) - exact(x, y).1).powi(2);
        }
    }
    (s * g.cell_area()).sqrt()
}

fn poisson() -> Result<(f64, String), RunnerError> {
    let mut h = Vec::new();
    let mut e = Vec::new();
    for n in LEVELS {
        let g = Grid::unit(n, Regime::B)?;
        let rhs = ScalarField::from_fn(&g, Location::Center, |x, y| -2.0 * PI * PI * (PI * x).sin() * (PI * y).sin());
        let (sol, _) = solve_poisson(&rhs, &BoundarySpec::DirichletConst(0.0), &settings())?;
        h.push(g.hx);
        e.push(l2_scalar_error(&sol, |x, y| (PI * x).sin() * (PI * y).sin())?);
    }
    let o = fit_order(&h, &e).0;
    Ok((o, format!("poisson {o:.2}")))
}

// Variable-viscosity Stokes with stream function sin^2(pi x) sin^2(pi y),
// pressure cos(pi x) cos(pi y) and mu = 1 + x y / 2; the forcing is
// worked out by hand from -div(2 mu D(u)) + grad p.
fn stokes_u(x: f64, y: f64) -> (f64, f64) {
    (PI * (PI * x).sin().powi(2) * (2.0 * PI * y).sin(), -PI * (2.0 * PI * x).sin() * (PI * y).sin().powi(2))
}

fn stokes_mu(x: f64, y: f64) -> f64 {
    1.0 + 0.5 * x * y
}

fn stokes_p(x: f64, y: f64) -> f64 {
    (PI * x).cos() * (PI * y).cos()
}

fn stokes_f(x: f64, y: f64) -> (f64, f64) {
    let (mu, mux, muy) = (stokes_mu(x, y), 0.5 * y, 0.5 * x);
    let (s2x, s2y, c2x, c2y) = ((2.0 * PI * x).sin(), (2.0 * PI * y).sin(), (2.0 * PI * x).cos(), (2.0 * PI * y).cos());
    let (sx2, sy2) = ((PI * x).sin().powi(2), (PI * y).sin().powi(2));
    let p2 = PI * PI;
    let p3 = p2 * PI;
    let d11 = p2 * s2x * s2y;
    let d12 = p2 * (sx2 * c2y - c2x * sy2);
    let d22 = -d11;
    let div1 = 2.0 * mux * d11 + 2.0 * mu * 2.0 * p3 * c2x * s2y + 2.0 * muy * d12 - 2.0 * mu * p3 * s2y;
    let div2 = 2.0 * mux * d12 + 2.0 * mu * p3 * s2x + 2.0 * muy * d22 - 2.0 * mu * 2.0 * p3 * s2x * c2y;
    let px = -PI * (PI * x).sin() * (PI * y).cos();
    let py = -PI * (PI * x).cos() * (PI * y).sin();
    (-div1 + px, -div2 + py)
}

fn stokes() -> Result<(f64, f64, String), RunnerError> {
    let mut h = Vec::new();
    let (mut eu, mut ep) = (Vec::new(), Vec::new());
    for n in LEVELS {
        let g = Grid::unit(n, Regime::C)?;
        let mu = ScalarField::from_fn(&g, Location::Center, stokes_mu);
        let rhs = VectorField::from_fn(&g, stokes_f);
        let s = solve_stokes(&mu, &rhs, &ScalarField::centers(&g), &BoundarySpec::NoSlip, &settings())?;
        h.push(g.hx);
        eu.push(l2_interior_faces(&s.velocity, stokes_u));
        // the exact pressure has zero mean on the unit square, the discrete one nearly so
        let exact = ScalarField::from_fn(&g, Location::Center, stokes_p);
        let mut d = s.pressure.zip_with(&exact, |a, b| a - b)?;
        let m = d.mean();
        d.shift(-m);
        ep.push(inner_scalar(&d, &d)?.sqrt());
    }
    let (ou, op) = (fit_order(&h, &eu).0, fit_order(&h, &ep).0);
    Ok((ou, op, format!("stokes u {ou:.2}, p {op:.2}")))
}

fn bogovskii_contract() -> Result<(bool, String), RunnerError> {
    let mut worst_res: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    let mut ratios = Vec::new();
    for n in LEVELS {
        let g = Grid::unit(n, Regime::C)?;
        let mut f = ScalarField::from_fn(&g, Location::Center, |x, y| {
            (PI * x).cos() * (2.0 * PI * y).cos() + (x - 0.3) * (x - 0.3) * y
        });
        let m = f.mean();
        f.shift(-m);
        let (q, _) = bogovskii(&f, &settings())?;
        let r = divergence(&q).zip_with(&f, |a, b| a - b)?;
        worst_res = worst_res.max(lp_norm(&r, 2.0)?);
        let t = WallTrace::of_field(&q);
        let tang = t
            .left_tangential
            .iter()
            .chain(&t.right_tangential)
            .chain(&t.bottom_tangential)
            .chain(&t.top_tangential)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        worst_trace = worst_trace.max(t.max_normal().max(tang));
        let h1 = (inner_vector(&q, &q)? + h1_seminorm_vector(&q).powi(2)).sqrt();
        ratios.push(h1 / lp_norm(&f, 2.0)?);
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let ok = worst_res <= 1e-8 && worst_trace == 0.0 && spread <= 0.2;
    let r = ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join("/");
    Ok((ok, format!("bogovskii residual {worst_res:.1e}, trace {worst_trace:.1e}, H1 ratio {r} (spread {:.1}%)", 100.0 * spread)))
}

pub fn c2() -> Result<Criterion, RunnerError> {
    let (op, dp) = poisson()?;
    let (ou, opr, ds) = stokes()?;
    let (ob, db) = bogovskii_contract()?;
    let ok = op >= 1.9 && ou >= 1.9 && opr >= 0.9 && ob;
    Ok(criterion("C2", "elliptic contracts", ok, format!("{dp}; {ds}; {db}")))
}

/// Manufactured `rho*` for the round trip: Neumann-compatible cosines in
/// A and C, equal to the wall value in B.
fn target(regime: Regime, x: f64, y: f64) -> (f64, f64, f64) {
    // (rho*, d/dx, d/dy)
    let a = 0.2;
    match regime {
        Regime::B => {
            let r = 1.2 * (1.0 + a * (PI * x).sin() * (PI * y).sin());
            (r, 1.2 * a * PI * (PI * x).cos() * (PI * y).sin(), 1.2 * a * PI * (PI * x).sin() * (PI * y).cos())
        }
        _ => {
            let r = 1.2 * (1.0 + a * (PI * x).cos() * (PI * y).cos());
            (r, -1.2 * a * PI * (PI * x).sin() * (PI * y).cos(), -1.2 * a * PI * (PI * x).cos() * (PI * y).sin())
        }
    }
}

fn round_trip(regime: Regime) -> Result<(f64, Vec<f64>), RunnerError> {
    let params = ModelParams {
        c0: 0.1,
        mu_law: MuLaw::Constant(1.0),
        alpha: 0.5,
        beta: 2.0,
        rho_tilde: 1.2,
        friction: Friction::Zero,
    };
    let mut h = Vec::new();
    let mut e = Vec::new();
    for n in LEVELS {
        let g = Grid::unit(n, regime)?;
        let u0 = VectorField::from_fn(&g, |x, y| {
            let (r, rx, ry) = target(regime, x, y);
            // c0 grad(1/rho*) plus the curl of 0.05 sin^2 sin^2
            let sx = 0.05 * PI * (PI * x).sin().powi(2) * (2.0 * PI * y).sin();
            let sy = -0.05 * PI * (2.0 * PI * x).sin() * (PI * y).sin().powi(2);
            (-params.c0 * rx / (r * r) + sx, -params.c0 * ry / (r * r) + sy)
        });
        let level = ScalarField::from_fn(&g, Location::Center, |x, y| target(regime, x, y).0).mean();
        let s = init_from_velocity(&u0, &params, level, &settings())?;
        h.push(g.hx);
        e.push(l2_scalar_error(&s.rho, |x, y| target(regime, x, y).0)?);
    }
    Ok((fit_order(&h, &e).0, e))
}

pub fn c7() -> Result<Criterion, RunnerError> {
    let mut ok = true;
    let mut parts = Vec::new();
    for regime in [Regime::A, Regime::B, Regime::C] {
        let (o, e) = round_trip(regime)?;
        ok &= o >= 1.9;
        parts.push(format!("{regime} {o:.2} (finest {:.1e})", e[2]));
    }
    Ok(criterion("C7", "initial data round trip", ok, parts.join(", ")))
}
