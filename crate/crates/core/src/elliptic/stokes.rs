//! Variable-viscosity Stokes solver.
//!
//! Unknowns are the interior faces; boundary normal faces and tangential
//! ghosts are produced by the boundary condition. The pressure Schur
//! complement is solved by a flexible conjugate-gradient (Uzawa) iteration
//! whose residual is exactly the divergence defect of the tracked velocity.

use super::krylov::{dot, pcg, remove_mean, wnorm, Stop};
use super::scalar_op::{FivePoint, WallKind};
use super::{compat_tol, EllipticError, SolveReport, SolverSettings};
use crate::grid::{apply_scalar_bc, apply_vector_bc, divergence, BoundarySpec, Grid, Location, ScalarField, VectorField};

/// Operator data for `mass * u - div(2 mu D(u)) + grad p = f`, `div u = g`.
#[derive(Debug, Clone, Copy)]
pub struct StokesSystem<'a> {
    /// Cell-centered viscosity, ghosts filled.
    pub mu: &'a ScalarField,
    /// Optional zeroth-order face coefficient (for example `rho_f / dt`).
    pub mass: Option<&'a VectorField>,
    pub bc: &'a BoundarySpec,
}

#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub velocity: VectorField,
    /// Zero-mean pressure, ghosts mirrored.
    pub pressure: ScalarField,
    pub report: SolveReport,
    pub inner_iterations: usize,
}

/// Viscosity at corners: mean of the four surrounding cells (ghosts included).
pub fn corner_viscosity(mu: &ScalarField) -> ScalarField {
    let mut c = ScalarField::corners(&mu.grid);
    for j in 0..=mu.grid.ny as isize {
        for i in 0..=mu.grid.nx as isize {
            let v = 0.25 * (mu.at(i, j) + mu.at(i - 1, j) + mu.at(i, j - 1) + mu.at(i - 1, j - 1));
            c.set(i, j, v);
        }
    }
    c
}

/// `-div(2 mu D(v))` on interior faces of a ghost-filled field; boundary
/// normal faces of the result are zero.
pub fn viscous_operator(mu: &ScalarField, v: &VectorField) -> VectorField {
    let mc = corner_viscosity(mu);
    viscous_with_corners(mu, &mc, v)
}

fn viscous_with_corners(mu: &ScalarField, mc: &ScalarField, v: &VectorField) -> VectorField {
    let g = v.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let (hx, hy) = (g.hx, g.hy);
    let w = g.nx;
    let mut txx = vec![0.0; g.nx * g.ny];
    let mut tyy = vec![0.0; g.nx * g.ny];
    for j in 0..ny {
        for i in 0..nx {
            let k = j as usize * w + i as usize;
            let m = 2.0 * mu.at(i, j);
            txx[k] = m * (v.x.at(i + 1, j) - v.x.at(i, j)) / hx;
            tyy[k] = m * (v.y.at(i, j + 1) - v.y.at(i, j)) / hy;
        }
    }
    let wc = g.nx + 1;
    let mut txy = vec![0.0; (g.nx + 1) * (g.ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            let s = (v.x.at(i, j) - v.x.at(i, j - 1)) / hy + (v.y.at(i, j) - v.y.at(i - 1, j)) / hx;
            txy[j as usize * wc + i as usize] = mc.at(i, j) * s;
        }
    }
    let mut out = VectorField::zeros(&g);
    for j in 0..ny {
        for i in 1..nx {
            let (iu, ju) = (i as usize, j as usize);
            let val = -((txx[ju * w + iu] - txx[ju * w + iu - 1]) / hx
                + (txy[(ju + 1) * wc + iu] - txy[ju * wc + iu]) / hy);
            out.x.set(i, j, val);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let (iu, ju) = (i as usize, j as usize);
            let val = -((txy[ju * wc + iu + 1] - txy[ju * wc + iu]) / hx
                + (tyy[ju * w + iu] - tyy[(ju - 1) * w + iu]) / hy);
            out.y.set(i, j, val);
        }
    }
    out
}

/// Flat layout of interior face unknowns: first components then second.
#[derive(Debug, Clone, Copy)]
struct Faces {
    nx: usize,
    ny: usize,
}

impl Faces {
    fn n1(&self) -> usize {
        (self.nx - 1) * self.ny
    }
    fn len(&self) -> usize {
        self.n1() + self.nx * (self.ny - 1)
    }
    #[inline]
    fn i1(&self, i: usize, j: usize) -> usize {
        j * (self.nx - 1) + (i - 1)
    }
    #[inline]
    fn i2(&self, i: usize, j: usize) -> usize {
        self.n1() + (j - 1) * self.nx + i
    }
    fn gather(&self, v: &VectorField, out: &mut [f64]) {
        for j in 0..self.ny {
            for i in 1..self.nx {
                out[self.i1(i, j)] = v.x.at(i as isize, j as isize);
            }
        }
        for j in 1..self.ny {
            for i in 0..self.nx {
                out[self.i2(i, j)] = v.y.at(i as isize, j as isize);
            }
        }
    }
    fn scatter(&self, x: &[f64], v: &mut VectorField) {
        for j in 0..self.ny {
            for i in 1..self.nx {
                v.x.set(i as isize, j as isize, x[self.i1(i, j)]);
            }
        }
        for j in 1..self.ny {
            for i in 0..self.nx {
                v.y.set(i as isize, j as isize, x[self.i2(i, j)]);
            }
        }
    }
}

/// Homogeneous ghost reflection factor at each wall point, read off by
/// filling a unit tangential row.
fn wall_factors(grid: &Grid, bc: &BoundarySpec) -> Result<[Vec<f64>; 4], EllipticError> {
    let mut probe = VectorField::zeros(grid);
    probe.x.data_mut().iter_mut().for_each(|v| *v = 1.0);
    probe.y.data_mut().iter_mut().for_each(|v| *v = 1.0);
    apply_vector_bc(&mut probe, bc)?;
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let bottom = (0..=nx).map(|i| probe.x.at(i, -1)).collect();
    let top = (0..=nx).map(|i| probe.x.at(i, ny)).collect();
    let left = (0..=ny).map(|j| probe.y.at(-1, j)).collect();
    let right = (0..=ny).map(|j| probe.y.at(nx, j)).collect();
    Ok([bottom, top, left, right])
}

struct Momentum<'a> {
    grid: Grid,
    faces: Faces,
    mu: &'a ScalarField,
    mc: ScalarField,
    mass: Vec<f64>,
    hom: BoundarySpec,
    inv_diag: Vec<f64>,
}

impl<'a> Momentum<'a> {
    fn new(sys: &StokesSystem<'a>) -> Result<Self, EllipticError> {
        let grid = sys.mu.grid;
        let faces = Faces { nx: grid.nx, ny: grid.ny };
        let hom = sys.bc.homogeneous();
        let mc = corner_viscosity(sys.mu);
        let mut mass = vec![0.0; faces.len()];
        if let Some(m) = sys.mass {
            faces.gather(m, &mut mass);
        }
        let [fb, ft, fl, fr] = wall_factors(&grid, &hom)?;
        let (ax, ay) = (1.0 / (grid.hx * grid.hx), 1.0 / (grid.hy * grid.hy));
        let mut diag = mass.clone();
        let (nx, ny) = (grid.nx, grid.ny);
        let mu = sys.mu;
        for j in 0..ny {
            for i in 1..nx {
                let (ii, jj) = (i as isize, j as isize);
                let mut d = 2.0 * ax * (mu.at(ii - 1, jj) + mu.at(ii, jj));
                let top = if j + 1 == ny { 1.0 - ft[i] } else { 1.0 };
                let bot = if j == 0 { 1.0 - fb[i] } else { 1.0 };
                d += ay * (mc.at(ii, jj + 1) * top + mc.at(ii, jj) * bot);
                diag[faces.i1(i, j)] += d;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let (ii, jj) = (i as isize, j as isize);
                let mut d = 2.0 * ay * (mu.at(ii, jj - 1) + mu.at(ii, jj));
                let right = if i + 1 == nx { 1.0 - fr[j] } else { 1.0 };
                let left = if i == 0 { 1.0 - fl[j] } else { 1.0 };
                d += ax * (mc.at(ii + 1, jj) * right + mc.at(ii, jj) * left);
                diag[faces.i2(i, j)] += d;
            }
        }
        let inv_diag = diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
        Ok(Self {
            grid,
            faces,
            mu: sys.mu,
            mc,
            mass,
            hom,
            inv_diag,
        })
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut v = VectorField::zeros(&self.grid);
        self.faces.scatter(x, &mut v);
        // homogeneous specs never fail on a vector field
        apply_vector_bc(&mut v, &self.hom).expect("homogeneous velocity bc");
        let k = viscous_with_corners(self.mu, &self.mc, &v);
        self.faces.gather(&k, y);
        for (yk, (m, xk)) in y.iter_mut().zip(self.mass.iter().zip(x)) {
            *yk += m * xk;
        }
    }

    fn solve(&self, b: &[f64], x: &mut [f64], settings: &SolverSettings) -> SolveReport {
        let stop = Stop {
            target: settings.target(wnorm(b, self.grid.cell_area())),
            max_iter: settings.iteration_cap(&self.grid),
            weight: self.grid.cell_area(),
        };
        pcg(
            |v, y| self.apply(v, y),
            |r, z| {
                for k in 0..r.len() {
                    z[k] = self.inv_diag[k] * r[k];
                }
            },
            b,
            x,
            stop,
            false,
        )
    }

    /// Interior-face pressure gradient.
    fn grad(&self, p: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for j in 0..ny {
            for i in 1..nx {
                out[self.faces.i1(i, j)] = (p[j * nx + i] - p[j * nx + i - 1]) / self.grid.hx;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                out[self.faces.i2(i, j)] = (p[j * nx + i] - p[(j - 1) * nx + i]) / self.grid.hy;
            }
        }
    }

    /// Cell divergence of interior-face data (boundary normals zero).
    fn div(&self, x: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let f = &self.faces;
        for j in 0..ny {
            for i in 0..nx {
                let e = if i + 1 < nx { x[f.i1(i + 1, j)] } else { 0.0 };
                let w = if i > 0 { x[f.i1(i, j)] } else { 0.0 };
                let n = if j + 1 < ny { x[f.i2(i, j + 1)] } else { 0.0 };
                let s = if j > 0 { x[f.i2(i, j)] } else { 0.0 };
                out[j * nx + i] = (e - w) / self.grid.hx + (n - s) / self.grid.hy;
            }
        }
    }
}

/// Pressure preconditioner: viscosity scaling plus, for unsteady systems,
/// an approximate inverse of `-div(mass^-1 grad)`.
struct SchurPrecond {
    mu: Vec<f64>,
    inertial: Option<FivePoint>,
    grid: Grid,
}

impl SchurPrecond {
    fn new(sys: &StokesSystem) -> Self {
        let grid = sys.mu.grid;
        let inertial = sys.mass.map(|m| {
            let mut op = FivePoint::zeros(&grid);
            let mut dummy = vec![0.0; grid.cell_count()];
            op.add_diffusion(
                &grid,
                |i, j| 1.0 / m.x.at(i as isize, j as isize).max(1e-300),
                |i, j| 1.0 / m.y.at(i as isize, j as isize).max(1e-300),
                WallKind::Neumann,
                &mut dummy,
            );
            op
        });
        Self {
            mu: sys.mu.interior_vec(),
            inertial,
            grid,
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for k in 0..r.len() {
            z[k] = self.mu[k] * r[k];
        }
        if let Some(op) = &self.inertial {
            let mut y = vec![0.0; r.len()];
            let loose = SolverSettings {
                rel_tol: 1e-3,
                abs_tol: 1e-300,
                max_iter: Some(200),
            };
            let mut rr = r.to_vec();
            remove_mean(&mut rr);
            super::solve_assembled(op, &rr, &mut y, true, &self.grid, &loose, wnorm(&rr, self.grid.cell_area()));
            for k in 0..r.len() {
                z[k] += y[k];
            }
        }
        remove_mean(z);
    }
}

/// Steady Stokes: `-div(2 mu D(u)) + grad p = rhs`, `div u = div_target`.
pub fn solve_stokes(
    mu: &ScalarField,
    rhs: &VectorField,
    div_target: &ScalarField,
    bc: &BoundarySpec,
    settings: &SolverSettings,
) -> Result<StokesSolution, EllipticError> {
    let sys = StokesSystem { mu, mass: None, bc };
    solve_stokes_with(&sys, rhs, div_target, None, settings)
}

pub fn solve_stokes_with(
    sys: &StokesSystem,
    rhs: &VectorField,
    div_target: &ScalarField,
    pressure_guess: Option<&ScalarField>,
    settings: &SolverSettings,
) -> Result<StokesSolution, EllipticError> {
    sys.mu.expect(Location::Center)?;
    div_target.expect(Location::Center)?;
    let grid = sys.mu.grid;
    if !grid.same_mesh(&rhs.grid) || !grid.same_mesh(&div_target.grid) {
        return Err(crate::grid::GridError::GridMismatch.into());
    }
    if matches!(sys.bc, BoundarySpec::NeumannZero | BoundarySpec::DirichletConst(_)) {
        return Err(EllipticError::UnsupportedBc(sys.bc.name()));
    }
    let (lo, _) = sys.mu.min_max();
    if !(lo > 0.0) {
        return Err(EllipticError::BadViscosity { value: lo });
    }
    let area = grid.cell_area();
    let mom = Momentum::new(sys)?;
    let faces = mom.faces;
    let ncell = grid.cell_count();

    // boundary data moved to the right-hand side
    let mut lift = VectorField::zeros(&grid);
    apply_vector_bc(&mut lift, sys.bc)?;
    let k_lift = viscous_with_corners(sys.mu, &mom.mc, &lift);
    let mut f = vec![0.0; faces.len()];
    let mut tmp = vec![0.0; faces.len()];
    faces.gather(rhs, &mut f);
    faces.gather(&k_lift, &mut tmp);
    for k in 0..f.len() {
        f[k] -= tmp[k];
    }
    let div_lift = divergence(&lift);
    let mut g: Vec<f64> = div_target
        .interior_vec()
        .iter()
        .zip(div_lift.interior_vec())
        .map(|(a, b)| a - b)
        .collect();
    let mean = g.iter().sum::<f64>() / ncell as f64;
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = compat_tol(settings, scale);
    if mean.abs() > tol {
        return Err(EllipticError::Incompatible { mean, tol });
    }
    remove_mean(&mut g);

    let inner = settings.tightened(1e-2);
    let precond = SchurPrecond::new(sys);
    let mut inner_its = 0usize;
    let mut p = match pressure_guess {
        Some(pg) => pg.interior_vec(),
        None => vec![0.0; ncell],
    };
    remove_mean(&mut p);

    let mut x = vec![0.0; faces.len()];
    let mut gp = vec![0.0; faces.len()];
    mom.grad(&p, &mut gp);
    let b0: Vec<f64> = f.iter().zip(&gp).map(|(a, b)| a - b).collect();
    let rep = mom.solve(&b0, &mut x, &inner);
    inner_its += rep.iterations;
    if !rep.converged {
        return Err(EllipticError::NotConverged(rep));
    }
    let mut dx = vec![0.0; ncell];
    mom.div(&x, &mut dx);
    let mut r: Vec<f64> = g.iter().zip(&dx).map(|(a, b)| a - b).collect();
    remove_mean(&mut r);
    let res0 = wnorm(&r, area);
    let target = settings.target(res0.max(wnorm(&g, area)));
    let max_outer = settings.iteration_cap(&grid);
    let mut res = res0;
    let mut outer = 0;
    let mut restarts = 0;
    // restart from the recomputed defect when the recurrence drifted
    while res > target && restarts < 4 && outer < max_outer {
        restarts += 1;
        if restarts > 1 {
            mom.div(&x, &mut dx);
            r = g.iter().zip(&dx).map(|(a, b)| a - b).collect();
            remove_mean(&mut r);
            res = wnorm(&r, area);
            if res <= target {
                break;
            }
        }
        let mut z = vec![0.0; ncell];
        precond.apply(&r, &mut z);
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        let mut y = vec![0.0; faces.len()];
        let mut sd = vec![0.0; ncell];
        while outer < max_outer {
            outer += 1;
            mom.grad(&d, &mut gp);
            y.iter_mut().for_each(|v| *v = 0.0);
            let rep = mom.solve(&gp, &mut y, &inner);
            inner_its += rep.iterations;
            if !rep.converged {
                return Err(EllipticError::NotConverged(rep));
            }
            mom.div(&y, &mut sd);
            sd.iter_mut().for_each(|v| *v = -*v);
            remove_mean(&mut sd);
            let dsd = dot(&d, &sd);
            if !(dsd > 0.0) {
                break;
            }
            let alpha = rz / dsd;
            let r_old = r.clone();
            for k in 0..ncell {
                p[k] += alpha * d[k];
                r[k] -= alpha * sd[k];
            }
            for k in 0..x.len() {
                x[k] -= alpha * y[k];
            }
            remove_mean(&mut r);
            res = wnorm(&r, area);
            if res <= target {
                break;
            }
            precond.apply(&r, &mut z);
            let num: f64 = z.iter().zip(r.iter().zip(&r_old)).map(|(zk, (a, b))| zk * (a - b)).sum();
            let beta = (num / rz).max(0.0);
            rz = dot(&r, &z);
            for k in 0..ncell {
                d[k] = z[k] + beta * d[k];
            }
        }
        if res <= target {
            // confirm against the recomputed defect
            mom.div(&x, &mut dx);
            let mut rt: Vec<f64> = g.iter().zip(&dx).map(|(a, b)| a - b).collect();
            remove_mean(&mut rt);
            res = wnorm(&rt, area);
        }
    }
    // independent recomputation of the divergence defect
    mom.div(&x, &mut dx);
    let mut rt: Vec<f64> = g.iter().zip(&dx).map(|(a, b)| a - b).collect();
    remove_mean(&mut rt);
    let final_res = wnorm(&rt, area);
    let report = SolveReport {
        iterations: outer,
        final_residual: final_res,
        converged: final_res <= target * 1.0001 + 1e-300,
    };
    if !report.converged {
        return Err(EllipticError::NotConverged(report));
    }
    remove_mean(&mut p);
    let mut velocity = lift;
    faces.scatter(&x, &mut velocity);
    apply_vector_bc(&mut velocity, sys.bc)?;
    let mut pressure = ScalarField::centers(&grid);
    pressure.set_interior(&p);
    apply_scalar_bc(&mut pressure, &BoundarySpec::NeumannZero)?;
    Ok(StokesSolution {
        velocity,
        pressure,
        report,
        inner_iterations: inner_its,
    })
}

/// Divergence of a velocity restricted to the physical cells.
pub fn interior_divergence(v: &VectorField) -> ScalarField {
    divergence(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gradient_full, inner_vector, lp_norm, Friction, Regime, WallTrace};
    use std::f64::consts::PI;

    fn unit_mu(g: &Grid) -> ScalarField {
        ScalarField::constant(g, Location::Center, 1.0)
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = Grid::unit(12, Regime::C).unwrap();
        let s = solve_stokes(
            &unit_mu(&g),
            &VectorField::zeros(&g),
            &ScalarField::centers(&g),
            &BoundarySpec::NoSlip,
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(s.velocity.max_abs(), 0.0);
        assert_eq!(lp_norm(&s.pressure, f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn gradient_force_is_absorbed_by_pressure() {
        let g = Grid::unit(32, Regime::C).unwrap();
        let phi = ScalarField::from_fn(&g, Location::Center, |x, y| (PI * x).cos() * (2.0 * PI * y).sin() + x * x);
        let rhs = gradient_full(&phi).unwrap();
        let s = solve_stokes(&unit_mu(&g), &rhs, &ScalarField::centers(&g), &BoundarySpec::NoSlip, &SolverSettings::default())
            .unwrap();
        assert!(s.velocity.max_abs() < 1e-8, "{}", s.velocity.max_abs());
        let mut expect = phi.clone();
        expect.shift(-phi.mean());
        let d = s.pressure.zip_with(&expect, |a, b| a - b).unwrap();
        assert!(lp_norm(&d, 2.0).unwrap() < 1e-8);
    }

    #[test]
    fn viscous_operator_is_symmetric_under_friction() {
        let g = Grid::new(9, 7, 1.0, 0.8, Regime::A).unwrap();
        let mu = ScalarField::from_fn(&g, Location::Center, |x, y| 1.0 + 0.5 * (3.0 * x + y).sin());
        let bc = BoundarySpec::slip(Friction::Constant(2.0));
        let mut a = VectorField::from_fn(&g, |x, y| ((5.0 * x * y).sin(), x - y * y));
        let mut b = VectorField::from_fn(&g, |x, y| (y.cos() * x, (2.0 * x).sin() + y));
        apply_vector_bc(&mut a, &bc).unwrap();
        apply_vector_bc(&mut b, &bc).unwrap();
        let ka = viscous_operator(&mu, &a);
        let kb = viscous_operator(&mu, &b);
        let (ab, ba) = (inner_vector(&ka, &b).unwrap(), inner_vector(&kb, &a).unwrap());
        assert!((ab - ba).abs() < 1e-10 * ab.abs().max(1.0), "{ab} {ba}");
        assert!(inner_vector(&ka, &a).unwrap() > 0.0);
    }

    #[test]
    fn lid_profile_is_carried() {
        let g = Grid::unit(16, Regime::C).unwrap();
        let trace = WallTrace::from_fn(&g, |_, y| (if y > 0.999 { 1.0 } else { 0.0 }, 0.0));
        let bc = BoundarySpec::VelocityProfile(trace.clone());
        let s = solve_stokes(&unit_mu(&g), &VectorField::zeros(&g), &ScalarField::centers(&g), &bc, &SolverSettings::default())
            .unwrap();
        let d = divergence(&s.velocity);
        assert!(lp_norm(&d, f64::INFINITY).unwrap() < 1e-8);
        let back = WallTrace::of_field(&s.velocity);
        for (a, b) in back.top_tangential.iter().zip(&trace.top_tangential) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unsteady_system_matches_residual() {
        let g = Grid::unit(16, Regime::A).unwrap();
        let mu = ScalarField::from_fn(&g, Location::Center, |x, _| 0.1 + 0.05 * x);
        let mass = VectorField::from_fn(&g, |x, y| (100.0 * (1.0 + x * y), 100.0 * (1.0 + x * y)));
        let bc = BoundarySpec::slip(Friction::Constant(1.0));
        let rhs = VectorField::from_fn(&g, |x, y| ((PI * y).sin(), x * (1.0 - x)));
        let sys = StokesSystem { mu: &mu, mass: Some(&mass), bc: &bc };
        let st = SolverSettings::default();
        let s = solve_stokes_with(&sys, &rhs, &ScalarField::centers(&g), None, &st).unwrap();
        let k = viscous_operator(&mu, &s.velocity);
        let gp = gradient_full(&s.pressure).unwrap();
        let mut worst: f64 = 0.0;
        for (i, j) in s.velocity.x_physical().filter(|(i, _)| *i > 0 && *i < 16) {
            let r = mass.x.at(i, j) * s.velocity.x.at(i, j) + k.x.at(i, j) + gp.x.at(i, j) - rhs.x.at(i, j);
            worst = worst.max(r.abs());
        }
        assert!(worst < 1e-7, "{worst}");
        assert!(lp_norm(&divergence(&s.velocity), 2.0).unwrap() < 1e-9);
    }
}
