//! Dense reference stepper for constant-density, constant-viscosity flow
//! on the MAC mesh: backward Euler with fixed-point advection, each
//! iterate a bordered saddle-point system solved by a stored LU factor.
//!
//! Written against plain index arithmetic so that it shares no operator
//! code with the main stepper.

use nalgebra::{DMatrix, DVector, LU, Dyn};

/// Boundary treatment of the tangential velocity: ghost = `factor * interior`.
#[derive(Debug, Clone, Copy)]
pub struct Walls {
    pub factor: f64,
}

pub struct Oracle {
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    mu: f64,
    walls: Walls,
    dt: f64,
    lu: Option<LU<f64, Dyn, Dyn>>,
}

/// Interior face velocities: first `(nx - 1) * ny` x-faces, then
/// `nx * (ny - 1)` y-faces.
impl Oracle {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, mu: f64, walls: Walls) -> Self {
        Self { nx, ny, hx: lx / nx as f64, hy: ly / ny as f64, mu, walls, dt: f64::NAN, lu: None }
    }

    pub fn n_vel(&self) -> usize {
        (self.nx - 1) * self.ny + self.nx * (self.ny - 1)
    }

    fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn ix(&self, i: usize, j: usize) -> usize {
        j * (self.nx - 1) + (i - 1)
    }

    pub fn iy(&self, i: usize, j: usize) -> usize {
        (self.nx - 1) * self.ny + (j - 1) * self.nx + i
    }

    /// x-velocity at face `(i, j)`, `0 <= i <= nx`, `-1 <= j <= ny`.
    fn ux(&self, u: &[f64], i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        if i <= 0 || i >= nx {
            return 0.0;
        }
        if j < 0 {
            return self.walls.factor * self.ux(u, i, 0);
        }
        if j >= ny {
            return self.walls.factor * self.ux(u, i, ny - 1);
        }
        u[self.ix(i as usize, j as usize)]
    }

    /// y-velocity at face `(i, j)`, `-1 <= i <= nx`, `0 <= j <= ny`.
    fn uy(&self, u: &[f64], i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        if j <= 0 || j >= ny {
            return 0.0;
        }
        if i < 0 {
            return self.walls.factor * self.uy(u, 0, j);
        }
        if i >= nx {
            return self.walls.factor * self.uy(u, nx - 1, j);
        }
        u[self.iy(i as usize, j as usize)]
    }

    /// `-mu lap u - mu grad div u`, i.e. `-div(2 mu D(u))` for constant `mu`,
    /// from cell and corner stresses.
    fn viscous(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let (hx, hy, m) = (self.hx, self.hy, self.mu);
        let sxx = |i: isize, j: isize| 2.0 * m * (self.ux(u, i + 1, j) - self.ux(u, i, j)) / hx;
        let syy = |i: isize, j: isize| 2.0 * m * (self.uy(u, i, j + 1) - self.uy(u, i, j)) / hy;
        let sxy = |i: isize, j: isize| {
            m * ((self.ux(u, i, j) - self.ux(u, i, j - 1)) / hy + (self.uy(u, i, j) - self.uy(u, i - 1, j)) / hx)
        };
        for j in 0..ny {
            for i in 1..nx {
                let v = (sxx(i, j) - sxx(i - 1, j)) / hx + (sxy(i, j + 1) - sxy(i, j)) / hy;
                out[self.ix(i as usize, j as usize)] = -v;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let v = (sxy(i + 1, j) - sxy(i, j)) / hx + (syy(i, j) - syy(i, j - 1)) / hy;
                out[self.iy(i as usize, j as usize)] = -v;
            }
        }
    }

    /// Centered `(a . grad) a` on interior faces.
    pub fn advection(&self, a: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let (tx, ty) = (0.5 / self.hx, 0.5 / self.hy);
        let mut out = vec![0.0; self.n_vel()];
        for j in 0..ny {
            for i in 1..nx {
                let a2 = 0.25 * (self.uy(a, i - 1, j) + self.uy(a, i, j) + self.uy(a, i - 1, j + 1) + self.uy(a, i, j + 1));
                let d1 = (self.ux(a, i + 1, j) - self.ux(a, i - 1, j)) * tx;
                let d2 = (self.ux(a, i, j + 1) - self.ux(a, i, j - 1)) * ty;
                out[self.ix(i as usize, j as usize)] = self.ux(a, i, j) * d1 + a2 * d2;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                let a1 = 0.25 * (self.ux(a, i, j - 1) + self.ux(a, i + 1, j - 1) + self.ux(a, i, j) + self.ux(a, i + 1, j));
                let d1 = (self.uy(a, i + 1, j) - self.uy(a, i - 1, j)) * tx;
                let d2 = (self.uy(a, i, j + 1) - self.uy(a, i, j - 1)) * ty;
                out[self.iy(i as usize, j as usize)] = a1 * d1 + self.uy(a, i, j) * d2;
            }
        }
        out
    }

    /// Assembles and factors
    /// `[I/dt + K, G, 0; D, 0, 1; 0, 1^T, 0]` (mean-zero pressure).
    fn factor(&mut self, dt: f64) {
        let (nv, nc) = (self.n_vel(), self.n_cells());
        let n = nv + nc + 1;
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut e = vec![0.0; nv];
        let mut col = vec![0.0; nv];
        for c in 0..nv {
            e[c] = 1.0;
            self.viscous(&e, &mut col);
            for r in 0..nv {
                a[(r, c)] = col[r];
            }
            a[(c, c)] += 1.0 / dt;
            // divergence rows
            for j in 0..self.ny as isize {
                for i in 0..self.nx as isize {
                    let d = (self.ux(&e, i + 1, j) - self.ux(&e, i, j)) / self.hx
                        + (self.uy(&e, i, j + 1) - self.uy(&e, i, j)) / self.hy;
                    a[(nv + j as usize * self.nx + i as usize, c)] = d;
                }
            }
            e[c] = 0.0;
        }
        // pressure gradient columns
        let cell = |i: usize, j: usize| nv + j * self.nx + i;
        for j in 0..self.ny {
            for i in 1..self.nx {
                let r = self.ix(i, j);
                a[(r, cell(i, j))] += 1.0 / self.hx;
                a[(r, cell(i - 1, j))] -= 1.0 / self.hx;
            }
        }
        for j in 1..self.ny {
            for i in 0..self.nx {
                let r = self.iy(i, j);
                a[(r, cell(i, j))] += 1.0 / self.hy;
                a[(r, cell(i, j - 1))] -= 1.0 / self.hy;
            }
        }
        for k in 0..nc {
            a[(nv + k, n - 1)] = 1.0;
            a[(n - 1, nv + k)] = 1.0;
        }
        self.lu = Some(a.lu());
        self.dt = dt;
    }

    /// `sqrt(sum h^2 (a - b)^2)` over interior faces.
    pub fn l2_diff(&self, a: &[f64], b: &[f64]) -> f64 {
        (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() * self.hx * self.hy).sqrt()
    }

    /// One backward-Euler step from `u`, iterating the lagged advection to
    /// `tol`. Returns the new velocity and the iteration count.
    pub fn step(&mut self, u: &[f64], dt: f64, tol: f64) -> Option<(Vec<f64>, usize)> {
        if self.lu.is_none() || self.dt != dt {
            self.factor(dt);
        }
        let (nv, nc) = (self.n_vel(), self.n_cells());
        let lu = self.lu.as_ref()?;
        let mut a = u.to_vec();
        for k in 1..=500 {
            let adv = self.advection(&a);
            let mut rhs = DVector::<f64>::zeros(nv + nc + 1);
            for r in 0..nv {
                rhs[r] = u[r] / dt - adv[r];
            }
            let sol = lu.solve(&rhs)?;
            let next: Vec<f64> = sol.iter().take(nv).copied().collect();
            let delta = self.l2_diff(&next, &a);
            a = next;
            if delta <= tol {
                return Some((a, k));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_is_steady_and_divergence_vanishes() {
        let mut o = Oracle::new(6, 5, 1.0, 1.0, 0.1, Walls { factor: -1.0 });
        let u = vec![0.0; o.n_vel()];
        let (next, its) = o.step(&u, 0.01, 1e-14).unwrap();
        assert!(next.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(its, 1);
    }

    #[test]
    fn decays_a_solenoidal_mode() {
        // discrete curl of a corner stream function is exactly solenoidal
        let (nx, ny) = (8, 8);
        let mut o = Oracle::new(nx, ny, 1.0, 1.0, 0.5, Walls { factor: -1.0 });
        let h = 1.0 / nx as f64;
        let s = |i: usize, j: usize| {
            let (x, y) = (i as f64 * h, j as f64 * h);
            (std::f64::consts::PI * x).sin().powi(2) * (std::f64::consts::PI * y).sin().powi(2)
        };
        let mut u = vec![0.0; o.n_vel()];
        for j in 0..ny {
            for i in 1..nx {
                u[o.ix(i, j)] = (s(i, j + 1) - s(i, j)) / h;
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                u[o.iy(i, j)] = -(s(i + 1, j) - s(i, j)) / h;
            }
        }
        let e0 = o.l2_diff(&u, &vec![0.0; u.len()]);
        let (next, _) = o.step(&u, 0.01, 1e-14).unwrap();
        let e1 = o.l2_diff(&next, &vec![0.0; u.len()]);
        assert!(e1 < e0);
    }
}
