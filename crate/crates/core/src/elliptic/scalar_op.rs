//! Assembled five-point operators on cell-centered unknowns.

use crate::grid::{Grid, ScalarField};

/// Which neighbor of a cell a coefficient couples to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    W,
    E,
    S,
    N,
}

/// Boundary treatment of a diffusion term on the wall faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WallKind {
    /// Zero flux through the wall.
    Neumann,
    /// Wall value `g`: the ghost is eliminated as `2g - interior`.
    Dirichlet(f64),
}

/// Row-major (x fastest) five-point operator on the `nx * ny` cells.
/// Boundary conditions are folded in; couplings across the wall are zero.
#[derive(Debug, Clone)]
pub struct FivePoint {
    pub nx: usize,
    pub ny: usize,
    pub diag: Vec<f64>,
    pub w: Vec<f64>,
    pub e: Vec<f64>,
    pub s: Vec<f64>,
    pub n: Vec<f64>,
}

impl FivePoint {
    pub fn zeros(grid: &Grid) -> Self {
        let m = grid.cell_count();
        Self {
            nx: grid.nx,
            ny: grid.ny,
            diag: vec![0.0; m],
            w: vec![0.0; m],
            e: vec![0.0; m],
            s: vec![0.0; m],
            n: vec![0.0; m],
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn add_diag(&mut self, k: usize, v: f64) {
        self.diag[k] += v;
    }

    pub fn add_off(&mut self, k: usize, dir: Dir, v: f64) {
        match dir {
            Dir::W => self.w[k] += v,
            Dir::E => self.e[k] += v,
            Dir::S => self.s[k] += v,
            Dir::N => self.n[k] += v,
        }
    }

    /// Adds `-div(k grad .)` with face coefficients `kx(i, j)` on x-face
    /// `(i, j)` and `ky(i, j)` on y-face `(i, j)`. Dirichlet wall data go to
    /// `rhs`.
    pub fn add_diffusion(
        &mut self,
        grid: &Grid,
        kx: impl Fn(usize, usize) -> f64,
        ky: impl Fn(usize, usize) -> f64,
        wall: WallKind,
        rhs: &mut [f64],
    ) {
        let (nx, ny) = (grid.nx, grid.ny);
        let (ax, ay) = (1.0 / (grid.hx * grid.hx), 1.0 / (grid.hy * grid.hy));
        for j in 0..ny {
            for i in 0..=nx {
                let c = kx(i, j) * ax;
                if i > 0 && i < nx {
                    let (l, r) = (self.idx(i - 1, j), self.idx(i, j));
                    self.diag[l] += c;
                    self.diag[r] += c;
                    self.e[l] -= c;
                    self.w[r] -= c;
                } else if let WallKind::Dirichlet(g) = wall {
                    let k = if i == 0 { self.idx(0, j) } else { self.idx(nx - 1, j) };
                    self.diag[k] += 2.0 * c;
                    rhs[k] += 2.0 * c * g;
                }
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                let c = ky(i, j) * ay;
                if j > 0 && j < ny {
                    let (b, t) = (self.idx(i, j - 1), self.idx(i, j));
                    self.diag[b] += c;
                    self.diag[t] += c;
                    self.n[b] -= c;
                    self.s[t] -= c;
                } else if let WallKind::Dirichlet(g) = wall {
                    let k = if j == 0 { self.idx(i, 0) } else { self.idx(i, ny - 1) };
                    self.diag[k] += 2.0 * c;
                    rhs[k] += 2.0 * c * g;
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nx = self.nx;
        for j in 0..self.ny {
            for i in 0..nx {
                let k = j * nx + i;
                let mut v = self.diag[k] * x[k];
                if i > 0 {
                    v += self.w[k] * x[k - 1];
                }
                if i + 1 < nx {
                    v += self.e[k] * x[k + 1];
                }
                if j > 0 {
                    v += self.s[k] * x[k - nx];
                }
                if j + 1 < self.ny {
                    v += self.n[k] * x[k + nx];
                }
                y[k] = v;
            }
        }
    }

    pub fn jacobi(&self) -> Vec<f64> {
        self.diag.iter().map(|d| if *d != 0.0 { 1.0 / d } else { 1.0 }).collect()
    }

    /// True when the off-diagonals are nonpositive and every row is weakly
    /// diagonally dominant (an M-matrix pattern).
    pub fn is_m_matrix(&self) -> bool {
        (0..self.len()).all(|k| {
            let off = [self.w[k], self.e[k], self.s[k], self.n[k]];
            off.iter().all(|c| *c <= 0.0) && self.diag[k] + off.iter().sum::<f64>() >= -1e-12 * self.diag[k].abs()
        })
    }
}

pub fn cells_of(f: &ScalarField) -> Vec<f64> {
    f.interior_vec()
}

pub fn field_from_cells(grid: &Grid, v: &[f64]) -> ScalarField {
    let mut f = ScalarField::centers(grid);
    f.set_interior(v);
    f
}
