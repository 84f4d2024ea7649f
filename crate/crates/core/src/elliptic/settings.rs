use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `None` means `10 * nx * ny` for the grid being solved on.
    pub max_iter: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_iter: None,
        }
    }
}

impl SolverSettings {
    pub fn new(rel_tol: f64, abs_tol: f64, max_iter: Option<usize>) -> Option<Self> {
        let ok = rel_tol > 0.0 && abs_tol > 0.0 && max_iter.map_or(true, |m| m >= 1);
        ok.then_some(Self {
            rel_tol,
            abs_tol,
            max_iter,
        })
    }

    pub fn iteration_cap(&self, grid: &Grid) -> usize {
        self.max_iter.unwrap_or(10 * grid.nx * grid.ny)
    }

    /// Residual target for a right-hand side of size `b_norm`.
    pub fn target(&self, b_norm: f64) -> f64 {
        (self.rel_tol * b_norm).max(self.abs_tol)
    }

    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}
