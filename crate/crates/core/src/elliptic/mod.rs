//! Iterative solvers for the Poisson, Stokes, divergence-correction and
//! boundary-lift problems used by the time stepper.

mod bogovskii;
pub mod krylov;
mod poisson;
pub mod scalar_op;
mod settings;
mod stokes;

use thiserror::Error;

use crate::grid::GridError;

pub use bogovskii::{bogovskii, lift_boundary};
pub use poisson::{check_zero_mean, solve_poisson, solve_poisson_from};
pub use settings::{SolveReport, SolverSettings};
pub use stokes::{
    corner_viscosity, interior_divergence, solve_stokes, solve_stokes_with, viscous_operator, StokesSolution,
    StokesSystem,
};

pub(crate) use poisson::{compat_tol, solve_assembled};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("incompatible data: mean {mean:e} exceeds tolerance {tol:e}")]
    Incompatible { mean: f64, tol: f64 },
    #[error("boundary flux {flux:e} exceeds tolerance {tol:e}")]
    FluxMismatch { flux: f64, tol: f64 },
    #[error("viscosity must be positive, found {value}")]
    BadViscosity { value: f64 },
    #[error("boundary condition {0} is not supported by this solver")]
    UnsupportedBc(&'static str),
    #[error("solver did not converge: {0:?}")]
    NotConverged(SolveReport),
    #[error(transparent)]
    Grid(#[from] GridError),
}
