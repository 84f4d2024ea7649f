//! The combustion model: parameters, state, the linearized solves of one
//! time step, the fixed-point iteration tying them together and the outer
//! time loop.

mod advance;
mod init;
mod momentum;
mod params;
mod picard;
pub mod state;
pub mod transport;

use thiserror::Error;

use crate::elliptic::EllipticError;
use crate::grid::{Grid, GridError, ScalarField, VectorField};

pub use advance::{advance, AdvanceOutcome, SerrinConfig, Stepper, MAX_HALVINGS};
pub use init::{init_from_velocity, rest_state};
pub use momentum::{advection, face_average, momentum_step_linearized, MomentumUpdate};
pub use params::{ModelParams, MuLaw, StepControls};
pub use picard::{h1_norm, iterate_delta, picard_step, vector_l2, PicardReport};
pub use state::{
    compute_q, compute_v, residual_divergence_constraint, residual_solenoidal, FluidState,
};
pub use transport::mass_step_linearized;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("density {min} dropped below the floor {floor}")]
    DensityFloor { min: f64, floor: f64 },
    #[error("linear solve failed: {0}")]
    Solver(#[from] EllipticError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("state is missing the cached field {0}")]
    MissingCache(&'static str),
    #[error("fixed-point iteration did not converge, deltas {0:?}")]
    PicardDiverged(Vec<f64>),
    #[error("density left its bounds: min {min}, max {max}")]
    BoundsViolated { min: f64, max: f64 },
    #[error("constraint residual {0:e} above tolerance")]
    ConstraintViolated(f64),
    #[error("incompatible initial data: {0}")]
    Compatibility(String),
    #[error("initial density [{min}, {max}] outside [alpha, beta]")]
    InitialBounds { min: f64, max: f64 },
    #[error("time step rejected after repeated halving: {0}")]
    StepRejected(Box<ModelError>),
}

/// Source terms added to the mass and momentum equations, evaluated at the
/// new time level of each step.
pub trait Forcing: Send + Sync {
    fn mass(&self, grid: &Grid, t: f64) -> Option<ScalarField>;
    fn momentum(&self, grid: &Grid, t: f64) -> Option<VectorField>;
}
