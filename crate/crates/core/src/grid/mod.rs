//! Uniform marker-and-cell grid on a rectangle.
//!
//! Cell centers carry scalars (density, pressure), x-faces carry the first
//! velocity component, y-faces the second, and cell corners carry curl-type
//! quantities and stream functions. Every field stores one ghost layer in the
//! directions where its stencils reach across the boundary.

mod bc;
mod field;
mod norms;
mod ops;
pub mod snapshot;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use bc::{
    apply_bc, apply_scalar_bc, apply_vector_bc, BoundarySpec, Friction, GhostFill, Wall, WallTrace,
};
pub use field::{Layer, Location, ScalarField, VectorField};
pub use norms::{
    corner_weight, gradient_energy, h1_seminorm_vector, inner_scalar, inner_vector, lp_norm,
    vector_magnitude_lp, Exponent,
};
pub use ops::{
    curl2d, divergence, gradient, gradient_full, laplacian, perp_gradient, vector_laplacian,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 4 cells per direction, got {nx}x{ny}")]
    Undersized { nx: usize, ny: usize },
    #[error("domain extents must be finite and positive, got {lx} x {ly}")]
    BadExtent { lx: f64, ly: f64 },
    #[error("field location mismatch: expected {expected:?}, found {found:?}")]
    LocationMismatch { expected: Location, found: Location },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("boundary spec {bc} cannot be applied to a {location:?} field")]
    IncompatibleBc { bc: &'static str, location: Location },
    #[error("norm exponent must be >= 1, got {0}")]
    BadExponent(f64),
    #[error("snapshot: {0}")]
    Snapshot(String),
}

/// Boundary regime of the model.
///
/// * `A`: Neumann density, slip velocity with friction.
/// * `B`: Dirichlet density, velocity trace tied to the density gradient.
/// * `C`: Neumann density, no-slip velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    A,
    B,
    C,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::A => "A",
            Regime::B => "B",
            Regime::C => "C",
        }
    }

    /// Regimes whose density obeys a zero-flux wall condition.
    pub fn neumann_density(self) -> bool {
        !matches!(self, Regime::B)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Regime::A),
            "B" | "b" => Ok(Regime::B),
            "C" | "c" => Ok(Regime::C),
            other => Err(format!("unknown regime '{other}' (expected A, B or C)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
    pub regime: Regime,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, regime: Regime) -> Result<Self, GridError> {
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(GridError::BadExtent { lx, ly });
        }
        if nx < 4 || ny < 4 {
            return Err(GridError::Undersized { nx, ny });
        }
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            hx: lx / nx as f64,
            hy: ly / ny as f64,
            regime,
        })
    }

    /// Unit square with `n x n` cells.
    pub fn unit(n: usize, regime: Regime) -> Result<Self, GridError> {
        Self::new(n, n, 1.0, 1.0, regime)
    }

    pub fn with_regime(&self, regime: Regime) -> Self {
        Self { regime, ..*self }
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.lx + self.ly)
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Physical coordinates of a point with integer index `(i, j)` at `loc`.
    pub fn coords(&self, loc: Location, i: isize, j: isize) -> (f64, f64) {
        let (ox, oy) = match loc {
            Location::Center => (0.5, 0.5),
            Location::Corner => (0.0, 0.0),
            Location::XFace => (0.0, 0.5),
            Location::YFace => (0.5, 0.0),
        };
        ((i as f64 + ox) * self.hx, (j as f64 + oy) * self.hy)
    }

    /// True when two grids describe the same mesh (regime tags may differ).
    pub fn same_mesh(&self, other: &Grid) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_from_extents() {
        let g = Grid::new(8, 8, 1.0, 1.0, Regime::C).unwrap();
        assert_eq!(g.hx, 0.125);
        assert_eq!(g.hy, 0.125);
        let g = Grid::new(4, 4, 2.0, 1.0, Regime::A).unwrap();
        assert_eq!(g.hx, 0.5);
        assert_eq!(g.hy, 0.25);
        assert_eq!(g.regime, Regime::A);
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(
            Grid::new(3, 8, 1.0, 1.0, Regime::B),
            Err(GridError::Undersized { nx: 3, ny: 8 })
        );
        assert!(matches!(
            Grid::new(8, 8, f64::NAN, 1.0, Regime::B),
            Err(GridError::BadExtent { .. })
        ));
        assert!(matches!(
            Grid::new(8, 8, 1.0, -2.0, Regime::B),
            Err(GridError::BadExtent { .. })
        ));
    }

    #[test]
    fn regime_parsing() {
        assert_eq!("B".parse::<Regime>().unwrap(), Regime::B);
        assert!("D".parse::<Regime>().is_err());
    }
}
