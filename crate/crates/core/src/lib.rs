//! Staggered-grid simulator for the two-dimensional low-Mach combustion
//! model with mass diffusion.

pub mod grid;
pub mod elliptic;
pub mod model;
pub mod diagnostics;
pub mod mms;
pub mod runner;
