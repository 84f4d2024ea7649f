use std::fmt;

use super::ModelError;
use crate::elliptic::SolverSettings;
use crate::grid::{Friction, Location, ScalarField};

/// Viscosity as a function of density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuLaw {
    Constant(f64),
    /// `mu0 + mu1 * s`
    Affine(f64, f64),
    /// `mu0 * exp(k * s)`
    Exp(f64, f64),
}

impl MuLaw {
    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            MuLaw::Constant(m) => m,
            MuLaw::Affine(m0, m1) => m0 + m1 * s,
            MuLaw::Exp(m0, k) => m0 * (k * s).exp(),
        }
    }

    #[inline]
    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            MuLaw::Constant(_) => 0.0,
            MuLaw::Affine(_, m1) => m1,
            MuLaw::Exp(m0, k) => m0 * k * (k * s).exp(),
        }
    }

    /// Smallest value on `[lo, hi]` (each law is monotone).
    pub fn min_on(&self, lo: f64, hi: f64) -> f64 {
        self.value(lo).min(self.value(hi))
    }

    pub fn max_on(&self, lo: f64, hi: f64) -> f64 {
        self.value(lo).max(self.value(hi))
    }
}

impl fmt::Display for MuLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuLaw::Constant(m) => write!(f, "constant({m})"),
            MuLaw::Affine(a, b) => write!(f, "affine({a}, {b})"),
            MuLaw::Exp(a, k) => write!(f, "exp({a}, {k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub c0: f64,
    pub mu_law: MuLaw,
    pub alpha: f64,
    pub beta: f64,
    pub rho_tilde: f64,
    pub friction: Friction,
}

impl ModelParams {
    /// Returns every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            v.push(format!("c0 must be positive, got {}", self.c0));
        }
        if !(self.alpha > 0.0) {
            v.push(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.alpha <= self.beta) {
            v.push(format!("alpha ({}) must not exceed beta ({})", self.alpha, self.beta));
        }
        if !(self.alpha <= self.rho_tilde && self.rho_tilde <= self.beta) {
            v.push(format!(
                "rho_tilde ({}) must lie in [alpha, beta] = [{}, {}]",
                self.rho_tilde, self.alpha, self.beta
            ));
        }
        if !(self.mu_law.min_on(self.alpha, self.beta) > 0.0) {
            v.push(format!("viscosity law {} is not positive on [alpha, beta]", self.mu_law));
        }
        if let Friction::Constant(b) = self.friction {
            if !(b >= 0.0) {
                v.push(format!("friction must be nonnegative, got {b}"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidParams(v.join("; ")))
        }
    }

    pub fn mu_min(&self) -> f64 {
        self.mu_law.min_on(self.alpha, self.beta)
    }

    /// Viscosity at cell centers; ghosts come from the density ghosts.
    pub fn viscosity(&self, rho: &ScalarField) -> ScalarField {
        debug_assert_eq!(rho.loc, Location::Center);
        let floor = 0.5 * self.mu_min();
        rho.map(|r| self.mu_law.value(r).max(floor))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControls {
    pub dt: f64,
    pub pic_tol: f64,
    pub pic_max: usize,
    pub constraint_tol: f64,
    pub solver: SolverSettings,
}

impl StepControls {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            pic_tol: 1e-9,
            pic_max: 50,
            constraint_tol: 1e-7,
            solver: SolverSettings {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                max_iter: None,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut v = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            v.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.pic_tol > 0.0) {
            v.push(format!("pic_tol must be positive, got {}", self.pic_tol));
        }
        if self.pic_max == 0 {
            v.push("pic_max must be at least 1".to_string());
        }
        if !(self.constraint_tol > 0.0) {
            v.push(format!("constraint_tol must be positive, got {}", self.constraint_tol));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidParams(v.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Constant(1.0),
            alpha: 1.0,
            beta: 2.0,
            rho_tilde: 1.5,
            friction: Friction::Zero,
        }
    }

    #[test]
    fn laws_and_derivatives() {
        let l = MuLaw::Exp(0.5, 2.0);
        let h = 1e-6;
        let fd = (l.value(1.0 + h) - l.value(1.0 - h)) / (2.0 * h);
        assert!((fd - l.derivative(1.0)).abs() < 1e-6);
        assert_eq!(MuLaw::Affine(1.0, 2.0).value(3.0), 7.0);
    }

    #[test]
    fn collects_all_violations() {
        let p = ModelParams {
            c0: -1.0,
            alpha: 3.0,
            beta: 2.0,
            ..base()
        };
        let v = p.violations();
        assert!(v.len() >= 3, "{v:?}");
        assert!(v.iter().any(|m| m.contains("alpha") && m.contains("beta")));
        assert!(base().validate().is_ok());
        let bad_mu = ModelParams {
            mu_law: MuLaw::Affine(1.0, -1.0),
            ..base()
        };
        assert!(bad_mu.validate().is_err());
    }
}
