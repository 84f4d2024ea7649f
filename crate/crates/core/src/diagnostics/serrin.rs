use std::fmt;
use std::str::FromStr;

use super::DiagnosticsError;
use crate::grid::{gradient_full, vector_magnitude_lp, VectorField};
use crate::model::FluidState;

/// Field whose space-time norm is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SerrinTarget {
    GradRho,
    /// The solenoidal part `v`.
    V,
    /// The full velocity `u`.
    U,
}

impl SerrinTarget {
    pub const ALL: [SerrinTarget; 3] = [SerrinTarget::GradRho, SerrinTarget::V, SerrinTarget::U];

    pub fn tag(self) -> &'static str {
        match self {
            SerrinTarget::GradRho => "grad_rho",
            SerrinTarget::V => "v",
            SerrinTarget::U => "u",
        }
    }
}

impl fmt::Display for SerrinTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SerrinTarget {
    type Err = DiagnosticsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| DiagnosticsError::UnknownTarget(s.to_string()))
    }
}

/// Checks `2 < r <= inf`, `s >= 1` and `2/s + 2/r <= 1`.
pub fn validate_exponents(r: f64, s: f64) -> Result<(), DiagnosticsError> {
    let ok = r > 2.0 && s >= 1.0 && 2.0 / s + 2.0 / r <= 1.0;
    if ok {
        Ok(())
    } else {
        Err(DiagnosticsError::BadExponents { r, s })
    }
}

/// Running `L^s(0,T; L^r)` norm of one target field.
///
/// Time integration is left-endpoint: a step of length `dt` starting from
/// the state `x_k` adds `||f(x_k)||_r^s dt`, so the accumulator never
/// decreases. With `s = inf` the running sup is kept instead.
#[derive(Debug, Clone, PartialEq)]
pub struct SerrinAccumulator {
    pub r: f64,
    pub s: f64,
    pub target: SerrinTarget,
    /// `sum ||f||_r^s dt`, or the running sup when `s` is infinite.
    pub integral: f64,
    pub elapsed: f64,
}

impl SerrinAccumulator {
    pub fn new(r: f64, s: f64, target: SerrinTarget) -> Result<Self, DiagnosticsError> {
        validate_exponents(r, s)?;
        Ok(Self { r, s, target, integral: 0.0, elapsed: 0.0 })
    }

    pub fn spatial_norm(&self, state: &FluidState) -> f64 {
        let field: VectorField = match self.target {
            SerrinTarget::GradRho => match gradient_full(&state.rho) {
                Ok(g) => g,
                Err(_) => return f64::NAN,
            },
            SerrinTarget::V => state.v.clone(),
            SerrinTarget::U => state.u.clone(),
        };
        vector_magnitude_lp(&field, self.r).unwrap_or(f64::NAN)
    }

    /// Adds the contribution of a step of length `dt` starting at `left`.
    pub fn accumulate(&mut self, left: &FluidState, dt: f64) {
        let n = self.spatial_norm(left);
        self.add_norm(n, dt);
    }

    pub fn add_norm(&mut self, norm: f64, dt: f64) {
        if self.s.is_infinite() {
            self.integral = self.integral.max(norm);
        } else {
            self.integral += norm.powf(self.s) * dt;
        }
        self.elapsed += dt;
    }

    /// `integral^(1/s)`, or the running sup.
    pub fn value(&self) -> f64 {
        if self.s.is_infinite() {
            self.integral
        } else {
            self.integral.powf(1.0 / self.s)
        }
    }
}

pub fn serrin_accumulate(acc: &SerrinAccumulator, state: &FluidState, dt: f64) -> SerrinAccumulator {
    let mut out = acc.clone();
    out.accumulate(state, dt);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupStatus {
    pub value: f64,
    pub threshold: f64,
    pub tripped: bool,
    pub which: SerrinTarget,
}

pub fn blowup_monitor(acc: &SerrinAccumulator, threshold: f64) -> BlowupStatus {
    let value = acc.value();
    BlowupStatus { value, threshold, tripped: value >= threshold, which: acc.target }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Friction, Grid, Regime};
    use crate::model::{rest_state, ModelParams, MuLaw};

    #[test]
    fn exponent_rules() {
        assert!(validate_exponents(4.0, 4.0).is_ok());
        assert!(validate_exponents(3.0, 4.0).is_err());
        assert!(validate_exponents(2.0, f64::INFINITY).is_err());
        assert!(validate_exponents(f64::INFINITY, 2.0).is_ok());
        assert!(validate_exponents(f64::INFINITY, 1.5).is_err());
    }

    #[test]
    fn zero_and_frozen_fields() {
        let g = Grid::unit(8, Regime::C).unwrap();
        let p = ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Constant(1.0),
            alpha: 0.5,
            beta: 2.0,
            rho_tilde: 1.0,
            friction: Friction::Zero,
        };
        let mut s = rest_state(&g, 1.0, &p).unwrap();
        let mut acc = SerrinAccumulator::new(4.0, 4.0, SerrinTarget::U).unwrap();
        for _ in 0..5 {
            acc.accumulate(&s, 0.1);
        }
        assert_eq!(acc.integral, 0.0);
        assert!(!blowup_monitor(&acc, 1.0).tripped);
        s.u = VectorField::from_fn(&g, |_, _| (1.0, 0.0));
        let mut acc = SerrinAccumulator::new(4.0, 4.0, SerrinTarget::U).unwrap();
        for k in 1..=4 {
            acc.accumulate(&s, 0.25);
            assert!((acc.integral - 0.25 * k as f64).abs() < 1e-14);
        }
    }
}
