use std::sync::Arc;

use super::picard::picard_step;
use super::{FluidState, Forcing, ModelError, ModelParams, StepControls};
use crate::diagnostics::{
    blowup_monitor, energy_record, BlowupStatus, DiagnosticsRecord, SerrinAccumulator, SerrinTarget,
};
use crate::grid::Regime;

/// Most consecutive halvings of the step before the run is abandoned.
pub const MAX_HALVINGS: u32 = 10;

/// Exponents and trip threshold of the space-time monitors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerrinConfig {
    pub r: f64,
    pub s: f64,
    pub threshold: f64,
}

impl Default for SerrinConfig {
    fn default() -> Self {
        Self { r: 4.0, s: 4.0, threshold: 1e3 }
    }
}

/// A running simulation: the current level, the previous accepted level
/// (for backward differences) and the monitors.
#[derive(Clone)]
pub struct Stepper {
    pub state: FluidState,
    pub prev: Option<FluidState>,
    pub controls: StepControls,
    pub params: ModelParams,
    pub forcing: Option<Arc<dyn Forcing>>,
    pub accumulators: Vec<SerrinAccumulator>,
    pub threshold: f64,
    pub step_index: u64,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("t", &self.state.t)
            .field("step_index", &self.step_index)
            .field("controls", &self.controls)
            .finish_non_exhaustive()
    }
}

impl Stepper {
    pub fn new(
        state: FluidState,
        controls: StepControls,
        params: ModelParams,
        serrin: SerrinConfig,
    ) -> Result<Self, ModelError> {
        controls.validate()?;
        params.validate()?;
        let accumulators = SerrinTarget::ALL
            .into_iter()
            .map(|t| SerrinAccumulator::new(serrin.r, serrin.s, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ModelError::InvalidParams(e.to_string()))?;
        Ok(Self {
            state,
            prev: None,
            controls,
            params,
            forcing: None,
            accumulators,
            threshold: serrin.threshold,
            step_index: 0,
        })
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    fn accumulator(&self, target: SerrinTarget) -> Option<&SerrinAccumulator> {
        self.accumulators.iter().find(|a| a.target == target)
    }

    /// The monitor that decides a trip: the density gradient in the
    /// Neumann-slip and Dirichlet regimes, the velocity in the no-slip one.
    pub fn blowup_status(&self) -> Option<BlowupStatus> {
        let which = match self.state.regime() {
            Regime::C => SerrinTarget::U,
            _ => SerrinTarget::GradRho,
        };
        self.accumulator(which).map(|a| blowup_monitor(a, self.threshold))
    }

    fn annotate(&self, mut rec: DiagnosticsRecord) -> DiagnosticsRecord {
        let val = |t| self.accumulator(t).map_or(0.0, |a| a.value());
        rec.serrin_grad_rho = val(SerrinTarget::GradRho);
        rec.serrin_v = val(SerrinTarget::V);
        rec.serrin_u = val(SerrinTarget::U);
        rec.blowup_tripped = self.blowup_status().is_some_and(|s| s.tripped);
        rec
    }

    /// Record of the current level against the previous accepted one.
    pub fn record(&self, picard_iterations: usize) -> Result<DiagnosticsRecord, ModelError> {
        let dt = self.prev.as_ref().map_or(0.0, |p| self.state.t - p.t);
        let mut rec = energy_record(&self.state, self.prev.as_ref(), dt, &self.params)?;
        rec.picard_iterations = picard_iterations;
        Ok(self.annotate(rec))
    }

    /// One accepted step of at most the nominal length, never past `t_end`.
    /// On rejection the step is halved, up to [`MAX_HALVINGS`] times.
    pub fn step_towards(&mut self, t_end: f64) -> Result<DiagnosticsRecord, ModelError> {
        let remaining = t_end - self.state.t;
        if !(remaining > 0.0) {
            return Err(ModelError::InvalidParams(format!(
                "end time {t_end} is not after the current time {}",
                self.state.t
            )));
        }
        let last = remaining <= self.controls.dt;
        let mut dt = if last { remaining } else { self.controls.dt };
        let mut error = None;
        for attempt in 0..=MAX_HALVINGS {
            let controls = StepControls { dt, ..self.controls };
            match picard_step(&self.state, &controls, &self.params, self.forcing.as_deref()) {
                Ok((mut next, report)) => {
                    if last && attempt == 0 {
                        next.t = t_end;
                    }
                    let used = next.t - self.state.t;
                    for acc in &mut self.accumulators {
                        acc.accumulate(&self.state, used);
                    }
                    self.prev = Some(std::mem::replace(&mut self.state, next));
                    self.step_index += 1;
                    return self.record(report.iterations);
                }
                Err(e) => {
                    error = Some(e);
                    dt *= 0.5;
                }
            }
        }
        Err(ModelError::StepRejected(Box::new(error.expect("at least one attempt"))))
    }

    /// Steps until `t_end`, handing every record to `sink`. The initial
    /// record is emitted only for a fresh run.
    pub fn run_until(&mut self, t_end: f64, sink: &mut dyn FnMut(&DiagnosticsRecord, &Stepper)) -> AdvanceOutcome {
        let mut records = Vec::new();
        if self.step_index == 0 {
            match self.record(0) {
                Ok(r) => {
                    sink(&r, self);
                    records.push(r);
                }
                Err(e) => return self.outcome(records, Some(e)),
            }
        }
        let eps = 1e-12 * t_end.abs().max(1.0);
        while self.state.t < t_end - eps {
            match self.step_towards(t_end) {
                Ok(r) => {
                    sink(&r, self);
                    records.push(r);
                }
                Err(e) => return self.outcome(records, Some(e)),
            }
        }
        self.outcome(records, None)
    }

    fn outcome(&self, records: Vec<DiagnosticsRecord>, aborted: Option<ModelError>) -> AdvanceOutcome {
        AdvanceOutcome {
            state: self.state.clone(),
            records,
            aborted,
            blowup: self.blowup_status().filter(|s| s.tripped),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdvanceOutcome {
    /// Last accepted state.
    pub state: FluidState,
    /// Initial record (fresh runs) and one record per accepted step.
    pub records: Vec<DiagnosticsRecord>,
    /// Why the run stopped before `t_end`, if it did.
    pub aborted: Option<ModelError>,
    /// Set when the monitor tripped; the run still continues to the end.
    pub blowup: Option<BlowupStatus>,
}

impl AdvanceOutcome {
    pub fn completed(&self) -> bool {
        self.aborted.is_none()
    }
}

/// Advances `state0` to `t_end` with default monitors, collecting records.
pub fn advance(
    state0: FluidState,
    t_end: f64,
    controls: StepControls,
    params: ModelParams,
    forcing: Option<Arc<dyn Forcing>>,
) -> Result<AdvanceOutcome, ModelError> {
    let mut st = Stepper::new(state0, controls, params, SerrinConfig::default())?;
    st.forcing = forcing;
    Ok(st.run_until(t_end, &mut |_, _| {}))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Friction, Grid};
    use crate::model::{rest_state, MuLaw};

    fn params() -> ModelParams {
        ModelParams {
            c0: 0.1,
            mu_law: MuLaw::Constant(1.0),
            alpha: 0.5,
            beta: 2.0,
            rho_tilde: 1.2,
            friction: Friction::Constant(1.0),
        }
    }

    #[test]
    fn rest_stays_at_rest() {
        for regime in [Regime::A, Regime::B, Regime::C] {
            let g = Grid::unit(8, regime).unwrap();
            let s = rest_state(&g, 1.2, &params()).unwrap();
            let out = advance(s.clone(), 1.0, StepControls::new(0.3), params(), None).unwrap();
            assert!(out.completed());
            assert_eq!(out.state.t, 1.0);
            // initial record plus 0.3, 0.6, 0.9, 1.0
            assert_eq!(out.records.len(), 5);
            assert!((out.records[4].dt - 0.1).abs() < 1e-12);
            assert_eq!(out.state.u.max_abs(), 0.0);
            for r in &out.records {
                assert_eq!(r.u_l2, 0.0);
                assert!((r.rho_l2 - 1.2).abs() < 1e-12);
                assert_eq!(r.f_t, 0.0);
            }
        }
    }
}
