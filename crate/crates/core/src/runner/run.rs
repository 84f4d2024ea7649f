//! Batch runs: initial data, the step loop and its outputs.

use std::f64::consts::PI;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::checkpoint::Checkpoint;
use super::config::{InitialKind, RunConfig};
use super::RunnerError;
use crate::diagnostics::{csv, DiagnosticsRecord};
use crate::grid::snapshot::{write_scalar, write_vector};
use crate::grid::{apply_scalar_bc, gradient_full, perp_gradient, Location, Regime, ScalarField};
use crate::model::state::psi_bc;
use crate::model::{init_from_velocity, rest_state, FluidState, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Reached `t_end`.
    Completed,
    /// Reached `t_end`, but the space-time monitor crossed its threshold.
    Tripped,
    /// A step could not be completed.
    Aborted,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::Tripped => 2,
            RunStatus::Aborted => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub status: RunStatus,
    pub step_index: u64,
    pub t: f64,
    pub csv: PathBuf,
    pub last: Option<DiagnosticsRecord>,
    /// Why the run aborted.
    pub error: Option<String>,
}

/// Target density of the non-uniform initial kinds, before the velocity
/// is built from it. In the Dirichlet regime the profile equals the wall
/// value on the boundary; there `layer` is a dipole, positive on the left.
fn target_density(cfg: &RunConfig, x: f64, y: f64) -> f64 {
    let (sx, sy) = (x / cfg.lx, y / cfg.ly);
    let a = cfg.amplitude;
    match (cfg.regime, cfg.initial) {
        (_, InitialKind::Rest) => cfg.mean_rho,
        (Regime::B, InitialKind::Bump) => cfg.params.rho_tilde * (1.0 + a * (PI * sx).sin() * (PI * sy).sin()),
        (Regime::B, InitialKind::Layer) => {
            cfg.params.rho_tilde * (1.0 + a * (2.0 * PI * sx).sin() * (PI * sy).sin())
        }
        (_, InitialKind::Bump) => cfg.mean_rho * (1.0 + a * (PI * sx).cos() * (PI * sy).cos()),
        (_, InitialKind::Layer) => cfg.mean_rho * (1.0 + a * ((sx - 0.5) / 0.1).tanh()),
    }
}

/// `u0 = c0 grad(1/rho*) + swirl perp_grad(sin^2 sin^2)`, then the state
/// consistent with it. `rest` skips the construction.
pub fn initial_state(cfg: &RunConfig) -> Result<FluidState, RunnerError> {
    let grid = cfg.grid()?;
    let p = &cfg.params;
    if cfg.initial == InitialKind::Rest {
        let level = if cfg.regime == Regime::B { p.rho_tilde } else { cfg.mean_rho };
        return Ok(rest_state(&grid, level, p)?);
    }
    let mut psi = ScalarField::from_fn(&grid, Location::Center, |x, y| 1.0 / target_density(cfg, x, y));
    apply_scalar_bc(&mut psi, &psi_bc(cfg.regime, p))?;
    let mut u0 = gradient_full(&psi)?.scaled(p.c0);
    if cfg.swirl != 0.0 {
        let (kx, ky) = (PI / cfg.lx, PI / cfg.ly);
        let stream = ScalarField::from_fn(&grid, Location::Corner, |x, y| {
            cfg.swirl * (kx * x).sin().powi(2) * (ky * y).sin().powi(2)
        });
        u0 = u0.add(&perp_gradient(&stream)?);
    }
    Ok(init_from_velocity(&u0, p, cfg.mean_rho, &cfg.controls.solver)?)
}

/// The diagnostics table, counting its bytes so checkpoints know how much
/// of it belongs to them.
struct Table {
    out: BufWriter<File>,
    bytes: u64,
    path: PathBuf,
}

impl Table {
    fn put(&mut self, line: &str) -> Result<(), RunnerError> {
        let ctx = || format!("writing {}", self.path.display());
        writeln!(self.out, "{line}").map_err(RunnerError::io(ctx()))?;
        self.bytes += line.len() as u64 + 1;
        Ok(())
    }

    /// Writes the row and flushes, returning the table length so far.
    fn emit(&mut self, rec: &DiagnosticsRecord) -> Result<u64, RunnerError> {
        self.put(&csv::row(rec))?;
        self.out.flush().map_err(RunnerError::io(format!("writing {}", self.path.display())))?;
        Ok(self.bytes)
    }
}

fn write_snapshot(path: &Path, s: &FluidState) -> Result<(), RunnerError> {
    let ctx = format!("writing {}", path.display());
    let mut w = BufWriter::new(File::create(path).map_err(RunnerError::io(ctx.clone()))?);
    write_scalar(&mut w, &s.rho, s.t)?;
    write_vector(&mut w, &s.u, s.t)?;
    write_scalar(&mut w, &s.pi, s.t)?;
    write_scalar(&mut w, &s.pi1, s.t)?;
    write_vector(&mut w, &s.v, s.t)?;
    w.flush().map_err(RunnerError::io(ctx))
}

fn drive(cfg: &RunConfig, st: &mut Stepper, table: &mut Table) -> Result<RunSummary, RunnerError> {
    let mut last = None;
    if st.step_index == 0 {
        let rec = st.record(0)?;
        let len = table.emit(&rec)?;
        if cfg.checkpoint_every > 0 {
            Checkpoint::of_stepper(cfg, st, len).save(&cfg.out_dir.join("checkpoint_000000.mcck"))?;
        }
        if cfg.snapshot_every > 0 {
            write_snapshot(&cfg.out_dir.join("snap_000000.bin"), &st.state)?;
        }
        last = Some(rec);
    }
    let eps = 1e-12 * cfg.t_end.abs().max(1.0);
    let mut status = RunStatus::Completed;
    let mut error = None;
    while st.state.t < cfg.t_end - eps {
        let rec = match st.step_towards(cfg.t_end) {
            Ok(r) => r,
            Err(e) => {
                status = RunStatus::Aborted;
                error = Some(e.to_string());
                break;
            }
        };
        let len = table.emit(&rec)?;
        let k = st.step_index;
        if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
            write_snapshot(&cfg.out_dir.join(format!("snap_{k:06}.bin")), &st.state)?;
        }
        if cfg.checkpoint_every > 0 && k % cfg.checkpoint_every == 0 {
            Checkpoint::of_stepper(cfg, st, len).save(&cfg.out_dir.join(format!("checkpoint_{k:06}.mcck")))?;
        }
        // a trip is annotated and reported, the trajectory still runs to the end
        if rec.blowup_tripped {
            status = RunStatus::Tripped;
        }
        last = Some(rec);
    }
    Ok(RunSummary { status, step_index: st.step_index, t: st.state.t, csv: table.path.clone(), last, error })
}

fn open_dir(cfg: &RunConfig) -> Result<(), RunnerError> {
    fs::create_dir_all(&cfg.out_dir).map_err(RunnerError::io(format!("creating {}", cfg.out_dir.display())))
}

/// Fresh run from the configured initial data.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, RunnerError> {
    open_dir(cfg)?;
    let csv = cfg.csv_path();
    let file = File::create(&csv).map_err(RunnerError::io(format!("creating {}", csv.display())))?;
    let mut table = Table { out: BufWriter::new(file), bytes: 0, path: csv };
    table.put(&csv::header())?;
    let state = initial_state(cfg)?;
    let mut st = Stepper::new(state, cfg.controls, cfg.params, cfg.serrin)?;
    drive(cfg, &mut st, &mut table)
}

/// Continues from a checkpoint. With `expected` the checkpoint must have
/// been written under that config. The table is cut back to the
/// checkpoint's length and continued, so it matches an uninterrupted run.
pub fn resume(path: &Path, expected: Option<&RunConfig>) -> Result<RunSummary, RunnerError> {
    let ck = Checkpoint::load(path)?;
    if let Some(cfg) = expected {
        ck.check(cfg)?;
    }
    let cfg = ck.config()?;
    open_dir(&cfg)?;
    let csv = cfg.csv_path();
    let file = OpenOptions::new()
        .write(true)
        .open(&csv)
        .map_err(RunnerError::io(format!("opening {}", csv.display())))?;
    let have = file.metadata().map_err(RunnerError::io(format!("reading {}", csv.display())))?.len();
    if have < ck.csv_len {
        return Err(RunnerError::Checkpoint(format!(
            "{} has {have} bytes, the checkpoint expects at least {}",
            csv.display(),
            ck.csv_len
        )));
    }
    file.set_len(ck.csv_len).map_err(RunnerError::io(format!("truncating {}", csv.display())))?;
    let mut file = file;
    file.seek(SeekFrom::End(0)).map_err(RunnerError::io(format!("seeking {}", csv.display())))?;
    let mut table = Table { out: BufWriter::new(file), bytes: ck.csv_len, path: csv };
    let mut st = ck.into_stepper(&cfg);
    drive(&cfg, &mut st, &mut table)
}
