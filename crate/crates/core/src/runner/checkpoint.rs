//! Restartable checkpoints.
//!
//! Layout (little-endian): `b"MCCK"`, version `u32`, SHA-256 of the
//! canonical config (32 bytes), config text (`u64` length + UTF-8),
//! `step_index: u64`, `csv_len: u64`, trip threshold `f64`, the current
//! state, a `u8` flag plus the previous state, then the accumulators
//! (`u64` count, each `r, s, target, integral, elapsed`).
//!
//! A state is its time followed by snapshot records of `rho, u, pi, pi1, v`
//! and a `u8` flag plus `q`. Everything is stored bit for bit, ghosts
//! included, so a restored run continues exactly as the original would.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::config::{parse_config, RunConfig};
use super::RunnerError;
use crate::diagnostics::{SerrinAccumulator, SerrinTarget};
use crate::grid::snapshot::{read_scalar, read_vector, write_scalar, write_vector};
use crate::grid::Grid;
use crate::model::{FluidState, Stepper};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"MCCK";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn config_hash(cfg: &RunConfig) -> [u8; 32] {
    Sha256::digest(cfg.canonical_text().as_bytes()).into()
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub hash: [u8; 32],
    pub config_text: String,
    pub step_index: u64,
    /// Bytes of the diagnostics table written when the checkpoint was taken.
    pub csv_len: u64,
    pub threshold: f64,
    pub state: FluidState,
    pub prev: Option<FluidState>,
    pub accumulators: Vec<SerrinAccumulator>,
}

fn bad(msg: impl Into<String>) -> RunnerError {
    RunnerError::Checkpoint(msg.into())
}

fn io(e: std::io::Error) -> RunnerError {
    bad(e.to_string())
}

fn put_u64<W: Write>(w: &mut W, x: u64) -> Result<(), RunnerError> {
    w.write_all(&x.to_le_bytes()).map_err(io)
}

fn put_f64<W: Write>(w: &mut W, x: f64) -> Result<(), RunnerError> {
    w.write_all(&x.to_le_bytes()).map_err(io)
}

fn get<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], RunnerError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(io)?;
    Ok(b)
}

fn get_u64<R: Read>(r: &mut R) -> Result<u64, RunnerError> {
    Ok(u64::from_le_bytes(get(r)?))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64, RunnerError> {
    Ok(f64::from_le_bytes(get(r)?))
}

fn write_state<W: Write>(w: &mut W, s: &FluidState) -> Result<(), RunnerError> {
    put_f64(w, s.t)?;
    write_scalar(w, &s.rho, s.t)?;
    write_vector(w, &s.u, s.t)?;
    write_scalar(w, &s.pi, s.t)?;
    write_scalar(w, &s.pi1, s.t)?;
    write_vector(w, &s.v, s.t)?;
    match &s.q {
        Some(q) => {
            w.write_all(&[1]).map_err(io)?;
            write_vector(w, q, s.t)?;
        }
        None => w.write_all(&[0]).map_err(io)?,
    }
    Ok(())
}

fn read_state<R: Read>(r: &mut R, grid: &Grid) -> Result<FluidState, RunnerError> {
    let t = get_f64(r)?;
    let (rho, _) = read_scalar(r, grid)?;
    let (u, _) = read_vector(r, grid)?;
    let (pi, _) = read_scalar(r, grid)?;
    let (pi1, _) = read_scalar(r, grid)?;
    let (v, _) = read_vector(r, grid)?;
    let q = match get::<1, _>(r)?[0] {
        0 => None,
        1 => Some(read_vector(r, grid)?.0),
        f => return Err(bad(format!("bad flag {f}"))),
    };
    Ok(FluidState { t, rho, u, pi, pi1, v, q })
}

fn target_index(t: SerrinTarget) -> u64 {
    SerrinTarget::ALL.iter().position(|&x| x == t).unwrap() as u64
}

impl Checkpoint {
    pub fn of_stepper(cfg: &RunConfig, st: &Stepper, csv_len: u64) -> Self {
        Self {
            hash: config_hash(cfg),
            config_text: cfg.canonical_text(),
            step_index: st.step_index,
            csv_len,
            threshold: st.threshold,
            state: st.state.clone(),
            prev: st.prev.clone(),
            accumulators: st.accumulators.clone(),
        }
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<(), RunnerError> {
        w.write_all(CHECKPOINT_MAGIC).map_err(io)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes()).map_err(io)?;
        w.write_all(&self.hash).map_err(io)?;
        put_u64(w, self.config_text.len() as u64)?;
        w.write_all(self.config_text.as_bytes()).map_err(io)?;
        put_u64(w, self.step_index)?;
        put_u64(w, self.csv_len)?;
        put_f64(w, self.threshold)?;
        write_state(w, &self.state)?;
        match &self.prev {
            Some(p) => {
                w.write_all(&[1]).map_err(io)?;
                write_state(w, p)?;
            }
            None => w.write_all(&[0]).map_err(io)?,
        }
        put_u64(w, self.accumulators.len() as u64)?;
        for a in &self.accumulators {
            put_f64(w, a.r)?;
            put_f64(w, a.s)?;
            put_u64(w, target_index(a.target))?;
            put_f64(w, a.integral)?;
            put_f64(w, a.elapsed)?;
        }
        Ok(())
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self, RunnerError> {
        if &get::<4, _>(r)? != CHECKPOINT_MAGIC {
            return Err(bad("not a checkpoint (bad magic)"));
        }
        let version = u32::from_le_bytes(get(r)?);
        if version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let hash: [u8; 32] = get(r)?;
        let len = get_u64(r)?;
        if len > 1 << 20 {
            return Err(bad(format!("config text of {len} bytes is implausible")));
        }
        let mut text = vec![0u8; len as usize];
        r.read_exact(&mut text).map_err(io)?;
        let config_text = String::from_utf8(text).map_err(|_| bad("config text is not UTF-8"))?;
        let cfg = parse_config(&config_text)?;
        if config_hash(&cfg) != hash {
            return Err(bad("stored config does not match its hash"));
        }
        let grid = cfg.grid()?;
        let step_index = get_u64(r)?;
        let csv_len = get_u64(r)?;
        let threshold = get_f64(r)?;
        let state = read_state(r, &grid)?;
        let prev = match get::<1, _>(r)?[0] {
            0 => None,
            1 => Some(read_state(r, &grid)?),
            f => return Err(bad(format!("bad flag {f}"))),
        };
        let n = get_u64(r)?;
        if n > SerrinTarget::ALL.len() as u64 {
            return Err(bad(format!("{n} accumulators")));
        }
        let mut accumulators = Vec::new();
        for _ in 0..n {
            let (ar, s) = (get_f64(r)?, get_f64(r)?);
            let idx = get_u64(r)? as usize;
            let target = *SerrinTarget::ALL.get(idx).ok_or_else(|| bad(format!("target index {idx}")))?;
            let mut a = SerrinAccumulator::new(ar, s, target).map_err(|e| bad(e.to_string()))?;
            a.integral = get_f64(r)?;
            a.elapsed = get_f64(r)?;
            accumulators.push(a);
        }
        Ok(Self { hash, config_text, step_index, csv_len, threshold, state, prev, accumulators })
    }

    pub fn save(&self, path: &Path) -> Result<(), RunnerError> {
        let ctx = format!("writing {}", path.display());
        let mut w = BufWriter::new(File::create(path).map_err(RunnerError::io(ctx.clone()))?);
        self.write(&mut w)?;
        w.flush().map_err(RunnerError::io(ctx))
    }

    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        let f = File::open(path).map_err(RunnerError::io(format!("opening {}", path.display())))?;
        Self::read(&mut BufReader::new(f))
    }

    /// The config the checkpoint was taken under.
    pub fn config(&self) -> Result<RunConfig, RunnerError> {
        parse_config(&self.config_text)
    }

    /// Refuses to continue under a config other than the one it was written with.
    pub fn check(&self, expected: &RunConfig) -> Result<(), RunnerError> {
        if config_hash(expected) == self.hash {
            Ok(())
        } else {
            Err(RunnerError::HashMismatch)
        }
    }

    pub fn into_stepper(self, cfg: &RunConfig) -> Stepper {
        Stepper {
            state: self.state,
            prev: self.prev,
            controls: cfg.controls,
            params: cfg.params,
            forcing: None,
            accumulators: self.accumulators,
            threshold: self.threshold,
            step_index: self.step_index,
        }
    }
}
