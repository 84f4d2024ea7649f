//! `section.key = value` run configuration.
//!
//! Parsing never stops at the first problem: every malformed line, unknown
//! key, missing key and failed check is collected and reported together.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use super::RunnerError;
use crate::diagnostics::validate_exponents;
use crate::grid::{Friction, Grid, Regime};
use crate::model::{ModelParams, MuLaw, SerrinConfig, StepControls};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    /// Uniform density, zero velocity.
    Rest,
    /// Smooth density bump plus an optional swirl.
    Bump,
    /// Smoothed density step across the box plus an optional swirl.
    Layer,
}

impl InitialKind {
    pub fn name(self) -> &'static str {
        match self {
            InitialKind::Rest => "rest",
            InitialKind::Bump => "bump",
            InitialKind::Layer => "layer",
        }
    }
}

impl FromStr for InitialKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rest" => Ok(InitialKind::Rest),
            "bump" => Ok(InitialKind::Bump),
            "layer" => Ok(InitialKind::Layer),
            other => Err(format!("unknown initial kind '{other}' (expected rest, bump or layer)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub regime: Regime,
    pub params: ModelParams,
    pub initial: InitialKind,
    /// Relative density perturbation of `bump` and `layer`.
    pub amplitude: f64,
    /// Stream function amplitude of the initial swirl.
    pub swirl: f64,
    /// Mean density in the Neumann regimes; the Dirichlet regime uses `rho_tilde`.
    pub mean_rho: f64,
    pub t_end: f64,
    pub controls: StepControls,
    pub out_dir: PathBuf,
    /// File name of the diagnostics table inside `out_dir`.
    pub csv: String,
    /// Snapshot every this many accepted steps; 0 disables.
    pub snapshot_every: u64,
    pub checkpoint_every: u64,
    pub serrin: SerrinConfig,
}

/// Every accepted key.
pub const KEYS: [&str; 27] = [
    "grid.nx",
    "grid.ny",
    "grid.lx",
    "grid.ly",
    "model.regime",
    "model.c0",
    "model.alpha",
    "model.beta",
    "model.rho_tilde",
    "model.mu_law",
    "model.friction",
    "initial.kind",
    "initial.amplitude",
    "initial.swirl",
    "initial.mean_rho",
    "time.t_end",
    "time.dt",
    "time.pic_tol",
    "time.pic_max",
    "time.constraint_tol",
    "output.dir",
    "output.csv",
    "output.snapshot_every",
    "output.checkpoint_every",
    "serrin.r",
    "serrin.s",
    "serrin.threshold",
];

/// Reads typed values out of the raw table, logging problems as it goes.
struct Reader {
    raw: BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Reader {
    fn get<T: FromStr>(&mut self, key: &str, default: Option<T>) -> Option<T> {
        match self.raw.get(key) {
            Some(v) => match v.parse::<T>() {
                Ok(x) => Some(x),
                Err(_) => {
                    self.errors.push(format!("{key}: cannot parse '{v}'"));
                    None
                }
            },
            None if default.is_some() => default,
            None => {
                self.errors.push(format!("{key}: missing (no default)"));
                None
            }
        }
    }

    fn with<T>(&mut self, key: &str, default: Option<T>, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        match self.raw.get(key) {
            Some(v) => match parse(v) {
                Ok(x) => Some(x),
                Err(e) => {
                    self.errors.push(format!("{key}: {e}"));
                    None
                }
            },
            None if default.is_some() => default,
            None => {
                self.errors.push(format!("{key}: missing (no default)"));
                None
            }
        }
    }
}

/// `name(a, b, ...)` or a bare `name`.
fn parse_call(s: &str) -> Result<(String, Vec<f64>), String> {
    let s = s.trim();
    let Some(open) = s.find('(') else {
        return Ok((s.to_string(), vec![]));
    };
    if !s.ends_with(')') {
        return Err(format!("unbalanced parentheses in '{s}'"));
    }
    let name = s[..open].trim().to_string();
    let args = s[open + 1..s.len() - 1]
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| format!("bad number '{}' in '{s}'", a.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((name, args))
}

pub fn parse_mu_law(s: &str) -> Result<MuLaw, String> {
    let (name, a) = parse_call(s)?;
    match (name.as_str(), a.as_slice()) {
        ("constant", [m]) => Ok(MuLaw::Constant(*m)),
        ("affine", [m0, m1]) => Ok(MuLaw::Affine(*m0, *m1)),
        ("exp", [m0, k]) => Ok(MuLaw::Exp(*m0, *k)),
        _ => Err(format!("unknown viscosity law '{s}' (expected constant(m), affine(m0, m1) or exp(m0, k))")),
    }
}

pub fn parse_friction(s: &str) -> Result<Friction, String> {
    let (name, a) = parse_call(s)?;
    match (name.as_str(), a.as_slice()) {
        ("zero", []) => Ok(Friction::Zero),
        ("constant", [b]) => Ok(Friction::Constant(*b)),
        _ => Err(format!("unknown friction '{s}' (expected zero or constant(b))")),
    }
}

fn friction_text(f: &Friction) -> String {
    match f {
        Friction::Constant(b) => format!("constant({b})"),
        _ => "zero".to_string(),
    }
}

/// Splits the document into `key -> value`, recording syntax problems.
fn tokenize(text: &str, errors: &mut Vec<String>) -> BTreeMap<String, String> {
    let mut raw = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(format!("line {}: expected 'section.key = value'", n + 1));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if !k.contains('.') {
            errors.push(format!("line {}: key '{k}' has no section", n + 1));
        } else if !KEYS.contains(&k) {
            errors.push(format!("line {}: unknown key '{k}'", n + 1));
        } else if raw.insert(k.to_string(), v.to_string()).is_some() {
            errors.push(format!("line {}: duplicate key '{k}'", n + 1));
        }
    }
    raw
}

pub fn parse_config(text: &str) -> Result<RunConfig, RunnerError> {
    let mut errors = Vec::new();
    let raw = tokenize(text, &mut errors);
    let mut r = Reader { raw, errors };

    let nx = r.get::<usize>("grid.nx", None);
    let ny = r.get::<usize>("grid.ny", None);
    let lx = r.get("grid.lx", Some(1.0));
    let ly = r.get("grid.ly", Some(1.0));
    let regime = r.with("model.regime", None, Regime::from_str);
    let c0 = r.get::<f64>("model.c0", None);
    let alpha = r.get::<f64>("model.alpha", None);
    let beta = r.get::<f64>("model.beta", None);
    // the wall density only matters in regime B, where it has no default
    let rt_default = match (regime, alpha, beta) {
        (Some(Regime::B), ..) => None,
        (_, Some(a), Some(b)) if a <= b => Some(1.0f64.clamp(a, b)),
        _ => None,
    };
    let rho_tilde = r.get::<f64>("model.rho_tilde", rt_default);
    let mu_law = r.with("model.mu_law", Some(MuLaw::Constant(1.0)), parse_mu_law);
    let friction = r.with("model.friction", Some(Friction::Zero), parse_friction);
    let initial = r.with("initial.kind", Some(InitialKind::Rest), InitialKind::from_str);
    let amplitude = r.get("initial.amplitude", Some(0.1));
    let swirl = r.get("initial.swirl", Some(0.0));
    let mid = match (alpha, beta) {
        (Some(a), Some(b)) => Some(0.5 * (a + b)),
        _ => None,
    };
    let mean_rho = r.get::<f64>("initial.mean_rho", mid);
    let t_end = r.get::<f64>("time.t_end", None);
    let dt = r.get::<f64>("time.dt", None);
    let defaults = StepControls::new(1.0);
    let pic_tol = r.get("time.pic_tol", Some(defaults.pic_tol));
    let pic_max = r.get("time.pic_max", Some(defaults.pic_max));
    let constraint_tol = r.get("time.constraint_tol", Some(defaults.constraint_tol));
    let out_dir = r.get::<String>("output.dir", Some(".".into()));
    let csv = r.get::<String>("output.csv", Some("diagnostics.csv".into()));
    let snapshot_every = r.get("output.snapshot_every", Some(0u64));
    let checkpoint_every = r.get("output.checkpoint_every", Some(0u64));
    let sd = SerrinConfig::default();
    let sr = r.get("serrin.r", Some(sd.r));
    let ss = r.get("serrin.s", Some(sd.s));
    let threshold = r.get("serrin.threshold", Some(sd.threshold));
    let mut errors = r.errors;

    // value checks on whatever parsed
    if let (Some(nx), Some(ny), Some(lx), Some(ly)) = (nx, ny, lx, ly) {
        if let Err(e) = Grid::new(nx, ny, lx, ly, regime.unwrap_or(Regime::A)) {
            errors.push(format!("grid: {e}"));
        }
    }
    if let Some(c) = c0 {
        if !(c > 0.0 && c.is_finite()) {
            errors.push(format!("model.c0: must be positive, got {c}"));
        }
    }
    if let Some(a) = alpha {
        if !(a > 0.0) {
            errors.push(format!("model.alpha: must be positive, got {a}"));
        }
    }
    if let (Some(a), Some(b)) = (alpha, beta) {
        if !(a <= b) {
            errors.push(format!("model.alpha ({a}) must not exceed model.beta ({b})"));
        }
        if let Some(rt) = rho_tilde {
            if !(a <= rt && rt <= b) {
                errors.push(format!("model.rho_tilde ({rt}) must lie in [model.alpha, model.beta] = [{a}, {b}]"));
            }
        }
        if let Some(m) = mu_law {
            if a <= b && !(m.min_on(a, b) > 0.0) {
                errors.push(format!("model.mu_law: {m} is not positive on [{a}, {b}]"));
            }
        }
        if let (Some(kind), Some(amp)) = (initial, amplitude) {
            if !(0.0..1.0).contains(&amp) {
                errors.push(format!("initial.amplitude: must lie in [0, 1), got {amp}"));
            } else {
                let base = match regime {
                    Some(Regime::B) => rho_tilde,
                    _ => mean_rho,
                };
                if let Some(m) = base {
                    let spread = if kind == InitialKind::Rest { 0.0 } else { amp };
                    let (lo, hi) = (m * (1.0 - spread), m * (1.0 + spread));
                    if lo < a || hi > b {
                        errors.push(format!(
                            "initial density range [{lo}, {hi}] leaves [model.alpha, model.beta] = [{a}, {b}]"
                        ));
                    }
                }
            }
        }
    }
    if let Some(Friction::Constant(b)) = friction {
        if !(b >= 0.0) {
            errors.push(format!("model.friction: must be nonnegative, got {b}"));
        }
    }
    if let Some(t) = t_end {
        if !(t > 0.0 && t.is_finite()) {
            errors.push(format!("time.t_end: must be positive, got {t}"));
        }
    }
    if let Some(d) = dt {
        if !(d > 0.0 && d.is_finite()) {
            errors.push(format!("time.dt: must be positive, got {d}"));
        }
    }
    if let Some(p) = pic_tol {
        if !(p > 0.0) {
            errors.push(format!("time.pic_tol: must be positive, got {p}"));
        }
    }
    if pic_max == Some(0) {
        errors.push("time.pic_max: must be at least 1".into());
    }
    if let Some(c) = constraint_tol {
        if !(c > 0.0) {
            errors.push(format!("time.constraint_tol: must be positive, got {c}"));
        }
    }
    if let (Some(rr), Some(s)) = (sr, ss) {
        if let Err(e) = validate_exponents(rr, s) {
            errors.push(format!("serrin.r/serrin.s: {e}"));
        }
    }
    if let Some(t) = threshold {
        if !(t > 0.0) {
            errors.push(format!("serrin.threshold: must be positive, got {t}"));
        }
    }
    if let Some(c) = &csv {
        if c.is_empty() || c.contains('/') {
            errors.push(format!("output.csv: expected a plain file name, got '{c}'"));
        }
    }
    if !errors.is_empty() {
        return Err(RunnerError::Config(errors));
    }

    // every Option is Some once no error was logged
    let controls = StepControls {
        dt: dt.unwrap(),
        pic_tol: pic_tol.unwrap(),
        pic_max: pic_max.unwrap(),
        constraint_tol: constraint_tol.unwrap(),
        solver: defaults.solver,
    };
    Ok(RunConfig {
        nx: nx.unwrap(),
        ny: ny.unwrap(),
        lx: lx.unwrap(),
        ly: ly.unwrap(),
        regime: regime.unwrap(),
        params: ModelParams {
            c0: c0.unwrap(),
            mu_law: mu_law.unwrap(),
            alpha: alpha.unwrap(),
            beta: beta.unwrap(),
            rho_tilde: rho_tilde.unwrap(),
            friction: friction.unwrap(),
        },
        initial: initial.unwrap(),
        amplitude: amplitude.unwrap(),
        swirl: swirl.unwrap(),
        mean_rho: mean_rho.unwrap(),
        t_end: t_end.unwrap(),
        controls,
        out_dir: PathBuf::from(out_dir.unwrap()),
        csv: csv.unwrap(),
        snapshot_every: snapshot_every.unwrap(),
        checkpoint_every: checkpoint_every.unwrap(),
        serrin: SerrinConfig { r: sr.unwrap(), s: ss.unwrap(), threshold: threshold.unwrap() },
    })
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid, RunnerError> {
        Ok(Grid::new(self.nx, self.ny, self.lx, self.ly, self.regime)?)
    }

    /// Every key spelled out, floats in shortest round-trip form. Parsing
    /// the result gives back an equal config, and its hash identifies the run.
    pub fn canonical_text(&self) -> String {
        let p = &self.params;
        let c = &self.controls;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("grid.nx", self.nx.to_string());
        kv("grid.ny", self.ny.to_string());
        kv("grid.lx", self.lx.to_string());
        kv("grid.ly", self.ly.to_string());
        kv("model.regime", self.regime.to_string());
        kv("model.c0", p.c0.to_string());
        kv("model.alpha", p.alpha.to_string());
        kv("model.beta", p.beta.to_string());
        kv("model.rho_tilde", p.rho_tilde.to_string());
        kv("model.mu_law", p.mu_law.to_string());
        kv("model.friction", friction_text(&p.friction));
        kv("initial.kind", self.initial.name().to_string());
        kv("initial.amplitude", self.amplitude.to_string());
        kv("initial.swirl", self.swirl.to_string());
        kv("initial.mean_rho", self.mean_rho.to_string());
        kv("time.t_end", self.t_end.to_string());
        kv("time.dt", c.dt.to_string());
        kv("time.pic_tol", c.pic_tol.to_string());
        kv("time.pic_max", c.pic_max.to_string());
        kv("time.constraint_tol", c.constraint_tol.to_string());
        kv("output.dir", self.out_dir.display().to_string());
        kv("output.csv", self.csv.clone());
        kv("output.snapshot_every", self.snapshot_every.to_string());
        kv("output.checkpoint_every", self.checkpoint_every.to_string());
        kv("serrin.r", self.serrin.r.to_string());
        kv("serrin.s", self.serrin.s.to_string());
        kv("serrin.threshold", self.serrin.threshold.to_string());
        s
    }

    pub fn csv_path(&self) -> PathBuf {
        self.out_dir.join(&self.csv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_C: &str = "
# smallest useful run
grid.nx = 16
grid.ny = 16
model.regime = C
model.c0 = 0.1
model.alpha = 0.5
model.beta = 2.0
time.t_end = 0.1
time.dt = 0.01
";

    fn violations(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(RunnerError::Config(v)) => v,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_are_filled() {
        let c = parse_config(MINIMAL_C).unwrap();
        assert_eq!(c.controls.pic_tol, 1e-9);
        assert_eq!(c.controls.pic_max, 50);
        assert_eq!(c.controls.constraint_tol, 1e-7);
        assert_eq!(c.params.mu_law, MuLaw::Constant(1.0));
        assert_eq!(c.initial, InitialKind::Rest);
        assert_eq!(c.mean_rho, 1.25);
        assert_eq!(c.serrin, SerrinConfig::default());
        assert_eq!(c.lx, 1.0);
    }

    #[test]
    fn alpha_above_beta_names_both_keys() {
        let v = violations(&MINIMAL_C.replace("model.alpha = 0.5", "model.alpha = 3.0"));
        assert!(v.iter().any(|m| m.contains("model.alpha") && m.contains("model.beta")), "{v:?}");
    }

    #[test]
    fn serrin_r_two_is_rejected() {
        let v = violations(&format!("{MINIMAL_C}serrin.r = 2\n"));
        assert!(v.iter().any(|m| m.contains("2 < r <= inf")), "{v:?}");
    }

    #[test]
    fn every_problem_is_reported() {
        let text = MINIMAL_C.replace("time.dt = 0.01", "time.dt = -1").replace("grid.ny = 16", "grid.nz = 16")
            + "model.mu_law = cubic(1)\nnonsense\n";
        let v = violations(&text);
        assert!(v.iter().any(|m| m.contains("unknown key 'grid.nz'")));
        assert!(v.iter().any(|m| m.contains("grid.ny: missing")));
        assert!(v.iter().any(|m| m.contains("time.dt")));
        assert!(v.iter().any(|m| m.contains("model.mu_law")));
        assert!(v.iter().any(|m| m.contains("expected 'section.key = value'")));
        assert!(v.len() >= 5, "{v:?}");
    }

    #[test]
    fn regime_b_needs_a_wall_density() {
        let v = violations(&MINIMAL_C.replace("model.regime = C", "model.regime = B"));
        assert!(v.iter().any(|m| m.contains("model.rho_tilde: missing")), "{v:?}");
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = format!(
            "{MINIMAL_C}model.mu_law = affine(0.3, 0.1)\nmodel.friction = constant(0.7)\nserrin.s = inf\nserrin.r = inf\ninitial.kind = bump\ninitial.swirl = 0.0123456789012345\n"
        );
        let c = parse_config(&text).unwrap();
        let again = parse_config(&c.canonical_text()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.canonical_text(), again.canonical_text());
    }

    #[test]
    fn parses_calls() {
        assert_eq!(parse_mu_law("exp(1, -0.5)").unwrap(), MuLaw::Exp(1.0, -0.5));
        assert_eq!(parse_friction("zero").unwrap(), Friction::Zero);
        assert!(parse_friction("constant(1").is_err());
    }
}
