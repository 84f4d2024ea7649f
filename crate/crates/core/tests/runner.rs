use std::fs;
use std::process::Command;

use machcombust::grid::Regime;
use machcombust::model::{picard_step, ModelError, MuLaw};
use machcombust::runner::verify::standard_config;
use machcombust::runner::{initial_state, parse_config, resume, run, Checkpoint, RunStatus, RunnerError};

const SMALL: &str = "\
grid.nx = 12
grid.ny = 12
model.regime = C
model.c0 = 0.1
model.alpha = 0.5
model.beta = 2
model.mu_law = constant(1)
initial.kind = bump
initial.amplitude = 0.1
time.t_end = 0.05
time.dt = 0.01
output.checkpoint_every = 2
";

fn config_in(dir: &std::path::Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, format!("{SMALL}output.dir = {}\n{extra}", dir.join("out").display())).unwrap();
    path
}

#[test]
fn config_errors_are_collected() {
    let err = parse_config("grid.nx = -3\nmodel.bogus = 1\nmodel.alpha = 3\nmodel.beta = 1\n").unwrap_err();
    let RunnerError::Config(msgs) = err else { panic!("expected a config error") };
    let all = msgs.join("\n");
    assert!(all.contains("grid.nx"), "{all}");
    assert!(all.contains("model.bogus"), "{all}");
    assert!(all.contains("model.alpha"), "{all}");
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let mut cfg = standard_config(Regime::A, 8, 0.01, 0.02);
    cfg.out_dir = blocker.join("below");
    assert!(matches!(run(&cfg), Err(RunnerError::Io { .. })));
}

#[test]
fn huge_step_does_not_converge() {
    // advection-dominated, so the lagged iteration cannot contract
    for regime in [Regime::A, Regime::B, Regime::C] {
        let mut cfg = standard_config(regime, 16, 10.0, 10.0);
        cfg.swirl = 0.5;
        cfg.amplitude = 0.3;
        cfg.params.mu_law = MuLaw::Constant(0.001);
        cfg.params.alpha = 0.3;
        cfg.params.beta = 3.0;
        let s = initial_state(&cfg).unwrap();
        let err = picard_step(&s, &cfg.controls, &cfg.params, None).unwrap_err();
        let ModelError::PicardDiverged(deltas) = err else { panic!("{regime}: {err}") };
        assert!(deltas.last().unwrap() > &(100.0 * deltas[0]), "{regime}: {deltas:?}");
    }
}

#[test]
fn resume_continues_the_same_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = standard_config(Regime::B, 12, 0.01, 0.06);
    cfg.out_dir = dir.path().to_path_buf();
    cfg.checkpoint_every = 3;
    let first = run(&cfg).unwrap();
    assert_eq!(first.status, RunStatus::Completed);
    assert_eq!(first.step_index, 6);
    let whole = fs::read(cfg.csv_path()).unwrap();

    // damage the tail as an interrupted run would leave it
    fs::write(cfg.csv_path(), &whole[..whole.len() - 10]).unwrap();
    let again = resume(&dir.path().join("checkpoint_000003.mcck"), Some(&cfg)).unwrap();
    assert_eq!(again.step_index, 6);
    assert_eq!(fs::read(cfg.csv_path()).unwrap(), whole);

    let ck = Checkpoint::load(&dir.path().join("checkpoint_000006.mcck")).unwrap();
    assert_eq!(ck.step_index, 6);
    assert!(ck.prev.is_some());
}

#[test]
fn corrupt_checkpoint_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = standard_config(Regime::A, 8, 0.01, 0.02);
    cfg.out_dir = dir.path().to_path_buf();
    cfg.checkpoint_every = 1;
    run(&cfg).unwrap();
    let path = dir.path().join("checkpoint_000001.mcck");
    let mut bytes = fs::read(&path).unwrap();
    bytes.truncate(bytes.len() / 2);
    fs::write(&path, bytes).unwrap();
    assert!(resume(&path, None).is_err());
}

#[test]
fn cli_runs_and_resumes() {
    let bin = env!("CARGO_BIN_EXE_machcombust");
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "");
    let out = Command::new(bin).arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 6);

    let ck = dir.path().join("out/checkpoint_000002.mcck");
    let out = Command::new(bin).arg("resume").arg(&ck).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap(), table);

    // a different config must be refused
    let other = dir.path().join("other.cfg");
    fs::write(&other, fs::read_to_string(&cfg).unwrap().replace("model.c0 = 0.1", "model.c0 = 0.2")).unwrap();
    let out = Command::new(bin).arg("resume").arg(&ck).arg("--config").arg(&other).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_reports_bad_config_and_unknown_suite() {
    let bin = env!("CARGO_BIN_EXE_machcombust");
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "model.friction = sticky\n");
    let out = Command::new(bin).arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.friction"));
    let out = Command::new(bin).args(["verify", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn blowup_trip_still_reaches_the_end() {
    let bin = env!("CARGO_BIN_EXE_machcombust");
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "serrin.threshold = 1e-12\n");
    let out = Command::new(bin).arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let table = fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 6);
}
