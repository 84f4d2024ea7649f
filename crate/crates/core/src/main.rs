use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use machcombust::runner::{self, RunStatus, RunSummary, RunnerError, SUITES};

#[derive(Parser)]
#[command(name = "machcombust", version, about = "Low-Mach combustion simulator with mass diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a config file.
    Run { config: PathBuf },
    /// Run a verification suite (operators, elliptic, invariants, mms, ledger or all).
    Verify { suite: String },
    /// Continue a run from a checkpoint.
    Resume {
        checkpoint: PathBuf,
        /// Refuse the checkpoint unless it was written under this config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &PathBuf) -> Result<runner::RunConfig, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunnerError::Io {
        context: format!("reading {}", path.display()),
        source,
    })?;
    runner::parse_config(&text)
}

fn report(s: &RunSummary) -> u8 {
    let verdict = match s.status {
        RunStatus::Completed => "completed",
        RunStatus::Tripped => "completed, blowup monitor tripped",
        RunStatus::Aborted => "aborted",
    };
    println!("{verdict}: {} steps, t = {}, diagnostics in {}", s.step_index, s.t, s.csv.display());
    if let Some(e) = &s.error {
        eprintln!("error: {e}");
    }
    s.status.exit_code() as u8
}

fn verify(suite: &str) -> Result<u8, RunnerError> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut failed = 0;
    for name in names {
        for c in runner::run_suite(name)? {
            println!("{c}");
            failed += usize::from(!c.passed);
        }
    }
    Ok(u8::from(failed > 0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("MACHCOMBUST_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool that is already built keeps its size, which is harmless here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let result = match &cli.command {
        Command::Run { config } => load_config(config).and_then(|c| runner::run(&c)).map(|s| report(&s)),
        Command::Verify { suite } => verify(suite),
        Command::Resume { checkpoint, config } => config
            .as_ref()
            .map(load_config)
            .transpose()
            .and_then(|c| runner::resume(checkpoint, c.as_ref()))
            .map(|s| report(&s)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
