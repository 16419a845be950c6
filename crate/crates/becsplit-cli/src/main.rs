//! Batch front end for robust BEC beam-splitter pulse design: square-pulse
//! baselines, moment-space ensemble designs, artifact evaluation, and full
//! comparison sweeps.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 non-convergence (best iterate still written).

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod io;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    NonConvergence(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::NonConvergence(m) => write!(f, "did not converge: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "becsplit", version, about = "Robust optical beam-splitter pulse design")]
struct Cli {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for this run.
    #[arg(long, global = true, default_value = "run-output")]
    out: PathBuf,
    /// Random seed for the square-pulse multistart search.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel evaluation and sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a square-pulse sequence (nominal or ε-sampled).
    DesignSquare,
    /// Design a moment-space ensemble pulse.
    DesignMoment,
    /// Evaluate stored control artifacts (params JSON or envelope CSV).
    Evaluate {
        /// Artifact files to compare.
        artifacts: Vec<PathBuf>,
    },
    /// Design and evaluate every configured (n, δ, method) combination.
    Sweep,
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let config = RunConfig::load(cli.config.as_deref())
        .map_err(|e| CliError::Config(format!("{e:#}")))?;
    let seed = cli.seed.unwrap_or(config.square.seed);
    match &cli.command {
        Command::DesignSquare => commands::cmd_design_square(&config, &cli.out, seed),
        Command::DesignMoment => commands::cmd_design_moment(&config, &cli.out),
        Command::Evaluate { artifacts } => commands::cmd_evaluate(&config, &cli.out, artifacts),
        Command::Sweep => commands::cmd_sweep(&config, &cli.out, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build_global()
        {
            eprintln!("warning: could not size worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<CliError>()
                .map(CliError::exit_code)
                .unwrap_or(2);
            ExitCode::from(code)
        }
    }
}
