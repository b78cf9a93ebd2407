//! File formats, configuration and the `ecoepi` command line on top of
//! `ecoepi-core`.
//!
//! ```text
//! ecoepi <eigen|steady|simulate|verify|sweep> --config <path> [--out <dir>] [--threads <n>]
//! ```
//!
//! Exit status: 0 ok, 2 config error, 3 solver failure, 4 positivity abort,
//! 5 verification failure, 1 unexpected i/o error.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::Config;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ecoepi", version, about = "Reaction-diffusion prey/infected-prey/predator toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, env = "ECOEPI_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal Dirichlet eigenpair of -dΔ + q.
    Eigen(Common),
    /// Dirichlet steady state (Sstar, SI, preypred or full).
    Steady(Common),
    /// Time integration with monitors.
    Simulate(Common),
    /// Scenario suite: predicted limit vs simulation.
    Verify(Common),
    /// One scenario repeated along a parameter axis.
    Sweep(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Eigen(c)
            | Command::Steady(c)
            | Command::Simulate(c)
            | Command::Verify(c)
            | Command::Sweep(c) => c,
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    if common.threads == Some(0) {
        return Err(CliError::Config("threads must be >= 1".into()));
    }
    let cfg = Config::load(&common.config)?;
    let out = &common.out;
    match &cli.command {
        Command::Eigen(_) => commands::cmd_eigen(&cfg, out),
        Command::Steady(_) => commands::cmd_steady(&cfg, out),
        Command::Simulate(_) => commands::cmd_simulate(&cfg, out),
        Command::Verify(_) => commands::cmd_verify(&cfg, out),
        Command::Sweep(_) => commands::cmd_sweep(&cfg, out, common.threads),
    }
}
