//! Command-line front end: config parsing, subcommand dispatch and exit codes.
//!
//! Exit codes: 0 success, 2 config error, 3 infeasible, 4 I/O error.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Context;
pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "cogsec", version, about = "Secrecy-preserving rates for cognitive relaying and jamming")]
pub struct Cli {
    /// INI run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every stochastic step; overrides `[optimizer] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate one parameter point.
    Rates,
    /// Maximize the secondary rate of one scheme.
    Optimize,
    /// Optimize over a grid of T2 positions.
    Sweep,
    /// Gap between the achievable rate and the scaled outer bound.
    Boundgap,
    /// Degrees-of-freedom slopes of both bounds.
    Dof,
    /// Rates and outer bound of a discrete memoryless instance.
    Dmc,
}

/// Executes a parsed command line, writing the report to `w`.
pub fn execute(cli: &Cli, w: &mut dyn Write) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        // a pool built earlier in the same process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::config("--config <path> is required"))?;
    let cfg = RunConfig::from_path(path)?;
    let ctx = Context { seed: cli.seed, out: cli.out.clone() };
    log::debug!("running {:?} with {}", cli.command, path.display());
    match cli.command {
        Command::Rates => commands::cmd_rates(&cfg, &ctx, w),
        Command::Optimize => commands::cmd_optimize(&cfg, &ctx, w),
        Command::Sweep => commands::cmd_sweep(&cfg, &ctx, w),
        Command::Boundgap => commands::cmd_boundgap(&cfg, &ctx, w),
        Command::Dof => commands::cmd_dof(&cfg, &ctx, w),
        Command::Dmc => commands::cmd_dmc(&cfg, &ctx, w),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
