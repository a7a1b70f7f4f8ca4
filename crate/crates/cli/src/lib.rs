//! Command-line front end: configuration, spectrum caching, the `spectrum`,
//! `moments` and `verify` commands, and the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 runtime
//! error.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod signals;
pub mod suites;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_moments, cmd_spectrum, cmd_verify, SpectrumSummary, VerifyReport};
pub use config::{Overrides, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "geoscatter",
    version,
    about = "Geometric wavelet scattering on compact manifolds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build (or load) the spectrum and print an eigenvalue summary.
    Spectrum(CommonArgs),
    /// Write scattering-moment tables as CSV.
    Moments(CommonArgs),
    /// Run the verification suites and write a JSON report.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for library calls.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Spectrum(a) | Command::Moments(a) | Command::Verify(a) => a,
        }
    }
}

/// Execute a parsed command, printing results to stdout.
pub fn run(cli: &Cli) -> CliResult<()> {
    let args = cli.command.args();
    let overrides = Overrides {
        seed: args.seed,
        out: args.out.clone(),
    };
    let config = RunConfig::resolve(args.config.as_deref(), &overrides)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;

    pool.install(|| match &cli.command {
        Command::Spectrum(_) => {
            println!("{}", cmd_spectrum(&config)?);
            Ok(())
        }
        Command::Moments(_) => {
            for path in cmd_moments(&config)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Verify(_) => {
            let (report, path) = cmd_verify(&config)?;
            for suite in &report.suites {
                println!(
                    "{:<14} {}",
                    suite.experiment,
                    if suite.passed { "pass" } else { "FAIL" }
                );
            }
            println!("report: {}", path.display());
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Verification(report.failures()))
            }
        }
    })
}
