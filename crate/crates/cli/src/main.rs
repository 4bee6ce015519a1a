//! `fracharm` command-line driver.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 numerical
//! failure. Diagnostics go to stderr; artifacts go to the output directory.

mod cache;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

/// Bad flags, config or input files.
#[derive(Debug)]
pub struct UsageError(pub String);

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    /// At least one check ran and failed.
    Check,
    Numerical(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<fracharm::Error> for Failure {
    fn from(e: fracharm::Error) -> Self {
        use fracharm::Error as E;
        match e {
            E::InvalidArgument(_) | E::Parse { .. } | E::SizeLimit { .. } | E::Io(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fracharm",
    version,
    about = "Fractional powers and extensions of fractal generators"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// gasket, vicsek or interval.
    #[arg(long, global = true)]
    family: Option<String>,
    #[arg(long, global = true)]
    level: Option<String>,
    /// Fractional order(s), comma separated.
    #[arg(long, global = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Cache directory (overrides the FRACHARM_CACHE_DIR environment variable).
    #[arg(long, global = true)]
    cache: Option<String>,
    /// y-grid cell count for `extend`.
    #[arg(long, global = true)]
    cells: Option<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write vertices.csv and edges.csv of the level-m graph.
    Build,
    /// Write eigenvalues.csv and populate the decomposition cache.
    Spectrum,
    /// Tabulate p_t(x, y) over a range of times.
    Heatkernel {
        /// Times, comma separated (default: the scaling window).
        #[arg(long)]
        times: Option<String>,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long)]
        y: Option<usize>,
    },
    /// Apply (-L)^s to a function (default: the first nonconstant eigenfunction).
    Fracpow {
        /// One value per line, or CSV whose last column holds the values.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Tabulate the harmonic extension and its Dirichlet-to-Neumann map.
    Extend {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Solve a fractional Dirichlet problem read from a problem file.
    Dirichlet {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Energy / Besov seminorm ratios over the seeded ensemble.
    Besov,
    /// Run the named checks (comma separated) and write reports.
    Verify { checks: String },
    /// Run every registered check and write reports plus index.json.
    VerifyAll,
    /// Summarize an existing index.json.
    Report,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = cli.common;
    let flags = Overrides {
        family: c.family,
        level: c.level,
        s: c.s,
        seed: c.seed,
        out: c.out,
        cache: c.cache,
        checks: match &cli.command {
            Command::Verify { checks } => Some(checks.clone()),
            _ => None,
        },
        cells: c.cells,
        jobs: c.jobs,
    };
    let cfg = RunConfig::resolve(c.config.as_deref(), &flags)?;
    if let Some(n) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot configure {n} workers: {e}")))?;
    }
    match cli.command {
        Command::Build => commands::build(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Heatkernel { times, x, y } => {
            commands::heatkernel(&cfg, times.as_deref(), x, y.unwrap_or(x))
        }
        Command::Fracpow { input } => commands::fracpow(&cfg, input.as_deref()),
        Command::Extend { input } => commands::extend(&cfg, input.as_deref()),
        Command::Dirichlet { problem } => commands::dirichlet(&cfg, &problem),
        Command::Besov => commands::besov(&cfg),
        Command::Verify { .. } => commands::verify(&cfg, &cfg.checks),
        Command::VerifyAll => {
            let all: Vec<String> = fracharm::verify::checks::CHECK_NAMES
                .iter()
                .map(|s| s.to_string())
                .collect();
            commands::verify(&cfg, &all)
        }
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
