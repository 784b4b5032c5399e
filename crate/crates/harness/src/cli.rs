//! `gxr <subcommand> [--config PATH] [--out DIR] [--workers N] [--seed N]`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or config error, 3 any
//! other error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::artifacts::Artifacts;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::pipelines::Run;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gxr", version, about = "Geodesic X-ray transform experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config; built-in defaults (Euclidean, 128x128) when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides experiment.output.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores); overrides experiment.workers.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Seed of random probes; overrides experiment.seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check convexity, non-trapping and absence of conjugate points.
    Simplicity,
    /// Sinogram of the phantom.
    Forward,
    /// psi N phi applied to the phantom.
    Normal,
    /// Numerical symbol of N at interior points and its seminorm exponents.
    Symbol,
    /// Smoothing order of R = PN - Id from wave packets (needs calibrate).
    Parametrix,
    /// Iterative inversion of N on the phantom (needs calibrate).
    Reconstruct,
    /// Calibrate, then run the full property suite.
    Verify,
    /// Compute the dimensional constant C and store it in calibration.txt.
    Calibrate,
}

/// Config with command-line overrides applied.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.experiment.output = o.to_string_lossy().into_owned();
    }
    if let Some(w) = cli.workers {
        cfg.experiment.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.experiment.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<i32> {
    let out = Artifacts::create(std::path::Path::new(&cfg.experiment.output), &cfg.hash())?;
    let run = Run { cfg, out };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.experiment.workers)
        .build()
        .map_err(|_| HarnessError::Workers(cfg.experiment.workers))?;
    pool.install(|| match command {
        Command::Simplicity => run.simplicity(),
        Command::Forward => run.forward(),
        Command::Normal => run.normal(),
        Command::Symbol => run.symbol(),
        Command::Parametrix => run.parametrix(),
        Command::Reconstruct => run.reconstruct(),
        Command::Verify => run.verify(),
        Command::Calibrate => run.calibrate(),
    })
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
