//! Configuration-driven experiments: the `gxr` command line, its config
//! format, output artifacts and the property suite behind `verify`.

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod error;
pub mod pipelines;
pub mod suite;

pub use artifacts::{Artifacts, CalibrationRecord, Table, CALIBRATION_FILE};
pub use cli::{cli_run, Cli, Command, EXIT_ERROR, EXIT_USAGE};
pub use config::{ConfigError, ExperimentConfig, FamilyName, PhantomKind};
pub use error::{HarnessError, Result};
pub use pipelines::EXIT_FAILED;
pub use suite::{Check, Outcome, SuiteParams};
