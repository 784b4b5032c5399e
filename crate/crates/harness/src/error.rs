use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no calibration at {0}: run `gxr calibrate` with the same --out first")]
    MissingCalibration(PathBuf),
    #[error("bad calibration file {path}: {reason}")]
    Calibration { path: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Geometry(#[from] gxr_geometry::GeometryError),
    #[error(transparent)]
    Transform(#[from] gxr_transform::TransformError),
    #[error(transparent)]
    Symbol(#[from] gxr_kernel_symbol::SymbolError),
    #[error(transparent)]
    Parametrix(#[from] gxr_parametrix::ParametrixError),
    #[error(transparent)]
    Reconstruct(#[from] gxr_reconstruct::ReconstructError),
    #[error("cannot build a pool of {0} workers")]
    Workers(usize),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
