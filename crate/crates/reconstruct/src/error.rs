use gxr_geometry::GeometryError;
use gxr_parametrix::ParametrixError;
use gxr_transform::TransformError;
use thiserror::Error;

use crate::trace::IterationTrace;

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Parametrix(#[from] ParametrixError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("iteration diverged: residual grew {window} steps in a row (last {last:e})")]
    Diverged { window: usize, last: f64, trace: Box<IterationTrace> },
    #[error("metric is not simple: {0}")]
    NotSimple(String),
    #[error("grid {n}x{n} exceeds the dense-matrix limit {limit}x{limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid settings: {0}")]
    Settings(String),
}

pub type Result<T> = std::result::Result<T, ReconstructError>;
