use gxr_geometry::GeometryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("ray tracing failed: {0}")]
    Trace(#[from] GeometryError),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite values")]
    NonFinite,
    #[error("sinogram lookup outside the sampled range (theta={theta}, alpha={alpha})")]
    OutsideSinogram { theta: f64, alpha: f64 },
    #[error("invalid settings: {0}")]
    Settings(String),
}

pub type Result<T> = std::result::Result<T, TransformError>;
