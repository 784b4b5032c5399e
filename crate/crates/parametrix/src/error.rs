use gxr_kernel_symbol::SymbolError;
use gxr_transform::TransformError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParametrixError {
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("input reaches radius {radius}, outside the region ψ = φ = 1 of radius {limit}")]
    SupportViolation { radius: f64, limit: f64 },
    #[error("calibration constant must be positive and finite, got {0}")]
    Calibration(f64),
    #[error("the symbol has no separable form")]
    NotSeparable,
    #[error("fit failure: {0}")]
    Fit(String),
    #[error("invalid settings: {0}")]
    Settings(String),
}

pub type Result<T> = std::result::Result<T, ParametrixError>;
