use gxr_geometry::GeometryError;
use gxr_transform::TransformError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("the kernel is singular at z = 0")]
    SingularPoint,
    #[error("symbol requested at ξ = 0")]
    ZeroFrequency,
    #[error("point {0:?} lies outside the extended disk")]
    OutsideDomain([f64; 2]),
    #[error("frequency range too narrow for a fit: {0}")]
    FitRange(String),
    #[error("invalid settings: {0}")]
    Settings(String),
}

pub type Result<T> = std::result::Result<T, SymbolError>;
