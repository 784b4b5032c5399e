use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("metric evaluated outside its domain at |x| = {radius:.6} (domain radius {limit:.6})")]
    OutsideDomain { radius: f64, limit: f64 },
    #[error("integration step underflow (h = {0:e})")]
    StepUnderflow(f64),
    #[error("zero initial velocity")]
    ZeroVelocity,
    #[error("geodesic did not exit before T_max = {0}")]
    Trapped(f64),
    #[error("shooting did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },
    #[error("singular Jacobi matrix (det = {det:e}) at t = {t}")]
    SingularJacobi { det: f64, t: f64 },
    #[error("points coincide")]
    Coincident,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
