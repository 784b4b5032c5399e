//! Geometry on the closed unit disk with a C^k Riemannian metric: metric
//! families, geodesic tracing, Jacobi fields, exponential map and its inverse,
//! the Jacobian factor a(x, y), fan-beam coordinates and simplicity checks.

pub mod error;
pub mod expmap;
pub mod fanbeam;
pub mod geodesic;
pub mod geodesic_fan;
pub mod metric;
pub mod quadrature;
pub mod simplicity;

pub use error::{GeometryError, Result};
pub use expmap::{exp_map, geo_distance, jacobian_factor, log_map, log_map_full, log_map_steps, shoot, shoot_steps, LogResult};
pub use fanbeam::{boundary_angle, BoundaryFrame, FanBeam};
pub use geodesic::{
    convex_circles, exit_time, trace, trace_geodesic, trace_jacobi, JacobiSolution, PhaseState, RayPath,
    TraceOptions,
};
pub use geodesic_fan::GeodesicFan;
pub use metric::{
    conorm_g, inv_sqrtm, norm_g, sqrt_det, sqrtm, Conformal, ConformalFactor, ConstantCurvature,
    Euclidean, FiniteRegularity, GaussianBump, Mat2, MetricFamily, MetricField, Vec2,
};
pub use simplicity::{check_simplicity, check_simplicity_with, RayWitness, SimplicityOptions, SimplicityReport};
