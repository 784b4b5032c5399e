//! Forward X-ray transform on the fan-beam grid.

use gxr_geometry::{BoundaryFrame, FanBeam, MetricField};
use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{Field, GridSpec};
use crate::rays::{integrate_along, ray_options, trace_clipped, RayRule, RayScratch, DEFAULT_RAY_STEP};
use crate::sinogram::SinogramGrid;

/// Quadrature settings shared by all ray integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySettings {
    pub rule: RayRule,
    /// RK4 step for curved rays.
    pub ray_step: f64,
}

impl RaySettings {
    /// Trapezoid with spacing h/2, suited to bilinearly interpolated grid data.
    pub fn for_grid(spec: &GridSpec) -> Self {
        Self { rule: RayRule::Trapezoid { max_step: 0.5 * spec.h }, ray_step: DEFAULT_RAY_STEP }
    }

    /// Gauss–Legendre panels for smooth analytic fields.
    pub fn analytic() -> Self {
        Self { rule: RayRule::GaussLegendre { panel: 0.05, order: 8 }, ray_step: DEFAULT_RAY_STEP }
    }
}

/// If(θ_i, α_j) = ∫₀^τ f(γ(t)) dt for every fan-beam sample.
pub fn xray(m: &dyn MetricField, f: &dyn Field, fan: FanBeam, settings: &RaySettings) -> Result<SinogramGrid> {
    let support = f.support_radius();
    let opts = ray_options(m, settings.ray_step, support);
    let rows: Vec<Vec<f64>> = (0..fan.n_theta)
        .into_par_iter()
        .map(|i| {
            let frame = BoundaryFrame::at(m, fan.theta(i));
            let mut scratch = RayScratch::default();
            (0..fan.n_alpha)
                .map(|j| {
                    let v = frame.velocity(fan.alpha(j));
                    if support.is_some_and(|r| r <= 0.0) {
                        return Ok(0.0);
                    }
                    let ray = trace_clipped(m, &frame.point, &v, &opts, support)?;
                    Ok(integrate_along(&ray, f, &settings.rule, &mut scratch))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(SinogramGrid { fan, values: rows.concat() })
}
