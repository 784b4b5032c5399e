//! Quadrature of a field along traced rays.

use gxr_geometry::{convex_circles, trace, MetricField, PhaseState, RayPath, TraceOptions, Vec2};

use crate::error::Result;
use crate::grid::Field;

/// One-dimensional rule used along each ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayRule {
    /// Composite trapezoid with uniform spacing at most `max_step`.
    Trapezoid { max_step: f64 },
    /// Composite Gauss–Legendre, panels of length at most `panel`.
    GaussLegendre { panel: f64, order: usize },
}

impl RayRule {
    /// Nodes and weights on [a, b].
    pub fn nodes(&self, a: f64, b: f64, ts: &mut Vec<f64>, ws: &mut Vec<f64>) {
        ts.clear();
        ws.clear();
        let len = b - a;
        if !(len > 0.0) {
            return;
        }
        match *self {
            RayRule::Trapezoid { max_step } => {
                let n = (len / max_step).ceil().max(1.0) as usize;
                let d = len / n as f64;
                for k in 0..=n {
                    ts.push(a + d * k as f64);
                    ws.push(if k == 0 || k == n { 0.5 * d } else { d });
                }
            }
            RayRule::GaussLegendre { panel, order } => {
                let panels = (len / panel).ceil().max(1.0) as usize;
                let (x, w) = gxr_geometry::quadrature::composite_gauss_legendre(order, panels, a, b);
                ts.extend(x);
                ws.extend(w);
            }
        }
    }
}

/// RK4 step used for curved rays inside the transforms; sample positions
/// between RK4 nodes come from cubic Hermite interpolation.
pub const DEFAULT_RAY_STEP: f64 = 0.01;

/// A ray together with the parameter range where it may meet the support.
pub struct TracedRay {
    pub path: RayPath,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Trace options for rays whose integrand vanishes outside the centered disk
/// of radius `support`. Curved rays stop early once they leave that disk
/// outward, provided the coordinate circles beyond it are convex.
pub fn ray_options(m: &dyn MetricField, step: f64, support: Option<f64>) -> TraceOptions {
    let stop = support
        .map(|r| r + 4.0 * step)
        .filter(|&r| r < 1.0 && !m.is_flat() && convex_circles(m, r, 1.0));
    TraceOptions::for_metric(m).with_step(step).with_stop_radius(stop)
}

/// Trace the unit-speed ray from (x, v) with `opts` (see `ray_options`) and
/// find the sub-interval where it lies within `support` (a centered radius).
pub fn trace_clipped(
    m: &dyn MetricField,
    x: &Vec2,
    v: &Vec2,
    opts: &TraceOptions,
    support: Option<f64>,
) -> Result<TracedRay> {
    let step = opts.step;
    let path = trace(m, &PhaseState::new(*x, *v), opts)?;
    let tau = path.exit_time;
    let (t_lo, t_hi) = match support {
        None => (0.0, tau),
        Some(r) if m.is_flat() => {
            let s = path.start();
            let b = s.x.dot(&s.v);
            let c = s.x.norm_squared() - r * r;
            let a = s.v.norm_squared();
            let disc = b * b - a * c;
            if disc <= 0.0 {
                (0.0, 0.0)
            } else {
                let q = disc.sqrt();
                (((-b - q) / a).max(0.0), ((-b + q) / a).min(tau))
            }
        }
        Some(r) => {
            let pad = 2.0 * step;
            let mut lo = None;
            let mut hi = 0.0;
            for (k, (t, s)) in path.samples.iter().enumerate() {
                if s.x.norm() <= r + pad {
                    if lo.is_none() {
                        lo = Some(if k == 0 { 0.0 } else { path.samples[k - 1].0 });
                    }
                    hi = path.samples.get(k + 1).map_or(*t, |n| n.0);
                }
            }
            match lo {
                Some(l) => (l, hi.min(tau)),
                None => (0.0, 0.0),
            }
        }
    };
    Ok(TracedRay { path, t_lo, t_hi })
}

/// ∫ f(γ(t)) dt over [t_lo, t_hi] with the given rule.
pub fn integrate_along(ray: &TracedRay, f: &dyn Field, rule: &RayRule, scratch: &mut RayScratch) -> f64 {
    scratch.fill(ray, rule);
    scratch.pos.iter().zip(&scratch.ws).map(|(p, w)| w * f.value(p)).sum()
}

/// Reusable buffers for sample positions along a ray.
#[derive(Default)]
pub struct RayScratch {
    pub ts: Vec<f64>,
    pub ws: Vec<f64>,
    pub pos: Vec<Vec2>,
}

impl RayScratch {
    pub fn fill(&mut self, ray: &TracedRay, rule: &RayRule) {
        rule.nodes(ray.t_lo, ray.t_hi, &mut self.ts, &mut self.ws);
        ray.path.positions_sorted(&self.ts, &mut self.pos);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials() {
        let mut ts = Vec::new();
        let mut ws = Vec::new();
        RayRule::Trapezoid { max_step: 0.01 }.nodes(0.0, 1.0, &mut ts, &mut ws);
        let s: f64 = ts.iter().zip(&ws).map(|(t, w)| w * t).sum();
        assert!((s - 0.5).abs() < 1e-14);
        RayRule::GaussLegendre { panel: 0.3, order: 4 }.nodes(0.2, 1.0, &mut ts, &mut ws);
        let s: f64 = ts.iter().zip(&ws).map(|(t, w)| w * t.powi(5)).sum();
        assert!((s - (1.0 - 0.2f64.powi(6)) / 6.0).abs() < 1e-14);
    }
}
