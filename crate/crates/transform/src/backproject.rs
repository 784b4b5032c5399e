//! Backprojection I*h(x) = ∫_{S_x M} h(backward exit of (x, v)) dS_x(v).
//!
//! Directions are v_k = g(x)^{-1/2}(cos φ_k, sin φ_k) with φ_k uniform, so the
//! g-induced circle measure is dφ.

use std::f64::consts::TAU;

use gxr_geometry::{boundary_angle, inv_sqrtm, trace, BoundaryFrame, MetricField, PhaseState, TraceOptions, Vec2};
use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{GridSpec, ScalarGrid};
use crate::sinogram::SinogramGrid;

/// g(x)-unit direction φ_k = 2π(k + ½)/n.
pub fn direction(frame: &gxr_geometry::Mat2, k: usize, n: usize) -> Vec2 {
    let a = TAU * (k as f64 + 0.5) / n as f64;
    frame * Vec2::new(a.cos(), a.sin())
}

/// Fan-beam coordinates (θ, α) of the ray through (x, v).
pub fn ray_coordinates(m: &dyn MetricField, x: &Vec2, v: &Vec2, ray_step: f64) -> Result<(f64, f64)> {
    let opts = TraceOptions::for_metric(m).with_step(ray_step);
    let back = trace(m, &PhaseState::new(*x, -v), &opts)?;
    let end = back.end();
    let theta = boundary_angle(&end.x);
    let frame = BoundaryFrame::at(m, theta);
    let inward = -end.v / end.speed(m);
    Ok((theta, frame.angle_of(&inward)))
}

/// I*h on the nodes of `spec` inside the unit disk, with `n_dir` directions.
pub fn backproject(
    m: &dyn MetricField,
    h: &SinogramGrid,
    spec: GridSpec,
    n_dir: usize,
    ray_step: f64,
) -> Result<ScalarGrid> {
    let dphi = TAU / n_dir as f64;
    let values = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let x = spec.node(idx);
            if x.norm() >= 1.0 {
                return Ok(0.0);
            }
            let frame = inv_sqrtm(&m.eval(&x));
            let mut acc = 0.0;
            for k in 0..n_dir {
                let v = direction(&frame, k, n_dir);
                let (theta, alpha) = ray_coordinates(m, &x, &v, ray_step)?;
                acc += h.lookup(theta, alpha);
            }
            Ok(acc * dphi)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ScalarGrid { spec, values, mask: None })
}
