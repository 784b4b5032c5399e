//! Certification of the three conditions defining a simple manifold on a
//! sampled set of boundary points and fan-beam rays.

use crate::fanbeam::{BoundaryFrame, FanBeam};
use crate::geodesic::{trace_jacobi, PhaseState, TraceOptions};
use crate::metric::{MetricField, Vec2};

#[derive(Debug, Clone)]
pub struct SimplicityOptions {
    pub boundary_samples: usize,
    pub rays: FanBeam,
    pub step: f64,
}

impl Default for SimplicityOptions {
    fn default() -> Self {
        Self { boundary_samples: 64, rays: FanBeam::new(24, 12), step: 5e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayWitness {
    pub theta: f64,
    pub alpha: f64,
    /// Time of the event along the unit-speed ray (conjugate time or T_max).
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct SimplicityReport {
    pub convex: bool,
    /// Smallest sampled second fundamental form and the θ where it occurs.
    pub min_second_fundamental_form: (f64, f64),
    pub non_trapping: bool,
    pub trapped_witness: Option<RayWitness>,
    pub no_conjugate_points: bool,
    pub conjugate_witness: Option<RayWitness>,
    pub rays_checked: usize,
}

impl SimplicityReport {
    pub fn is_simple(&self) -> bool {
        self.convex && self.non_trapping && self.no_conjugate_points
    }
}

/// Second fundamental form of the unit circle at θ with respect to the inner normal,
/// normalized by |T|²_g.
pub fn second_fundamental_form(m: &dyn MetricField, theta: f64) -> f64 {
    let f = BoundaryFrame::at(m, theta);
    let t = Vec2::new(-theta.sin(), theta.cos());
    // covariant derivative of the boundary velocity: β'' + Γ(β', β') = β'' − accel
    let cov = -f.point - m.accel(&f.point, &t);
    cov.dot(&(f.metric * f.normal_in)) / (f.tangent_speed * f.tangent_speed)
}

pub fn check_simplicity(m: &dyn MetricField) -> SimplicityReport {
    check_simplicity_with(m, &SimplicityOptions::default())
}

pub fn check_simplicity_with(m: &dyn MetricField, opts: &SimplicityOptions) -> SimplicityReport {
    let mut min_ii = (f64::INFINITY, 0.0);
    for i in 0..opts.boundary_samples {
        let th = std::f64::consts::TAU * i as f64 / opts.boundary_samples as f64;
        let ii = second_fundamental_form(m, th);
        if ii < min_ii.0 {
            min_ii = (ii, th);
        }
    }
    let trace_opts = TraceOptions::for_metric(m).with_step(opts.step);
    let mut trapped = None;
    let mut conj: Option<RayWitness> = None;
    let mut count = 0;
    for i in 0..opts.rays.n_theta {
        let th = opts.rays.theta(i);
        let frame = BoundaryFrame::at(m, th);
        for j in 0..opts.rays.n_alpha {
            let al = opts.rays.alpha(j);
            let s0 = PhaseState::new(frame.point, frame.velocity(al));
            count += 1;
            let sol = match trace_jacobi(m, &s0, &trace_opts) {
                Ok(s) => s,
                Err(_) => {
                    if trapped.is_none() {
                        trapped = Some(RayWitness { theta: th, alpha: al, t: f64::NAN });
                    }
                    continue;
                }
            };
            if !sol.along.exited && trapped.is_none() {
                trapped = Some(RayWitness { theta: th, alpha: al, t: sol.along.exit_time });
            }
            if let Some(t) = sol.first_conjugate_time() {
                if conj.is_none_or(|c| t < c.t) {
                    conj = Some(RayWitness { theta: th, alpha: al, t });
                }
            }
        }
    }
    SimplicityReport {
        convex: min_ii.0 > 0.0,
        min_second_fundamental_form: min_ii,
        non_trapping: trapped.is_none(),
        trapped_witness: trapped,
        no_conjugate_points: conj.is_none(),
        conjugate_witness: conj,
        rays_checked: count,
    }
}
