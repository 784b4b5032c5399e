//! Geodesic flow: fixed-step RK4 with exit located by bisection, plus the
//! variational (Jacobi) system along a geodesic.

use crate::error::{GeometryError, Result};
use crate::metric::{norm_g, Mat2, MetricField, Vec2};

/// Exit located to this accuracy in t.
pub const EXIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub x: Vec2,
    pub v: Vec2,
}

impl PhaseState {
    pub fn new(x: Vec2, v: Vec2) -> Self {
        Self { x, v }
    }

    pub fn speed(&self, m: &dyn MetricField) -> f64 {
        norm_g(&m.eval(&self.x), &self.v)
    }

    /// Rescale v to unit speed.
    pub fn normalized(&self, m: &dyn MetricField) -> Result<Self> {
        let s = self.speed(m);
        if !(s > 0.0) || !s.is_finite() {
            return Err(GeometryError::ZeroVelocity);
        }
        Ok(Self { x: self.x, v: self.v / s })
    }
}

#[derive(Debug, Clone)]
pub struct TraceOptions {
    /// RK4 step h.
    pub step: f64,
    /// Radius of the exit sphere.
    pub exit_radius: f64,
    /// Trapping timeout.
    pub t_max: f64,
    /// Stop once |x| ≥ r and the ray moves outward. Only valid when the
    /// coordinate circles of radius ≥ r are convex (see `convex_circles`),
    /// since then an outward ray never returns.
    pub stop_radius: Option<f64>,
    /// Cached `diameter_estimate` of the metric, used for domain slack.
    pub diameter: f64,
}

impl TraceOptions {
    /// Defaults: exit at |x| = 1, step τ_est/2000, T_max = 100·diam_estimate.
    pub fn for_metric(m: &dyn MetricField) -> Self {
        let d = diameter_estimate(m);
        Self { step: d / 2000.0, exit_radius: 1.0, t_max: 100.0 * d, stop_radius: None, diameter: d }
    }

    pub fn with_stop_radius(mut self, r: Option<f64>) -> Self {
        self.stop_radius = r;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_exit_radius(mut self, r: f64) -> Self {
        self.exit_radius = r;
        self
    }

    pub fn with_t_max(mut self, t: f64) -> Self {
        self.t_max = t;
        self
    }
}

/// Crude upper bound for the diameter of the unit disk under g: 2·sqrt(max eigenvalue).
pub fn diameter_estimate(m: &dyn MetricField) -> f64 {
    if m.is_flat() {
        return 2.0;
    }
    let mut lam: f64 = 0.0;
    for i in 0..=8 {
        let r = i as f64 / 8.0;
        for j in 0..16 {
            let a = std::f64::consts::TAU * j as f64 / 16.0;
            let e = m.eval(&Vec2::new(r * a.cos(), r * a.sin())).symmetric_eigenvalues();
            lam = lam.max(e[0].max(e[1]));
        }
    }
    2.0 * lam.sqrt()
}

/// A traced geodesic. Samples are the RK4 nodes plus the located exit state.
#[derive(Debug, Clone)]
pub struct RayPath {
    pub samples: Vec<(f64, PhaseState)>,
    /// Exit time, or the stopping time when `stopped`.
    pub exit_time: f64,
    pub exited: bool,
    /// Tracing ended early at the stop radius (see `TraceOptions::stop_radius`).
    pub stopped: bool,
}

impl RayPath {
    pub fn start(&self) -> &PhaseState {
        &self.samples[0].1
    }

    pub fn end(&self) -> &PhaseState {
        &self.samples.last().expect("path has samples").1
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.samples.len();
        if n < 2 {
            return 0;
        }
        let idx = self.samples.partition_point(|(ti, _)| *ti <= t);
        idx.clamp(1, n - 1) - 1
    }

    /// Position at time t by cubic Hermite interpolation between nodes.
    pub fn position_at(&self, t: f64) -> Vec2 {
        if self.samples.len() == 1 {
            return self.samples[0].1.x;
        }
        let i = self.segment(t);
        hermite(&self.samples[i], &self.samples[i + 1], t)
    }

    /// Positions at increasing times `ts`, walking the segments once.
    pub fn positions_sorted(&self, ts: &[f64], out: &mut Vec<Vec2>) {
        out.clear();
        if self.samples.len() == 1 {
            out.extend(ts.iter().map(|_| self.samples[0].1.x));
            return;
        }
        let mut i = 0;
        let last = self.samples.len() - 2;
        for &t in ts {
            while i < last && self.samples[i + 1].0 < t {
                i += 1;
            }
            out.push(hermite(&self.samples[i], &self.samples[i + 1], t));
        }
    }
}

fn hermite(a: &(f64, PhaseState), b: &(f64, PhaseState), t: f64) -> Vec2 {
    let dt = b.0 - a.0;
    if dt <= 0.0 {
        return a.1.x;
    }
    let s = (t - a.0) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    a.1.x * h00 + a.1.v * (h10 * dt) + b.1.x * h01 + b.1.v * (h11 * dt)
}

pub fn rk4_step(m: &dyn MetricField, s: &PhaseState, h: f64) -> PhaseState {
    let k1x = s.v;
    let k1v = m.accel(&s.x, &s.v);
    let x2 = s.x + k1x * (0.5 * h);
    let v2 = s.v + k1v * (0.5 * h);
    let k2v = m.accel(&x2, &v2);
    let x3 = s.x + v2 * (0.5 * h);
    let v3 = s.v + k2v * (0.5 * h);
    let k3v = m.accel(&x3, &v3);
    let x4 = s.x + v3 * h;
    let v4 = s.v + k3v * h;
    let k4v = m.accel(&x4, &v4);
    PhaseState {
        x: s.x + (k1x + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0),
        v: s.v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0),
    }
}

fn check_domain(m: &dyn MetricField, x: &Vec2, slack: f64) -> Result<()> {
    let r = x.norm();
    let limit = m.domain_radius() + slack;
    if r > limit || !r.is_finite() {
        return Err(GeometryError::OutsideDomain { radius: r, limit: m.domain_radius() });
    }
    Ok(())
}

/// Exit time of the straight line x + t v from the disk of radius R (v ≠ 0).
fn chord_exit(x: &Vec2, v: &Vec2, r: f64) -> f64 {
    let a = v.norm_squared();
    let b = x.dot(v);
    let c = x.norm_squared() - r * r;
    let disc = (b * b - a * c).max(0.0);
    ((-b + disc.sqrt()) / a).max(0.0)
}

/// Trace the unit-speed geodesic from `s0` (renormalized) until it crosses the exit sphere.
pub fn trace(m: &dyn MetricField, s0: &PhaseState, opts: &TraceOptions) -> Result<RayPath> {
    check_domain(m, &s0.x, 0.0)?;
    let s0 = s0.normalized(m)?;
    let r_exit = opts.exit_radius;
    let r0 = s0.x.norm();
    if r0 >= r_exit - 1e-14 && s0.x.dot(&s0.v) >= 0.0 {
        return Ok(RayPath { samples: vec![(0.0, s0)], exit_time: 0.0, exited: true, stopped: false });
    }
    if m.is_flat() {
        let tau = chord_exit(&s0.x, &s0.v, r_exit);
        let end = PhaseState { x: s0.x + s0.v * tau, v: s0.v };
        return Ok(RayPath { samples: vec![(0.0, s0), (tau, end)], exit_time: tau, exited: true, stopped: false });
    }
    let h = opts.step;
    if !(h > 1e-14) {
        return Err(GeometryError::StepUnderflow(h));
    }
    let slack = 4.0 * h * opts.diameter;
    let mut samples = Vec::with_capacity((2.0 / h) as usize + 4);
    samples.push((0.0, s0));
    let mut t = 0.0;
    let mut s = s0;
    while t < opts.t_max {
        let next = rk4_step(m, &s, h);
        check_domain(m, &next.x, slack)?;
        if next.x.norm() >= r_exit {
            // bisection on the sub-step length
            let (mut lo, mut hi) = (0.0, h);
            let mut best = next;
            while hi - lo > EXIT_TOL {
                let mid = 0.5 * (lo + hi);
                let st = rk4_step(m, &s, mid);
                if st.x.norm() >= r_exit {
                    hi = mid;
                    best = st;
                } else {
                    lo = mid;
                }
            }
            let tau = t + hi;
            samples.push((tau, best));
            return Ok(RayPath { samples, exit_time: tau, exited: true, stopped: false });
        }
        t += h;
        s = next;
        samples.push((t, s));
        if let Some(rs) = opts.stop_radius {
            if s.x.norm() >= rs && s.x.dot(&s.v) > 0.0 {
                return Ok(RayPath { samples, exit_time: t, exited: false, stopped: true });
            }
        }
    }
    Ok(RayPath { samples, exit_time: opts.t_max, exited: false, stopped: false })
}

/// True when every sampled coordinate circle |x| = ρ, ρ ∈ [r_min, r_max], is
/// strictly convex: a geodesic tangent to it has d²|x|²/dt² = 2(|v|² + x·ẍ) > 0.
pub fn convex_circles(m: &dyn MetricField, r_min: f64, r_max: f64) -> bool {
    const RADII: usize = 24;
    const ANGLES: usize = 96;
    if m.is_flat() {
        return true;
    }
    (0..=RADII).all(|i| {
        let rho = r_min + (r_max - r_min) * i as f64 / RADII as f64;
        (0..ANGLES).all(|q| {
            let a = std::f64::consts::TAU * q as f64 / ANGLES as f64;
            let x = Vec2::new(a.cos(), a.sin()) * rho;
            let u = Vec2::new(-a.sin(), a.cos());
            u.norm_squared() + x.dot(&m.accel(&x, &u)) > 0.0
        })
    })
}

/// Trace with default options and the given step.
pub fn trace_geodesic(m: &dyn MetricField, s0: &PhaseState, h_step: f64) -> Result<RayPath> {
    let opts = TraceOptions::for_metric(m).with_step(h_step);
    trace(m, s0, &opts)
}

/// τ(x, v) for the exit from the closed unit disk.
pub fn exit_time(m: &dyn MetricField, x: &Vec2, v: &Vec2) -> Result<f64> {
    let opts = TraceOptions::for_metric(m);
    let p = trace(m, &PhaseState::new(*x, *v), &opts)?;
    if !p.exited {
        return Err(GeometryError::Trapped(opts.t_max));
    }
    Ok(p.exit_time)
}

/// Phase state together with the Jacobi matrices J, J'.
#[derive(Debug, Clone, Copy)]
pub struct JacobiState {
    pub x: Vec2,
    pub v: Vec2,
    pub j: Mat2,
    pub jp: Mat2,
}

impl JacobiState {
    /// J(0) = 0, J'(0) = Id.
    pub fn initial(x: Vec2, v: Vec2) -> Self {
        Self { x, v, j: Mat2::zeros(), jp: Mat2::identity() }
    }
}

fn jacobi_rhs(m: &dyn MetricField, s: &JacobiState) -> (Vec2, Vec2, Mat2, Mat2) {
    let a = m.accel(&s.x, &s.v);
    let (ax, av) = m.accel_jacobians(&s.x, &s.v);
    (s.v, a, s.jp, ax * s.j + av * s.jp)
}

fn jacobi_axpy(s: &JacobiState, k: &(Vec2, Vec2, Mat2, Mat2), h: f64) -> JacobiState {
    JacobiState { x: s.x + k.0 * h, v: s.v + k.1 * h, j: s.j + k.2 * h, jp: s.jp + k.3 * h }
}

pub fn rk4_jacobi_step(m: &dyn MetricField, s: &JacobiState, h: f64) -> JacobiState {
    let k1 = jacobi_rhs(m, s);
    let k2 = jacobi_rhs(m, &jacobi_axpy(s, &k1, 0.5 * h));
    let k3 = jacobi_rhs(m, &jacobi_axpy(s, &k2, 0.5 * h));
    let k4 = jacobi_rhs(m, &jacobi_axpy(s, &k3, h));
    let w = h / 6.0;
    JacobiState {
        x: s.x + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * w,
        v: s.v + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * w,
        j: s.j + (k1.2 + k2.2 * 2.0 + k3.2 * 2.0 + k4.2) * w,
        jp: s.jp + (k1.3 + k2.3 * 2.0 + k3.3 * 2.0 + k4.3) * w,
    }
}

/// Jacobi fields along a traced unit-speed geodesic, J(0) = 0, J'(0) = Id.
#[derive(Debug, Clone)]
pub struct JacobiSolution {
    pub along: RayPath,
    pub j: Vec<Mat2>,
    pub jp: Vec<Mat2>,
}

impl JacobiSolution {
    /// First sign change of det J after t = 0, linearly interpolated between nodes.
    pub fn first_conjugate_time(&self) -> Option<f64> {
        let mut prev = (0.0, 0.0);
        for (i, jm) in self.j.iter().enumerate().skip(1) {
            let t = self.along.samples[i].0;
            let d = jm.determinant();
            if d <= 0.0 && i > 1 {
                let (t0, d0) = prev;
                return Some(t0 + (t - t0) * d0 / (d0 - d));
            }
            prev = (t, d);
        }
        None
    }
}

/// Integrate geodesic and Jacobi system with fixed step until exit or T_max.
pub fn trace_jacobi(m: &dyn MetricField, s0: &PhaseState, opts: &TraceOptions) -> Result<JacobiSolution> {
    check_domain(m, &s0.x, 0.0)?;
    let s0 = s0.normalized(m)?;
    let h = opts.step;
    if !(h > 1e-14) {
        return Err(GeometryError::StepUnderflow(h));
    }
    let slack = 4.0 * h * opts.diameter;
    let mut st = JacobiState::initial(s0.x, s0.v);
    let mut samples = vec![(0.0, s0)];
    let mut js = vec![st.j];
    let mut jps = vec![st.jp];
    let mut t = 0.0;
    let starts_outward = s0.x.norm() >= opts.exit_radius - 1e-14 && s0.x.dot(&s0.v) >= 0.0;
    if starts_outward {
        return Ok(JacobiSolution {
            along: RayPath { samples, exit_time: 0.0, exited: true, stopped: false },
            j: js,
            jp: jps,
        });
    }
    while t < opts.t_max {
        let next = rk4_jacobi_step(m, &st, h);
        check_domain(m, &next.x, slack)?;
        if next.x.norm() >= opts.exit_radius {
            let (mut lo, mut hi) = (0.0, h);
            let mut best = next;
            while hi - lo > EXIT_TOL {
                let mid = 0.5 * (lo + hi);
                let s = rk4_jacobi_step(m, &st, mid);
                if s.x.norm() >= opts.exit_radius {
                    hi = mid;
                    best = s;
                } else {
                    lo = mid;
                }
            }
            let tau = t + hi;
            samples.push((tau, PhaseState::new(best.x, best.v)));
            js.push(best.j);
            jps.push(best.jp);
            return Ok(JacobiSolution {
                along: RayPath { samples, exit_time: tau, exited: true, stopped: false },
                j: js,
                jp: jps,
            });
        }
        t += h;
        st = next;
        samples.push((t, PhaseState::new(st.x, st.v)));
        js.push(st.j);
        jps.push(st.jp);
    }
    Ok(JacobiSolution { along: RayPath { samples, exit_time: opts.t_max, exited: false, stopped: false }, j: js, jp: jps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Conformal, ConstantCurvature, Euclidean, GaussianBump};

    #[test]
    fn euclidean_chord() {
        let m = Euclidean::default();
        let p = trace_geodesic(&m, &PhaseState::new(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)), 1e-3)
            .unwrap();
        assert!((p.exit_time - 2.0).abs() < 1e-12);
        assert!((p.end().x - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn outward_start_has_zero_exit_time() {
        let m = Conformal::new(GaussianBump { epsilon: 0.2 });
        let t = exit_time(&m, &Vec2::new(1.0, 0.0), &Vec2::new(0.3, 1.0)).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn hermite_interpolation_is_exact_on_lines() {
        let m = Euclidean::default();
        let p = trace_geodesic(&m, &PhaseState::new(Vec2::new(0.1, 0.2), Vec2::new(0.6, -0.8)), 1e-3)
            .unwrap();
        let q = p.position_at(0.37);
        assert!((q - Vec2::new(0.1 + 0.6 * 0.37, 0.2 - 0.8 * 0.37)).norm() < 1e-14);
    }

    #[test]
    fn jacobi_determinant_on_constant_curvature() {
        // Along a geodesic through the origin J is diagonal in the
        // (tangent, normal) frame: det J = t·sin(√K t)/√K up to the frame scale.
        let k = 0.8;
        let m = Conformal::new(ConstantCurvature { curvature: k });
        let x = Vec2::zeros();
        let opts = TraceOptions::for_metric(&m).with_step(1e-3);
        let sol = trace_jacobi(&m, &PhaseState::new(x, Vec2::new(1.0, 0.0)), &opts).unwrap();
        let i = sol.j.len() / 2;
        let t = sol.along.samples[i].0;
        let y = sol.along.samples[i].1.x;
        // Riemannian determinant of J: coordinate det times sqrt(det g(y)) / sqrt(det g(x))
        let det_g = sol.j[i].determinant() * m.eval(&y).determinant().sqrt() / m.eval(&x).determinant().sqrt();
        let expected = t * (k.sqrt() * t).sin() / k.sqrt();
        assert!((det_g - expected).abs() < 1e-8 * expected.abs().max(1.0), "{det_g} vs {expected}");
    }
}
