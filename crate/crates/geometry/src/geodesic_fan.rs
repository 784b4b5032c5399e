//! Tabulated geodesic polar coordinates around a fixed center.
//!
//! Rays leave the center with g-unit velocities v(θ) = g(x)^{-1/2}(cos θ, sin θ)
//! and are sampled at uniform t together with the Jacobi field ∂_θ. The map
//! Φ(t, θ) = exp_x(t v(θ)) is then a bicubic Hermite patch per (t, θ) cell,
//! which Newton inverts cheaply. This gives exp_x⁻¹ and det dΦ at many
//! points y for the price of one fan.

use std::f64::consts::TAU;

use crate::error::{GeometryError, Result};
use crate::geodesic::{rk4_jacobi_step, JacobiState};
use crate::metric::{inv_sqrtm, Mat2, MetricField, Vec2};

#[derive(Debug, Clone)]
struct FanRay {
    x: Vec<Vec2>,
    xt: Vec<Vec2>,
    xth: Vec<Vec2>,
    xtth: Vec<Vec2>,
}

/// Geodesic polar coordinates (t, θ) ↦ Φ(t, θ) around `center`.
#[derive(Debug, Clone)]
pub struct GeodesicFan {
    pub center: Vec2,
    /// g(center)^{-1/2}.
    pub frame: Mat2,
    pub dt: f64,
    pub n_angles: usize,
    flat: bool,
    rays: Vec<FanRay>,
}

/// Result of locating a point in the fan.
#[derive(Debug, Clone, Copy)]
pub struct FanPoint {
    /// Geodesic distance from the center.
    pub t: f64,
    pub theta: f64,
    /// Coordinate determinant det[∂_t Φ, ∂_θ Φ].
    pub det: f64,
    /// ∂_t Φ, the unit tangent of the connecting geodesic at y.
    pub velocity: Vec2,
}

fn h_basis(s: f64) -> ([f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        [2.0 * s3 - 3.0 * s2 + 1.0, -2.0 * s3 + 3.0 * s2, s3 - 2.0 * s2 + s, s3 - s2],
        [6.0 * s2 - 6.0 * s, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, 3.0 * s2 - 2.0 * s],
    )
}

impl GeodesicFan {
    /// Trace `n_angles` rays with step `dt` until each is outside the disk of
    /// radius `r_stop` and moving away from it.
    pub fn build(m: &dyn MetricField, center: Vec2, n_angles: usize, dt: f64, r_stop: f64) -> Result<Self> {
        if center.norm() > m.domain_radius() {
            return Err(GeometryError::OutsideDomain { radius: center.norm(), limit: m.domain_radius() });
        }
        let frame = inv_sqrtm(&m.eval(&center));
        let flat = m.is_flat();
        let mut rays = Vec::with_capacity(if flat { 0 } else { n_angles });
        if !flat {
            let limit = m.domain_radius();
            let t_max = 100.0 * (r_stop + center.norm()) * 4.0;
            for q in 0..n_angles {
                let th = TAU * q as f64 / n_angles as f64;
                let v = frame * Vec2::new(th.cos(), th.sin());
                let u = frame * Vec2::new(-th.sin(), th.cos());
                let mut st = JacobiState::initial(center, v);
                let mut ray = FanRay { x: vec![center], xt: vec![v], xth: vec![Vec2::zeros()], xtth: vec![u] };
                let mut t = 0.0;
                while (st.x.norm() <= r_stop || st.x.dot(&st.v) <= 0.0) && t < t_max {
                    st = rk4_jacobi_step(m, &st, dt);
                    t += dt;
                    if st.x.norm() > limit {
                        break;
                    }
                    ray.x.push(st.x);
                    ray.xt.push(st.v);
                    ray.xth.push(st.j * u);
                    ray.xtth.push(st.jp * u);
                }
                rays.push(ray);
            }
        }
        Ok(Self { center, frame, dt, n_angles, flat, rays })
    }

    fn d_theta(&self) -> f64 {
        TAU / self.n_angles as f64
    }

    /// Φ and its partials at (t, θ), or None outside the tabulated range.
    pub fn eval(&self, t: f64, theta: f64) -> Option<(Vec2, Vec2, Vec2)> {
        if self.flat {
            let d = self.frame * Vec2::new(theta.cos(), theta.sin());
            let u = self.frame * Vec2::new(-theta.sin(), theta.cos());
            return Some((self.center + d * t, d, u * t));
        }
        if t < 0.0 {
            return None;
        }
        let dth = self.d_theta();
        let th = theta.rem_euclid(TAU);
        let qf = th / dth;
        let q0 = (qf.floor() as usize).min(self.n_angles - 1);
        let q1 = (q0 + 1) % self.n_angles;
        let r = qf - q0 as f64;
        let kf = t / self.dt;
        let k0 = kf.floor() as usize;
        let s = kf - k0 as f64;
        let (ra, rb) = (&self.rays[q0], &self.rays[q1]);
        if k0 + 1 >= ra.x.len() || k0 + 1 >= rb.x.len() {
            return None;
        }
        let (hs, dhs) = h_basis(s);
        let (hr, dhr) = h_basis(r);
        let corners = [(ra, k0, 0usize, 0usize), (ra, k0 + 1, 1, 0), (rb, k0, 0, 1), (rb, k0 + 1, 1, 1)];
        let mut p = Vec2::zeros();
        let mut pt = Vec2::zeros();
        let mut pth = Vec2::zeros();
        for (ray, k, a, b) in corners {
            let f = ray.x[k];
            let ft = ray.xt[k] * self.dt;
            let fth = ray.xth[k] * dth;
            let ftth = ray.xtth[k] * (self.dt * dth);
            p += f * (hs[a] * hr[b]) + ft * (hs[a + 2] * hr[b]) + fth * (hs[a] * hr[b + 2])
                + ftth * (hs[a + 2] * hr[b + 2]);
            pt += f * (dhs[a] * hr[b]) + ft * (dhs[a + 2] * hr[b]) + fth * (dhs[a] * hr[b + 2])
                + ftth * (dhs[a + 2] * hr[b + 2]);
            pth += f * (hs[a] * dhr[b]) + ft * (hs[a + 2] * dhr[b]) + fth * (hs[a] * dhr[b + 2])
                + ftth * (hs[a + 2] * dhr[b + 2]);
        }
        Some((p, pt / self.dt, pth / dth))
    }

    /// Solve Φ(t, θ) = y by Newton on the interpolant, seeded with the chord.
    pub fn locate(&self, y: &Vec2) -> Option<FanPoint> {
        let einv = self.frame.try_inverse()?;
        let w = einv * (y - self.center);
        let t0 = w.norm();
        if t0 == 0.0 {
            return None;
        }
        let th0 = w[1].atan2(w[0]);
        if self.flat {
            let d = self.frame * Vec2::new(th0.cos(), th0.sin());
            return Some(FanPoint { t: t0, theta: th0, det: t0 * self.frame.determinant(), velocity: d });
        }
        let (mut t, mut th) = (t0, th0);
        for _ in 0..30 {
            let (p, pt, pth) = self.eval(t, th)?;
            let f = p - y;
            let jac = Mat2::from_columns(&[pt, pth]);
            let step = jac.try_inverse()? * f;
            t -= step[0];
            th -= step[1];
            if t <= 0.0 {
                t = 0.5 * (t + step[0]);
            }
            if step[0].abs() < 1e-13 && (step[1] * t).abs() < 1e-13 {
                let (_, pt, pth) = self.eval(t, th)?;
                let det = pt[0] * pth[1] - pt[1] * pth[0];
                return Some(FanPoint { t, theta: th.rem_euclid(TAU), det, velocity: pt });
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expmap::{geo_distance, jacobian_factor};
    use crate::metric::{Conformal, GaussianBump};

    #[test]
    fn fan_inverse_matches_shooting() {
        let m = Conformal::new(GaussianBump { epsilon: 0.2 });
        let x = Vec2::new(0.2, -0.1);
        let fan = GeodesicFan::build(&m, x, 256, 0.01, 1.05).unwrap();
        for y in [Vec2::new(-0.6, 0.3), Vec2::new(0.25, -0.08), Vec2::new(0.7, 0.6)] {
            let p = fan.locate(&y).unwrap();
            let d = geo_distance(&m, &x, &y).unwrap();
            assert!((p.t - d).abs() < 1e-8, "{} vs {}", p.t, d);
            // a = t / (sqrt det g(y) · |det dΦ|)
            let a = p.t / (m.eval(&y).determinant().sqrt() * p.det.abs());
            let a_ref = jacobian_factor(&m, &x, &y).unwrap();
            assert!((a - a_ref).abs() < 1e-6, "{a} vs {a_ref}");
        }
    }
}
