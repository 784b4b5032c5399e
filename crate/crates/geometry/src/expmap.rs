//! Exponential map, its inverse by shooting, geodesic distance and the
//! Jacobian factor a(x, y) = det(d exp_x at exp_x⁻¹(y))⁻¹.

use crate::error::{GeometryError, Result};
use crate::geodesic::{rk4_jacobi_step, JacobiState};
use crate::metric::{norm_g, Mat2, MetricField, Vec2};

/// Target length of one RK4 step (in metric length) inside the shooting integrator.
pub const SHOOT_STEP: f64 = 2e-3;
pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-10;

/// Endpoint of the geodesic with initial velocity w at affine time 1, and d exp_x at w.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    pub end: Vec2,
    pub end_velocity: Vec2,
    pub differential: Mat2,
}

/// Integrate γ'' = −Γ(γ', γ') with γ(0) = x, γ'(0) = w over [0, 1], carrying the
/// variational system so that `differential` = d exp_x|_w.
pub fn shoot(m: &dyn MetricField, x: &Vec2, w: &Vec2) -> Result<Shot> {
    let len = norm_g(&m.eval(x), w);
    shoot_steps(m, x, w, ((len / SHOOT_STEP).ceil() as usize).max(16))
}

/// `shoot` with a fixed number of RK4 steps, which makes the result a smooth
/// function of w (useful when differencing in w).
pub fn shoot_steps(m: &dyn MetricField, x: &Vec2, w: &Vec2, n: usize) -> Result<Shot> {
    if m.is_flat() {
        return Ok(Shot { end: x + w, end_velocity: *w, differential: Mat2::identity() });
    }
    let h = 1.0 / n as f64;
    let mut st = JacobiState::initial(*x, *w);
    let limit = m.domain_radius();
    for _ in 0..n {
        st = rk4_jacobi_step(m, &st, h);
        let r = st.x.norm();
        if r > limit || !r.is_finite() {
            return Err(GeometryError::OutsideDomain { radius: r, limit });
        }
    }
    Ok(Shot { end: st.x, end_velocity: st.v, differential: st.j })
}

/// exp_x(w).
pub fn exp_map(m: &dyn MetricField, x: &Vec2, w: &Vec2) -> Result<Vec2> {
    if w.norm() == 0.0 {
        return Ok(*x);
    }
    Ok(shoot(m, x, w)?.end)
}

#[derive(Debug, Clone, Copy)]
pub struct LogResult {
    /// exp_x⁻¹(y).
    pub w: Vec2,
    /// d exp_x at w.
    pub differential: Mat2,
    pub iterations: usize,
    pub residual: f64,
}

/// exp_x⁻¹(y) by damped Newton shooting seeded with the Euclidean chord.
pub fn log_map_full(m: &dyn MetricField, x: &Vec2, y: &Vec2) -> Result<LogResult> {
    newton_log(m, x, y, None)
}

/// exp_x⁻¹(y) with a fixed RK4 step count, Newton run to round-off.
pub fn log_map_steps(m: &dyn MetricField, x: &Vec2, y: &Vec2, n: usize) -> Result<LogResult> {
    let mut l = newton_log(m, x, y, Some(n))?;
    // polish: undamped steps past the default tolerance while the residual drops
    let mut shot = shoot_steps(m, x, &l.w, n)?;
    for _ in 0..3 {
        let Some(jinv) = shot.differential.try_inverse() else { break };
        let w = l.w - jinv * (shot.end - y);
        let s2 = shoot_steps(m, x, &w, n)?;
        let r2 = (s2.end - y).norm();
        if r2 >= l.residual {
            break;
        }
        l.w = w;
        l.differential = s2.differential;
        l.residual = r2;
        shot = s2;
    }
    Ok(l)
}

fn newton_log(m: &dyn MetricField, x: &Vec2, y: &Vec2, steps: Option<usize>) -> Result<LogResult> {
    let shoot = |m: &dyn MetricField, x: &Vec2, w: &Vec2| match steps {
        Some(n) => shoot_steps(m, x, w, n),
        None => shoot(m, x, w),
    };
    if (x - y).norm() == 0.0 {
        return Err(GeometryError::Coincident);
    }
    if m.is_flat() {
        return Ok(LogResult { w: y - x, differential: Mat2::identity(), iterations: 0, residual: 0.0 });
    }
    let mut w = y - x;
    let mut shot = shoot(m, x, &w)?;
    let mut res = (shot.end - y).norm();
    let mut lambda: f64 = 1.0;
    let mut it = 0;
    while res > NEWTON_TOL {
        if it >= NEWTON_MAX_ITER {
            return Err(GeometryError::NewtonFailed { iterations: it, residual: res });
        }
        it += 1;
        let jinv = shot
            .differential
            .try_inverse()
            .ok_or(GeometryError::SingularJacobi { det: shot.differential.determinant(), t: 1.0 })?;
        let dw = jinv * (shot.end - y);
        loop {
            let trial = w - dw * lambda;
            match shoot(m, x, &trial) {
                Ok(s) => {
                    let r = (s.end - y).norm();
                    if r < res {
                        w = trial;
                        shot = s;
                        res = r;
                        lambda = (2.0 * lambda).min(1.0);
                        break;
                    }
                }
                Err(GeometryError::OutsideDomain { .. }) => {}
                Err(e) => return Err(e),
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Err(GeometryError::NewtonFailed { iterations: it, residual: res });
            }
        }
    }
    Ok(LogResult { w, differential: shot.differential, iterations: it, residual: res })
}

pub fn log_map(m: &dyn MetricField, x: &Vec2, y: &Vec2) -> Result<Vec2> {
    Ok(log_map_full(m, x, y)?.w)
}

/// d_g(x, y) = |exp_x⁻¹(y)|_{g(x)}.
pub fn geo_distance(m: &dyn MetricField, x: &Vec2, y: &Vec2) -> Result<f64> {
    if (x - y).norm() == 0.0 {
        return Ok(0.0);
    }
    let w = log_map(m, x, y)?;
    Ok(norm_g(&m.eval(x), &w))
}

/// a(x, y) from the differential of exp_x at exp_x⁻¹(y), measured between g(x) and g(y).
pub fn jacobian_factor(m: &dyn MetricField, x: &Vec2, y: &Vec2) -> Result<f64> {
    if m.is_flat() {
        return Ok(1.0);
    }
    let l = log_map_full(m, x, y)?;
    factor_from_differential(m, x, y, &l.differential)
}

pub fn factor_from_differential(m: &dyn MetricField, x: &Vec2, y: &Vec2, d: &Mat2) -> Result<f64> {
    let det = d.determinant();
    if !(det > 0.0) {
        return Err(GeometryError::SingularJacobi { det, t: 1.0 });
    }
    let gx = m.eval(x).determinant().sqrt();
    let gy = m.eval(y).determinant().sqrt();
    Ok(gx / (gy * det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Conformal, ConstantCurvature, Euclidean, GaussianBump};

    #[test]
    fn euclidean_maps() {
        let m = Euclidean::default();
        let x = Vec2::new(0.0, 0.0);
        assert_eq!(exp_map(&m, &x, &Vec2::new(0.3, 0.4)).unwrap(), Vec2::new(0.3, 0.4));
        assert_eq!(log_map(&m, &x, &Vec2::new(0.3, 0.0)).unwrap(), Vec2::new(0.3, 0.0));
        let d = geo_distance(&m, &x, &(Vec2::new(0.6, 0.8) * 0.5)).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(jacobian_factor(&m, &x, &Vec2::new(0.2, 0.1)).unwrap(), 1.0);
    }

    #[test]
    fn log_inverts_exp_on_gaussian_family() {
        let m = Conformal::new(GaussianBump { epsilon: 0.2 });
        let x = Vec2::new(-0.3, 0.2);
        let y = Vec2::new(0.5, -0.4);
        let w = log_map(&m, &x, &y).unwrap();
        assert!((exp_map(&m, &x, &w).unwrap() - y).norm() < 1e-8);
    }

    #[test]
    fn constant_curvature_jacobian_factor() {
        let k = 0.6;
        let m = Conformal::new(ConstantCurvature { curvature: k });
        let x = Vec2::new(0.1, -0.2);
        let y = Vec2::new(-0.4, 0.5);
        let t = geo_distance(&m, &x, &y).unwrap();
        let a = jacobian_factor(&m, &x, &y).unwrap();
        let s = (k.sqrt() * t).sin() / (k.sqrt() * t);
        assert!((a - 1.0 / s).abs() < 1e-8, "{a} vs {}", 1.0 / s);
    }
}
