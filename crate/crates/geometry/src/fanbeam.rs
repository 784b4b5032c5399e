//! Fan-beam coordinates (θ, α) on the inward-pointing boundary bundle.
//!
//! θ is the polar angle of the boundary point, α the angle of the inward
//! unit vector from the inner normal, both measured in the metric.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::metric::{norm_g, Mat2, MetricField, Vec2};

/// g-orthonormal frame at the boundary point (cos θ, sin θ).
#[derive(Debug, Clone, Copy)]
pub struct BoundaryFrame {
    pub point: Vec2,
    pub metric: Mat2,
    /// Inward unit normal ν_in.
    pub normal_in: Vec2,
    /// Unit tangent, counterclockwise.
    pub tangent: Vec2,
    /// |∂_θ x|_g, the arc-length density of the boundary.
    pub tangent_speed: f64,
}

impl BoundaryFrame {
    pub fn at(m: &dyn MetricField, theta: f64) -> Self {
        let point = Vec2::new(theta.cos(), theta.sin());
        let g = m.eval(&point);
        let gi = g.try_inverse().expect("metric must be positive definite");
        let n = gi * point;
        let normal_in = -n / point.dot(&n).sqrt();
        let t = Vec2::new(-theta.sin(), theta.cos());
        let tangent_speed = norm_g(&g, &t);
        Self { point, metric: g, normal_in, tangent: t / tangent_speed, tangent_speed }
    }

    /// v(θ, α) = cos α ν_in + sin α e_T.
    pub fn velocity(&self, alpha: f64) -> Vec2 {
        self.normal_in * alpha.cos() + self.tangent * alpha.sin()
    }

    /// α of a unit vector at this boundary point.
    pub fn angle_of(&self, v: &Vec2) -> f64 {
        let c = v.dot(&(self.metric * self.normal_in));
        let s = v.dot(&(self.metric * self.tangent));
        s.atan2(c)
    }
}

/// θ in [0, 2π) of a boundary point.
pub fn boundary_angle(p: &Vec2) -> f64 {
    let a = p[1].atan2(p[0]);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Uniform fan-beam sampling: θ_i = 2πi/N_θ, α_j at the midpoints of (−π/2, π/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FanBeam {
    pub n_theta: usize,
    pub n_alpha: usize,
}

impl FanBeam {
    pub fn new(n_theta: usize, n_alpha: usize) -> Self {
        Self { n_theta, n_alpha }
    }

    pub fn d_theta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    pub fn d_alpha(&self) -> f64 {
        PI / self.n_alpha as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.d_theta() * i as f64
    }

    pub fn alpha(&self, j: usize) -> f64 {
        -FRAC_PI_2 + self.d_alpha() * (j as f64 + 0.5)
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_alpha
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Conformal, Euclidean, GaussianBump};

    #[test]
    fn euclidean_frame() {
        let f = BoundaryFrame::at(&Euclidean::default(), 0.0);
        assert!((f.normal_in - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((f.tangent - Vec2::new(0.0, 1.0)).norm() < 1e-15);
        assert!((f.tangent_speed - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frame_is_orthonormal_and_angles_round_trip() {
        let m = Conformal::new(GaussianBump { epsilon: 0.2 });
        for i in 0..7 {
            let f = BoundaryFrame::at(&m, 0.9 * i as f64);
            let g = f.metric;
            assert!((f.normal_in.dot(&(g * f.normal_in)) - 1.0).abs() < 1e-13);
            assert!((f.tangent.dot(&(g * f.tangent)) - 1.0).abs() < 1e-13);
            assert!(f.normal_in.dot(&(g * f.tangent)).abs() < 1e-13);
            for a in [-1.4, -0.3, 0.0, 0.8, 1.5] {
                assert!((f.angle_of(&f.velocity(a)) - a).abs() < 1e-13);
            }
        }
    }
}
