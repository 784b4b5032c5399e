//! Sampled X-ray data on the fan-beam grid.

use std::f64::consts::FRAC_PI_2;

use gxr_geometry::{BoundaryFrame, FanBeam, MetricField};

/// Values If(θ_i, α_j), index i·n_alpha + j.
#[derive(Debug, Clone, PartialEq)]
pub struct SinogramGrid {
    pub fan: FanBeam,
    pub values: Vec<f64>,
}

impl SinogramGrid {
    pub fn zeros(fan: FanBeam) -> Self {
        Self { fan, values: vec![0.0; fan.len()] }
    }

    pub fn from_fn(fan: FanBeam, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(fan.len());
        for i in 0..fan.n_theta {
            for j in 0..fan.n_alpha {
                values.push(f(fan.theta(i), fan.alpha(j)));
            }
        }
        Self { fan, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.fan.n_alpha + j]
    }

    /// Bilinear lookup, periodic in θ; α is clamped to the outermost samples,
    /// which only matters for grazing rays within half a sample of ±π/2.
    pub fn lookup(&self, theta: f64, alpha: f64) -> f64 {
        let nt = self.fan.n_theta;
        let na = self.fan.n_alpha;
        let u = theta.rem_euclid(std::f64::consts::TAU) / self.fan.d_theta();
        let i0 = (u.floor() as usize) % nt;
        let i1 = (i0 + 1) % nt;
        let tu = u - u.floor();
        let v = ((alpha + FRAC_PI_2) / self.fan.d_alpha() - 0.5).clamp(0.0, (na - 1) as f64);
        let j0 = (v.floor() as usize).min(na.saturating_sub(2));
        let tv = if na > 1 { v - j0 as f64 } else { 0.0 };
        let j1 = (j0 + 1).min(na - 1);
        let a = self.get(i0, j0) * (1.0 - tv) + self.get(i0, j1) * tv;
        let b = self.get(i1, j0) * (1.0 - tv) + self.get(i1, j1) * tv;
        a * (1.0 - tu) + b * tu
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Inner product against the Santaló measure cos α dΣ on the inward bundle,
    /// for which I* is the adjoint of I.
    pub fn santalo_dot(&self, other: &SinogramGrid, weights: &[f64]) -> f64 {
        self.values.iter().zip(&other.values).zip(weights).map(|((a, b), w)| a * b * w).sum()
    }
}

/// Quadrature weights cos α_j · |∂_θ x|_g · Δθ · Δα of the Santaló measure.
pub fn santalo_weights(m: &dyn MetricField, fan: FanBeam) -> Vec<f64> {
    let mut w = Vec::with_capacity(fan.len());
    let cell = fan.d_theta() * fan.d_alpha();
    for i in 0..fan.n_theta {
        let speed = BoundaryFrame::at(m, fan.theta(i)).tangent_speed;
        for j in 0..fan.n_alpha {
            w.push(fan.alpha(j).cos() * speed * cell);
        }
    }
    w
}
