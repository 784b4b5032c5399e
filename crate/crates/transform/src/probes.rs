//! Analytic test functions.

use gxr_geometry::Vec2;
use rand::Rng;

use crate::cutoff::RadialCutoff;
use crate::grid::Field;

/// Smoothly windowed finite cosine series Σ a_k cos(ξ_k·x + c_k).
#[derive(Debug, Clone)]
pub struct BandLimited {
    pub modes: Vec<(Vec2, f64, f64)>,
    pub window: RadialCutoff,
}

impl BandLimited {
    /// `n_modes` random frequencies with |ξ| ≤ `max_freq`, windowed to radius `r_out`.
    pub fn random<R: Rng>(rng: &mut R, n_modes: usize, max_freq: f64, r_in: f64, r_out: f64) -> Self {
        let modes = (0..n_modes)
            .map(|_| {
                let r = max_freq * rng.gen::<f64>().sqrt();
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                let xi = Vec2::new(r * a.cos(), r * a.sin());
                (xi, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        Self { modes, window: RadialCutoff::new(r_in, r_out) }
    }
}

impl Field for BandLimited {
    fn value(&self, p: &Vec2) -> f64 {
        let w = self.window.eval(p);
        if w == 0.0 {
            return 0.0;
        }
        w * self.modes.iter().map(|(xi, a, c)| a * (xi.dot(p) + c).cos()).sum::<f64>()
    }
    fn support_radius(&self) -> Option<f64> {
        Some(self.window.r_out + self.window.center.norm())
    }
}

/// Isotropic Gaussian e^{−|x−c|²/(2σ²)}, treated as supported in the unit disk.
#[derive(Debug, Clone, Copy)]
pub struct Gaussian {
    pub center: Vec2,
    pub sigma: f64,
}

impl Field for Gaussian {
    fn value(&self, p: &Vec2) -> f64 {
        (-(p - self.center).norm_squared() / (2.0 * self.sigma * self.sigma)).exp()
    }
    fn support_radius(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Indicator of the centered disk of radius r.
#[derive(Debug, Clone, Copy)]
pub struct DiskIndicator {
    pub radius: f64,
}

impl Field for DiskIndicator {
    fn value(&self, p: &Vec2) -> f64 {
        if p.norm() <= self.radius {
            1.0
        } else {
            0.0
        }
    }
    fn support_radius(&self) -> Option<f64> {
        Some(self.radius)
    }
}
