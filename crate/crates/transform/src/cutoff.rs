//! Radial cutoff functions built from a polynomial smoothstep.

use gxr_geometry::Vec2;

/// Default smoothness of the cutoff profile: C^7.
pub const DEFAULT_ORDER: u32 = 7;

fn binom(n: u32, k: u32) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Polynomial smoothstep of degree 2q+1: S(0) = 0, S(1) = 1, and its first q
/// derivatives vanish at both ends, so the clamped profile is C^q.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothstep {
    pub order: u32,
    coeffs: Vec<f64>,
}

impl Smoothstep {
    pub fn new(order: u32) -> Self {
        let q = order;
        let coeffs = (0..=q)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * binom(q + k, k) * binom(2 * q + 1, q - k)
            })
            .collect();
        Self { order, coeffs }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let mut p = 0.0;
        for c in self.coeffs.iter().rev() {
            p = p * t + c;
        }
        p * t.powi(self.order as i32 + 1)
    }
}

impl Default for Smoothstep {
    fn default() -> Self {
        Self::new(DEFAULT_ORDER)
    }
}

/// Radial cutoff equal to 1 for |x − c| ≤ r_in and 0 for |x − c| ≥ r_out.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCutoff {
    pub center: Vec2,
    pub r_in: f64,
    pub r_out: f64,
    pub profile: Smoothstep,
}

impl RadialCutoff {
    pub fn new(r_in: f64, r_out: f64) -> Self {
        assert!(r_in < r_out, "cutoff radii must satisfy r_in < r_out");
        Self { center: Vec2::zeros(), r_in, r_out, profile: Smoothstep::default() }
    }

    pub fn radial(&self, r: f64) -> f64 {
        1.0 - self.profile.eval((r - self.r_in) / (self.r_out - self.r_in))
    }

    pub fn eval(&self, x: &Vec2) -> f64 {
        self.radial((x - self.center).norm())
    }
}

/// ψ (output side) and φ (input side) cutoffs of the localized normal operator ψNφ.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSpec {
    pub psi: RadialCutoff,
    pub phi: RadialCutoff,
}

impl CutoffSpec {
    pub fn new(psi: RadialCutoff, phi: RadialCutoff) -> Self {
        Self { psi, phi }
    }

    /// Radius of the centered disk Ω on which ψ = φ = 1.
    pub fn identity_radius(&self) -> f64 {
        let a = self.psi.r_in - self.psi.center.norm();
        let b = self.phi.r_in - self.phi.center.norm();
        a.min(b)
    }

    pub fn in_identity_region(&self, x: &Vec2) -> bool {
        x.norm() <= self.identity_radius()
    }

    /// ψ = φ = 1 on the whole extended disk, so ψNφ = N there.
    pub fn none() -> Self {
        Self { psi: RadialCutoff::new(2.0, 3.0), phi: RadialCutoff::new(2.0, 3.0) }
    }

    /// Radius beyond which φ vanishes.
    pub fn phi_support(&self) -> f64 {
        self.phi.r_out + self.phi.center.norm()
    }

    pub fn psi_support(&self) -> f64 {
        self.psi.r_out + self.psi.center.norm()
    }
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { psi: RadialCutoff::new(0.55, 0.85), phi: RadialCutoff::new(0.55, 0.85) }
    }
}
