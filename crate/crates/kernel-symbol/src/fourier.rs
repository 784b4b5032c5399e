//! Closed-form and semi-analytic Fourier transforms, convention
//! â(ξ) = ∫ e^{−iz·ξ} a(z) dz, and the principal symbol
//! a₋₁(x, ξ) = C ψ(x)φ(x) / |ξ|_{g(x)} − b(x, ξ).

use std::f64::consts::{PI, TAU};

use gxr_geometry::quadrature::{bessel_j0, composite_gauss_legendre};
use gxr_geometry::{conorm_g, norm_g, Mat2, MetricField, Vec2};
use gxr_transform::{CutoffSpec, RadialCutoff};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SymbolError};

const GL_ORDER: usize = 16;

/// Panels of at most half an oscillation period 2π/s on [a, b].
fn panels(a: f64, b: f64, s: f64) -> usize {
    (((b - a) * s / PI).ceil() as usize).max(2)
}

/// ∫₀^{r_out} χ(ρ) f(ρ) dρ, split at r_in where χ changes form.
fn integrate_cutoff(chi: &RadialCutoff, s: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for (a, b) in [(0.0, chi.r_in), (chi.r_in, chi.r_out)] {
        let (x, w) = composite_gauss_legendre(GL_ORDER, panels(a, b, s), a, b);
        acc += x.iter().zip(&w).map(|(r, w)| w * chi.radial(*r) * f(*r)).sum::<f64>();
    }
    acc
}

/// I(s) = ∫₀^∞ χ(ρ) J₀(ρ s) dρ, so that FT(χ(|z|)/|z|)(ξ) = 2π I(|ξ|).
pub fn hankel_chi(chi: &RadialCutoff, s: f64) -> f64 {
    integrate_cutoff(chi, s, |r| bessel_j0(r * s))
}

/// FT(1/|z|_G)(ξ) = 2π / (√det G · |ξ|_{G⁻¹}).
pub fn ft_inverse_norm(g: &Mat2, xi: &Vec2) -> f64 {
    TAU / (g.determinant().sqrt() * conorm_g(g, xi))
}

fn isotropic(g: &Mat2) -> Option<f64> {
    let scale = g[(0, 0)].abs().max(g[(1, 1)].abs());
    if g[(0, 1)].abs() <= 1e-14 * scale && (g[(0, 0)] - g[(1, 1)]).abs() <= 1e-14 * scale {
        Some(g[(0, 0)])
    } else {
        None
    }
}

/// FT(χ(|z|)/|z|_G)(ξ). Isotropic G = cI reduces to a Hankel integral; other
/// G use polar quadrature ∫ |ω|_G⁻¹ ∫ χ(ρ) cos(ρ ω·ξ) dρ dω.
pub fn ft_chi_over_norm(g: &Mat2, chi: &RadialCutoff, xi: &Vec2) -> f64 {
    let s = xi.norm();
    if let Some(c) = isotropic(g) {
        return TAU * hankel_chi(chi, s) / c.sqrt();
    }
    let n = 2 * (chi.r_out * s).ceil() as usize + 64;
    let dw = TAU / n as f64;
    (0..n)
        .map(|q| {
            let a = dw * q as f64;
            let w = Vec2::new(a.cos(), a.sin());
            let kappa = w.dot(xi);
            integrate_cutoff(chi, kappa.abs(), |r| (r * kappa).cos()) / norm_g(g, &w)
        })
        .sum::<f64>()
        * dw
}

/// 1/s − I(s): the transform of (1 − χ(|z|))/|z| divided by 2π.
fn tail_hankel(chi: &RadialCutoff, s: f64) -> f64 {
    1.0 / s - hankel_chi(chi, s)
}

/// s₀ = 2ψ(x)φ(x)√det g(x), so that k₋₁(x, z) = s₀ / |z|_{g(x)}.
pub fn principal_weight(m: &dyn MetricField, cut: &CutoffSpec, x: &Vec2) -> f64 {
    2.0 * cut.psi.eval(x) * cut.phi.eval(x) * m.eval(x).determinant().sqrt()
}

/// b(x, ξ) = FT((1 − χ) k₋₁)(x, ξ).
pub fn b_symbol(m: &dyn MetricField, cut: &CutoffSpec, chi: &RadialCutoff, x: &Vec2, xi: &Vec2) -> Result<f64> {
    if xi.norm() == 0.0 {
        return Err(SymbolError::ZeroFrequency);
    }
    let s0 = principal_weight(m, cut, x);
    if s0 == 0.0 {
        return Ok(0.0);
    }
    let g = m.eval(x);
    if let Some(c) = isotropic(&g) {
        return Ok(s0 * TAU * tail_hankel(chi, xi.norm()) / c.sqrt());
    }
    Ok(s0 * (ft_inverse_norm(&g, xi) - ft_chi_over_norm(&g, chi, xi)))
}

/// a₋₁(x, ξ) = C ψ(x)φ(x) / |ξ|_{g(x)} − b(x, ξ) with |ξ|_g the cotangent norm.
pub fn principal_symbol(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    chi: &RadialCutoff,
    x: &Vec2,
    xi: &Vec2,
    constant: f64,
) -> Result<f64> {
    if xi.norm() == 0.0 {
        return Err(SymbolError::ZeroFrequency);
    }
    let g = m.eval(x);
    let lead = constant * cut.psi.eval(x) * cut.phi.eval(x) / conorm_g(&g, xi);
    Ok(lead - b_symbol(m, cut, chi, x, xi)?)
}

/// The dimensional constant C in FT(2χ/|z|)(ξ) ≈ C/|ξ|, from the Euclidean
/// radial integral over a high frequency band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub constant: f64,
    /// (max − min)/mean of s·FT(2χ/|z|)(s) over the band.
    pub spread: f64,
    pub band: (f64, f64),
}

/// Plateau of s·FT(2χ(|z|)/|z|)(s) = 4π s I(s) over `band`, sampled geometrically.
pub fn calibrate_constant(chi: &RadialCutoff, band: (f64, f64), samples: usize) -> Calibration {
    let vals: Vec<f64> = (0..samples)
        .map(|i| {
            let s = band.0 * (band.1 / band.0).powf(i as f64 / (samples - 1).max(1) as f64);
            2.0 * TAU * s * hankel_chi(chi, s)
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Calibration { constant: mean, spread: (hi - lo) / mean, band }
}

pub const CALIBRATION_BAND: (f64, f64) = (512.0, 1024.0);

/// Default calibration with the default χ.
pub fn default_calibration() -> Calibration {
    calibrate_constant(&crate::kernel::default_chi(), CALIBRATION_BAND, 17)
}

/// In-place unnormalized 2D forward FFT of a row-major n×n array.
pub fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

/// Signed lattice index in [−n/2, n/2) of array position i.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Array position of a signed lattice index.
pub fn wrap_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::default_chi;

    #[test]
    fn hankel_of_indicator_like_profile() {
        // χ ≡ 1 on [0, 0.25] then smooth: at s → 0, I → ∫χ
        let chi = default_chi();
        let (x, w) = composite_gauss_legendre(16, 8, 0.0, 0.5);
        let area: f64 = x.iter().zip(&w).map(|(r, w)| w * chi.radial(*r)).sum();
        assert!((hankel_chi(&chi, 1e-8) - area).abs() < 1e-12);
        assert!((area - 0.375).abs() < 1e-12);
    }

    #[test]
    fn calibration_is_four_pi() {
        let c = default_calibration();
        assert!((c.constant - 4.0 * PI).abs() < 1e-8, "{}", c.constant);
        assert!(c.spread < 1e-8);
    }

    #[test]
    fn polar_path_matches_hankel_path() {
        let chi = default_chi();
        let g = Mat2::identity() * 1.3;
        for xi in [Vec2::new(3.0, 1.0), Vec2::new(-20.0, 7.0)] {
            let s = xi.norm();
            let n = 2 * (chi.r_out * s).ceil() as usize + 64;
            let dw = TAU / n as f64;
            let polar: f64 = (0..n)
                .map(|q| {
                    let a = dw * q as f64;
                    let w = Vec2::new(a.cos(), a.sin());
                    let k = w.dot(&xi);
                    integrate_cutoff(&chi, k.abs(), |r| (r * k).cos()) / norm_g(&g, &w)
                })
                .sum::<f64>()
                * dw;
            let fast = ft_chi_over_norm(&g, &chi, &xi);
            assert!((polar - fast).abs() < 1e-12 * fast.abs(), "{polar} {fast}");
        }
    }

    #[test]
    fn fft2_round_trip() {
        let n = 8;
        let mut d: Vec<Complex64> = (0..n * n).map(|k| Complex64::new(k as f64, (k * k % 7) as f64)).collect();
        let orig = d.clone();
        fft2(&mut d, n, false);
        fft2(&mut d, n, true);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-12);
        }
    }
}
