//! Periodic-FFT surrogates of H^t norms and dyadic band energies.

use gxr_transform::ScalarGrid;
use num_complex::Complex64;

use crate::error::Result;
use crate::fourier::{FourierGrid, DEFAULT_PAD};

/// ‖f‖_{H^t} = ((2π)^{-2} Σ (1 + |ξ|²)^t |f̂(ξ)|² Δξ)^{1/2} on the padded lattice.
pub fn sobolev_norm(f: &ScalarGrid, t: f64) -> Result<f64> {
    sobolev_norm_on(&FourierGrid::new(f.spec, DEFAULT_PAD)?, f, t)
}

pub fn sobolev_norm_on(grid: &FourierGrid, f: &ScalarGrid, t: f64) -> Result<f64> {
    Ok(sobolev_from_spectrum(grid, &grid.forward(f)?, t))
}

pub fn sobolev_from_spectrum(grid: &FourierGrid, fhat: &[Complex64], t: f64) -> f64 {
    let w = grid.cell() / (std::f64::consts::TAU * std::f64::consts::TAU);
    let s: f64 = fhat
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let e = v.norm_sqr();
            if e == 0.0 {
                0.0
            } else {
                (1.0 + grid.xi(k).norm_squared()).powf(t) * e
            }
        })
        .sum();
    (s * w).sqrt()
}

/// Dyadic bands in lattice units centered on the powers of two:
/// [0, √2), [2^{b−1/2}, 2^{b+1/2}) for b ≥ 1, the last one unbounded.
pub fn dyadic_bands(grid: &FourierGrid) -> Vec<(f64, f64)> {
    let rmax = (0..grid.len()).map(|k| grid.lattice_radius(k)).fold(0.0, f64::max);
    let mut bands = vec![(0.0, std::f64::consts::SQRT_2)];
    let mut b = 1;
    while bands.last().map_or(0.0, |x| x.1) <= rmax {
        let lo = 2f64.powf(b as f64 - 0.5);
        bands.push((lo, 2.0 * lo));
        b += 1;
    }
    if let Some(last) = bands.last_mut() {
        last.1 = f64::INFINITY;
    }
    bands
}

/// Band index of lattice radius r.
pub fn band_of(bands: &[(f64, f64)], r: f64) -> usize {
    bands.iter().position(|(lo, hi)| r >= *lo && r < *hi).unwrap_or(bands.len() - 1)
}

/// (2π)^{-2} Σ_{ξ in band} |f̂|² Δξ per band; the sum over bands is ‖f‖²_{L²}.
pub fn band_energies(grid: &FourierGrid, fhat: &[Complex64], bands: &[(f64, f64)]) -> Vec<f64> {
    let w = grid.cell() / (std::f64::consts::TAU * std::f64::consts::TAU);
    let mut out = vec![0.0; bands.len()];
    for (k, v) in fhat.iter().enumerate() {
        out[band_of(bands, grid.lattice_radius(k))] += v.norm_sqr() * w;
    }
    out
}
