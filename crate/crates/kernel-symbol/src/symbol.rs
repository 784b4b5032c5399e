//! Sampled symbols p(x, ξ) and the numerical symbol a(x, ξ) of the kernel.
//!
//! a(x, ξ) = ∫ e^{−iz·ξ} k(x, z) dz is split as
//! a = s₀·FT(χ/|·|_G) + FT(k − χk₋₁):
//! the first term is the transform of the singular part χk₋₁ = χ s₀/|z|_G and
//! is evaluated semi-analytically; the second is bounded and goes through a
//! 2D FFT on a z-grid, with the cell at z = 0 integrated in polar coordinates.

use std::collections::HashMap;
use std::f64::consts::TAU;

use gxr_geometry::quadrature::gauss_legendre_on;
use gxr_geometry::{MetricField, Vec2};
use gxr_transform::{CutoffSpec, RadialCutoff};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SymbolError};
use crate::fourier::{fft2, ft_chi_over_norm, principal_weight, wrap_index};
use crate::kernel::KernelCenter;

/// Frequency nodes on the lattice dξ·ℤ²: geometric radii × uniform directions,
/// each snapped to the nearest lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub dxi: f64,
    pub radii: Vec<f64>,
    pub n_dir: usize,
    /// Lattice coordinates of node r·n_dir + d.
    pub lattice: Vec<(i64, i64)>,
}

impl FrequencyGrid {
    /// Lattice of a periodic box of side `extent`, radii from `r_min` to `r_max`.
    pub fn log_radial(extent: f64, r_min: f64, r_max: f64, n_radii: usize, n_dir: usize) -> Self {
        let dxi = TAU / extent;
        let radii: Vec<f64> =
            (0..n_radii).map(|i| r_min * (r_max / r_min).powf(i as f64 / (n_radii - 1).max(1) as f64)).collect();
        let mut lattice = Vec::with_capacity(n_radii * n_dir);
        for r in &radii {
            for d in 0..n_dir {
                let a = TAU * d as f64 / n_dir as f64;
                lattice.push(((r * a.cos() / dxi).round() as i64, (r * a.sin() / dxi).round() as i64));
            }
        }
        Self { dxi, radii, n_dir, lattice }
    }

    /// Radii 2·10^{i/16}, i = 0..=36 (2 to ≈ 356), so that 20 and 200 are nodes; 16 directions.
    pub fn standard(extent: f64) -> Self {
        Self::log_radial(extent, 2.0, 2.0 * 10f64.powf(2.25), 37, 16)
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn xi(&self, j: usize) -> Vec2 {
        self.lattice_point(self.lattice[j])
    }

    pub fn lattice_point(&self, k: (i64, i64)) -> Vec2 {
        Vec2::new(k.0 as f64 * self.dxi, k.1 as f64 * self.dxi)
    }

    pub fn radius_index(&self, j: usize) -> usize {
        j / self.n_dir
    }
}

/// Class metadata S^m_{ρδ}(r, L).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolClass {
    pub order: f64,
    /// Hölder regularity in x; None for smooth.
    pub regularity: Option<u32>,
    /// ξ-derivative budget exercised by the checks.
    pub budget: usize,
    pub rho: f64,
    pub delta: f64,
}

impl SymbolClass {
    pub fn classical(order: f64, regularity: Option<u32>) -> Self {
        Self { order, regularity, budget: 2, rho: 1.0, delta: 0.0 }
    }
}

/// Offsets of the 3×3 lattice stencil, index 3(a+1) + (b+1) for offset (a, b).
pub const STENCIL: [(i64, i64); 9] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (1, 1)];

/// p(x_i, ξ_j) with the lattice neighbours of each ξ_j for finite differences.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    pub x_nodes: Vec<Vec2>,
    pub freq: FrequencyGrid,
    /// Index i·len(freq) + j; each entry holds the 3×3 stencil, center at 4.
    pub stencil: Vec<[Complex64; 9]>,
    pub class: SymbolClass,
    pub warnings: Vec<String>,
}

/// ξ-derivatives from the stencil: value, gradient, and (∂₁₁, ∂₂₂, ∂₁₂).
#[derive(Debug, Clone, Copy)]
pub struct Derivatives {
    pub value: Complex64,
    pub first: [Complex64; 2],
    pub second: [Complex64; 3],
}

impl SymbolGrid {
    pub fn from_fn(
        x_nodes: Vec<Vec2>,
        freq: FrequencyGrid,
        class: SymbolClass,
        p: impl Fn(&Vec2, &Vec2) -> Complex64 + Sync,
    ) -> Self {
        let stencil = x_nodes
            .iter()
            .flat_map(|x| {
                let freq = &freq;
                let p = &p;
                (0..freq.len()).map(move |j| {
                    let (k1, k2) = freq.lattice[j];
                    let mut s = [Complex64::new(0.0, 0.0); 9];
                    for (o, (a, b)) in STENCIL.iter().enumerate() {
                        s[o] = p(x, &freq.lattice_point((k1 + a, k2 + b)));
                    }
                    s
                })
            })
            .collect();
        Self { x_nodes, freq, stencil, class, warnings: Vec::new() }
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.stencil[i * self.freq.len() + j][4]
    }

    pub fn derivatives(&self, i: usize, j: usize) -> Derivatives {
        let s = &self.stencil[i * self.freq.len() + j];
        let h = self.freq.dxi;
        let at = |a: i64, b: i64| s[(3 * (a + 1) + (b + 1)) as usize];
        Derivatives {
            value: at(0, 0),
            first: [(at(1, 0) - at(-1, 0)) / (2.0 * h), (at(0, 1) - at(0, -1)) / (2.0 * h)],
            second: [
                (at(1, 0) - at(0, 0) * 2.0 + at(-1, 0)) / (h * h),
                (at(0, 1) - at(0, 0) * 2.0 + at(0, -1)) / (h * h),
                (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h),
            ],
        }
    }

    /// Pointwise difference with another grid on the same nodes.
    pub fn minus(&self, other: &SymbolGrid, class: SymbolClass) -> SymbolGrid {
        let stencil = self
            .stencil
            .iter()
            .zip(&other.stencil)
            .map(|(a, b)| {
                let mut s = *a;
                for (u, v) in s.iter_mut().zip(b) {
                    *u -= v;
                }
                s
            })
            .collect();
        SymbolGrid { x_nodes: self.x_nodes.clone(), freq: self.freq.clone(), stencil, class, warnings: Vec::new() }
    }

    /// CSV rows x1,x2,xi1,xi2,re,im.
    pub fn to_csv_rows(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.stencil.len());
        for (i, x) in self.x_nodes.iter().enumerate() {
            for j in 0..self.freq.len() {
                let xi = self.freq.xi(j);
                let v = self.value(i, j);
                out.push(format!("{},{},{},{},{},{}", x[0], x[1], xi[0], xi[1], v.re, v.im));
            }
        }
        out
    }
}

/// z-grid of the FFT path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FftSettings {
    /// Samples per axis.
    pub n: usize,
    /// Side of the z-box [−extent/2, extent/2)².
    pub extent: f64,
    /// Polar nodes of the z = 0 cell.
    pub cell_rho: usize,
    pub cell_omega: usize,
    /// Warn when the outermost frequency shell carries more than this energy fraction.
    pub alias_threshold: f64,
}

impl Default for FftSettings {
    fn default() -> Self {
        Self { n: 1024, extent: 4.0, cell_rho: 8, cell_omega: 64, alias_threshold: 0.01 }
    }
}

impl FftSettings {
    pub fn dz(&self) -> f64 {
        self.extent / self.n as f64
    }
    pub fn dxi(&self) -> f64 {
        TAU / self.extent
    }
}

/// The full symbol a, its singular part a₋₁ = FT(χk₋₁), and c = a − a₋₁.
#[derive(Debug, Clone)]
pub struct SymbolDecomposition {
    pub full: SymbolGrid,
    pub principal: SymbolGrid,
    pub lower: SymbolGrid,
    /// Fraction of FFT energy in the outermost shell, per x node.
    pub alias_fraction: Vec<f64>,
}

struct RowOutput {
    full: Vec<[Complex64; 9]>,
    principal: Vec<[Complex64; 9]>,
    alias: f64,
}

fn symbol_row(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    chi: &RadialCutoff,
    x: &Vec2,
    freq: &FrequencyGrid,
    st: &FftSettings,
) -> Result<RowOutput> {
    let n = st.n;
    let dz = st.dz();
    let center = KernelCenter::new(m, cut, *x)?;
    let s0 = principal_weight(m, cut, x);
    let g = m.eval(x);
    let half = (n / 2) as f64;
    // bounded part R = k − χ k₋₁ on the z-grid, zero at z = 0
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let z1 = (i as f64 - half) * dz;
            (0..n)
                .map(|j| {
                    let z = Vec2::new(z1, (j as f64 - half) * dz);
                    let r = z.norm();
                    if r == 0.0 {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    let k = center.k(&z)?;
                    let c = chi.radial(r);
                    let v = if c > 0.0 { k - c * center.k_principal(&z) } else { k };
                    Ok(Complex64::new(v, 0.0))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut data = rows.concat();
    fft2(&mut data, n, false);
    let shell = 0.9 * half;
    let (mut total, mut outer) = (0.0, 0.0);
    for (idx, v) in data.iter().enumerate() {
        let (a, b) = (crate::fourier::signed_index(idx / n, n), crate::fourier::signed_index(idx % n, n));
        let e = v.norm_sqr();
        total += e;
        if ((a * a + b * b) as f64).sqrt() > shell {
            outer += e;
        }
    }
    let alias = if total > 0.0 { outer / total } else { 0.0 };
    // polar nodes of the cell [−dz/2, dz/2]², carrying ρ·R = h(ρ, ω) − χ(ρ) h(0, ω)
    let mut cell = Vec::with_capacity(st.cell_rho * st.cell_omega);
    let dw = TAU / st.cell_omega as f64;
    for q in 0..st.cell_omega {
        let a = dw * (q as f64 + 0.5);
        let w = Vec2::new(a.cos(), a.sin());
        let rmax = 0.5 * dz / a.cos().abs().max(a.sin().abs());
        let (rs, ws) = gauss_legendre_on(st.cell_rho, 0.0, rmax);
        let h0 = center.h(0.0, &w)?;
        for (r, wr) in rs.iter().zip(&ws) {
            let v = center.h(*r, &w)? - chi.radial(*r) * h0;
            cell.push((w * *r, v * wr * dw));
        }
    }
    let mut cache: HashMap<(i64, i64), Complex64> = HashMap::new();
    let isotropic = g[(0, 1)] == 0.0 && g[(0, 0)] == g[(1, 1)];
    let mut singular = |k: (i64, i64)| -> Complex64 {
        let key = if isotropic { (k.0 * k.0 + k.1 * k.1, 0) } else { k };
        *cache.entry(key).or_insert_with(|| {
            Complex64::new(s0 * ft_chi_over_norm(&g, chi, &freq.lattice_point(k)), 0.0)
        })
    };
    let mut full = Vec::with_capacity(freq.len());
    let mut principal = Vec::with_capacity(freq.len());
    for &(k1, k2) in &freq.lattice {
        let mut sf = [Complex64::new(0.0, 0.0); 9];
        let mut sp = [Complex64::new(0.0, 0.0); 9];
        for (o, (a, b)) in STENCIL.iter().enumerate() {
            let k = (k1 + a, k2 + b);
            if k.0.abs() >= n as i64 / 2 || k.1.abs() >= n as i64 / 2 {
                return Err(SymbolError::Settings(format!("frequency {k:?} beyond the FFT lattice")));
            }
            let xi = freq.lattice_point(k);
            let sign = if (k.0 + k.1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let fft = data[wrap_index(k.0, n) * n + wrap_index(k.1, n)] * (sign * dz * dz);
            let corr: Complex64 = cell.iter().map(|(z, v)| Complex64::from_polar(*v, -z.dot(&xi))).sum();
            let p = if s0 == 0.0 { Complex64::new(0.0, 0.0) } else { singular(k) };
            sp[o] = p;
            sf[o] = p + fft + corr;
        }
        full.push(sf);
        principal.push(sp);
    }
    Ok(RowOutput { full, principal, alias })
}

/// a(x_i, ξ_j) by the split singular/FFT construction at each x node.
pub fn symbol_fft(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    chi: &RadialCutoff,
    x_nodes: &[Vec2],
    freq: &FrequencyGrid,
    st: &FftSettings,
) -> Result<SymbolDecomposition> {
    if (freq.dxi - st.dxi()).abs() > 1e-12 * st.dxi() {
        return Err(SymbolError::Settings(format!(
            "frequency lattice spacing {} does not match the FFT box ({})",
            freq.dxi,
            st.dxi()
        )));
    }
    let reach = x_nodes.iter().map(|x| x.norm()).fold(0.0, f64::max) + cut.phi_support();
    if reach > 0.5 * st.extent || chi.r_out > 0.5 * st.extent {
        return Err(SymbolError::Settings("kernel support exceeds the FFT box".into()));
    }
    let reg = m.regularity().map(|k| k.saturating_sub(2));
    let mut full = Vec::new();
    let mut principal = Vec::new();
    let mut alias = Vec::new();
    let mut warnings = Vec::new();
    for x in x_nodes {
        let row = symbol_row(m, cut, chi, x, freq, st)?;
        if row.alias > st.alias_threshold {
            warnings.push(format!(
                "aliasing: {:.2}% of FFT energy in the outermost shell at x = ({}, {})",
                100.0 * row.alias,
                x[0],
                x[1]
            ));
        }
        alias.push(row.alias);
        full.extend(row.full);
        principal.extend(row.principal);
    }
    let make = |stencil, order| SymbolGrid {
        x_nodes: x_nodes.to_vec(),
        freq: freq.clone(),
        stencil,
        class: SymbolClass::classical(order, reg),
        warnings: warnings.clone(),
    };
    let full = make(full, -1.0);
    let principal = make(principal, -1.0);
    let lower = full.minus(&principal, SymbolClass::classical(-2.0, reg));
    Ok(SymbolDecomposition { full, principal, lower, alias_fraction: alias })
}
