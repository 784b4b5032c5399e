//! Zero-padded FFT lattice of a grid.
//!
//! f̂(ξ) = h² Σ f(x) e^{−i(x−o)·ξ} with o the grid origin, on the lattice
//! ξ = 2πk/(N h) of the padded N-point box; the inverse carries (2π)^{-2}Δξ.

use std::f64::consts::TAU;
use std::sync::Arc;

use gxr_geometry::Vec2;
use gxr_transform::{GridSpec, ScalarGrid};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{ParametrixError, Result};

pub const DEFAULT_PAD: usize = 2;

struct Plans {
    fx: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

/// The padded frequency lattice of `spec`.
#[derive(Clone)]
pub struct FourierGrid {
    pub spec: GridSpec,
    pub pad: usize,
    /// Padded sizes.
    pub nx: usize,
    pub ny: usize,
    plans: Arc<Plans>,
}

impl std::fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierGrid").field("spec", &self.spec).field("pad", &self.pad).finish()
    }
}

/// Signed frequency index of array position i in an n-point transform.
pub fn signed(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn fft_rows(data: &mut [Complex64], width: usize, plan: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(width).for_each(|row| plan.process(row));
}

fn transpose(data: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for j in 0..ny {
        for i in 0..nx {
            out[i * ny + j] = data[j * nx + i];
        }
    }
    out
}

impl FourierGrid {
    pub fn new(spec: GridSpec, pad: usize) -> Result<Self> {
        if pad == 0 || spec.is_empty() {
            return Err(ParametrixError::Settings(format!("pad {pad} on a {}x{} grid", spec.nx, spec.ny)));
        }
        let (nx, ny) = (spec.nx * pad, spec.ny * pad);
        let mut planner = FftPlanner::new();
        let plans = Plans {
            fx: planner.plan_fft_forward(nx),
            fy: planner.plan_fft_forward(ny),
            ix: planner.plan_fft_inverse(nx),
            iy: planner.plan_fft_inverse(ny),
        };
        Ok(Self { spec, pad, nx, ny, plans: Arc::new(plans) })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Side lengths of the padded box.
    pub fn box_size(&self) -> (f64, f64) {
        (self.nx as f64 * self.spec.h, self.ny as f64 * self.spec.h)
    }

    pub fn dxi(&self) -> (f64, f64) {
        let (lx, ly) = self.box_size();
        (TAU / lx, TAU / ly)
    }

    /// Area Δξ of a lattice cell.
    pub fn cell(&self) -> f64 {
        let (a, b) = self.dxi();
        a * b
    }

    /// Signed lattice coordinates of array position idx = ky·nx + kx.
    pub fn lattice(&self, idx: usize) -> (i64, i64) {
        (signed(idx % self.nx, self.nx), signed(idx / self.nx, self.ny))
    }

    pub fn xi(&self, idx: usize) -> Vec2 {
        let (a, b) = self.lattice(idx);
        let (dx, dy) = self.dxi();
        Vec2::new(a as f64 * dx, b as f64 * dy)
    }

    /// |ξ| in units of the x-lattice spacing.
    pub fn lattice_radius(&self, idx: usize) -> f64 {
        self.xi(idx).norm() / self.dxi().0
    }

    pub fn check(&self, f: &ScalarGrid) -> Result<()> {
        if !f.spec.same_layout(&self.spec) {
            return Err(ParametrixError::GridMismatch(format!(
                "{}x{} input on a {}x{} operator grid",
                f.spec.nx, f.spec.ny, self.spec.nx, self.spec.ny
            )));
        }
        Ok(())
    }

    fn transform(&self, data: &mut Vec<Complex64>, inverse: bool) {
        let (px, py) = if inverse { (&self.plans.ix, &self.plans.iy) } else { (&self.plans.fx, &self.plans.fy) };
        fft_rows(data, self.nx, px);
        let mut t = transpose(data, self.nx, self.ny);
        fft_rows(&mut t, self.ny, py);
        *data = transpose(&t, self.ny, self.nx);
    }

    /// f̂ on the padded lattice from node values on `spec`.
    pub fn forward_values(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data = vec![Complex64::new(0.0, 0.0); self.len()];
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                data[j * self.nx + i] = Complex64::new(values[self.spec.index(i, j)], 0.0);
            }
        }
        self.transform(&mut data, false);
        let h2 = self.spec.cell_area();
        data.iter_mut().for_each(|v| *v *= h2);
        data
    }

    pub fn forward(&self, f: &ScalarGrid) -> Result<Vec<Complex64>> {
        self.check(f)?;
        Ok(self.forward_values(&f.values))
    }

    /// (2π)^{-2} Σ e^{i(x−o)·ξ} F(ξ) Δξ on the whole padded box, complex.
    pub fn inverse_full(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut spectrum, true);
        let s = 1.0 / (self.len() as f64 * self.spec.cell_area());
        spectrum.iter_mut().for_each(|v| *v *= s);
        spectrum
    }

    /// Real part of the inverse transform at the nodes of `spec`.
    pub fn inverse(&self, spectrum: Vec<Complex64>) -> ScalarGrid {
        let full = self.inverse_full(spectrum);
        let values = (0..self.spec.len())
            .map(|k| {
                let (i, j) = self.spec.coords(k);
                full[j * self.nx + i].re
            })
            .collect();
        ScalarGrid { spec: self.spec, values, mask: None }
    }

    /// Fourier multiplier q(ξ) applied to f.
    pub fn multiply(&self, f: &ScalarGrid, q: impl Fn(&Vec2) -> f64 + Sync) -> Result<ScalarGrid> {
        let mut s = self.forward(f)?;
        s.par_iter_mut().enumerate().for_each(|(k, v)| *v *= q(&self.xi(k)));
        Ok(self.inverse(s))
    }
}
