//! Op(p)f(x) = (2π)^{-2} Σ_ξ e^{i(x−o)·ξ} p(x, ξ) f̂(ξ) Δξ on a grid.

use std::f64::consts::TAU;

use gxr_geometry::MetricField;
use gxr_transform::{GridSpec, ScalarGrid};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ParametrixError, Result};
use crate::fourier::FourierGrid;
use crate::symbol::{ParametrixSymbol, Symbol, ZetaShells};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    /// Multiplier for x-independent symbols, factored for separable ones,
    /// exact otherwise.
    Auto,
    /// One inverse FFT; the symbol must not depend on x.
    Multiplier,
    /// Σ_l w_l(x) Op(q_l)f over the terms of a separable symbol.
    Factored,
    /// Direct summation over the lattice at every output node.
    Exact,
}

/// Op(p) on the nodes of a grid.
pub struct PseudoOp<'a> {
    pub symbol: Box<dyn Symbol + 'a>,
    pub grid: FourierGrid,
    pub mode: ApplyMode,
}

impl<'a> PseudoOp<'a> {
    pub fn new(symbol: impl Symbol + 'a, grid: FourierGrid) -> Self {
        Self { symbol: Box::new(symbol), grid, mode: ApplyMode::Auto }
    }

    pub fn with_mode(mut self, mode: ApplyMode) -> Self {
        self.mode = mode;
        self
    }

    /// The mode `apply_op` will use.
    pub fn resolved_mode(&self) -> ApplyMode {
        match self.mode {
            ApplyMode::Auto => match self.symbol.separable() {
                Some(t) if t.len() == 1 && t[0].weight.is_none() => ApplyMode::Multiplier,
                Some(_) => ApplyMode::Factored,
                None => ApplyMode::Exact,
            },
            m => m,
        }
    }

    pub fn apply(&self, f: &ScalarGrid) -> Result<ScalarGrid> {
        apply_op(self, f)
    }
}

/// The parametrix P = Op(ζ|ξ|_g / C) on `spec`, with ζ ramping over the
/// padded box's lowest lattice shells.
pub fn parametrix_op<'a>(m: &'a dyn MetricField, constant: f64, spec: GridSpec, pad: usize) -> Result<PseudoOp<'a>> {
    parametrix_op_with(m, constant, spec, pad, ZetaShells::default())
}

/// `parametrix_op` with a chosen ζ ramp.
pub fn parametrix_op_with<'a>(
    m: &'a dyn MetricField,
    constant: f64,
    spec: GridSpec,
    pad: usize,
    shells: ZetaShells,
) -> Result<PseudoOp<'a>> {
    let grid = FourierGrid::new(spec, pad)?;
    let zeta = shells.cutoff(grid.box_size().0);
    Ok(PseudoOp::new(ParametrixSymbol::new(m, constant, zeta)?, grid))
}

pub fn apply_op(op: &PseudoOp<'_>, f: &ScalarGrid) -> Result<ScalarGrid> {
    let grid = &op.grid;
    grid.check(f)?;
    match op.resolved_mode() {
        ApplyMode::Multiplier | ApplyMode::Factored => {
            let terms = op.symbol.separable().ok_or(ParametrixError::NotSeparable)?;
            if op.resolved_mode() == ApplyMode::Multiplier && terms.iter().any(|t| t.weight.is_some()) {
                return Err(ParametrixError::NotSeparable);
            }
            let fhat = grid.forward(f)?;
            let mut out = ScalarGrid::zeros(f.spec);
            for t in terms {
                let s: Vec<Complex64> =
                    fhat.par_iter().enumerate().map(|(k, v)| v * (t.multiplier)(&grid.xi(k))).collect();
                let g = grid.inverse(s);
                for (idx, (o, v)) in out.values.iter_mut().zip(&g.values).enumerate() {
                    let w = t.weight.as_ref().map_or(1.0, |w| w(&f.spec.node(idx)));
                    *o += w * v;
                }
            }
            Ok(out)
        }
        ApplyMode::Exact | ApplyMode::Auto => Ok(exact(op, f)),
    }
}

fn roots(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect()
}

fn exact(op: &PseudoOp<'_>, f: &ScalarGrid) -> ScalarGrid {
    let grid = &op.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    let fhat = grid.forward_values(&f.values);
    let xis: Vec<_> = (0..grid.len()).map(|k| grid.xi(k)).collect();
    let (ex, ey) = (roots(nx), roots(ny));
    let scale = 1.0 / (grid.len() as f64 * f.spec.cell_area());
    let values = (0..f.spec.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = f.spec.coords(idx);
            let p = op.symbol.at(&f.spec.node(idx));
            let mut acc = Complex64::new(0.0, 0.0);
            for ky in 0..ny {
                let row = ey[(j * ky) % ny];
                let mut racc = Complex64::new(0.0, 0.0);
                for kx in 0..nx {
                    let k = ky * nx + kx;
                    let v = fhat[k];
                    if v.re == 0.0 && v.im == 0.0 {
                        continue;
                    }
                    let s = p(&xis[k]);
                    if s != 0.0 {
                        racc += ex[(i * kx) % nx] * v * s;
                    }
                }
                acc += row * racc;
            }
            acc.re * scale
        })
        .collect();
    ScalarGrid { spec: f.spec, values, mask: None }
}
