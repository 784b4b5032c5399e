//! Empirical symbol-class estimates: growth exponents of |∂_ξ^α p| and of
//! x-difference quotients over a frequency band.

use crate::error::{Result, SymbolError};
use crate::fit::{power_fit, PowerFit};
use crate::symbol::SymbolGrid;

/// Slack allowed above the claimed exponent m − |α|.
pub const EXPONENT_SLACK: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeminormRow {
    pub alpha: usize,
    pub exponent: f64,
    pub constant: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormReport {
    pub claimed_order: f64,
    pub band: (f64, f64),
    pub rows: Vec<SeminormRow>,
    /// Exponent of sup_x |p(x, ξ) − p(x', ξ)| / |x − x'|; None when p does not vary in x.
    pub x_row: Option<SeminormRow>,
}

impl SeminormReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.x_row.is_none_or(|r| r.pass)
    }

    /// CSV rows alpha,exponent,constant,bound,pass (x-seminorm as alpha = "x").
    pub fn to_csv_rows(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("{},{},{},{},{}", r.alpha, r.exponent, r.constant, r.bound, r.pass))
            .collect();
        if let Some(r) = self.x_row {
            out.push(format!("x,{},{},{},{}", r.exponent, r.constant, r.bound, r.pass));
        }
        out
    }
}

/// Default fit band, a decade well inside the lattice.
pub const DEFAULT_BAND: (f64, f64) = (20.0, 200.0);

fn band_radii(sym: &SymbolGrid, band: (f64, f64)) -> Result<Vec<usize>> {
    let idx: Vec<usize> = (0..sym.freq.radii.len())
        .filter(|&r| sym.freq.radii[r] >= band.0 * (1.0 - 1e-9) && sym.freq.radii[r] <= band.1 * (1.0 + 1e-9))
        .collect();
    if idx.len() < 3 {
        return Err(SymbolError::FitRange(format!("{} radii in [{}, {}]", idx.len(), band.0, band.1)));
    }
    let lo = sym.freq.radii[idx[0]];
    let hi = sym.freq.radii[*idx.last().unwrap()];
    if hi / lo < 9.99 {
        return Err(SymbolError::FitRange(format!("band [{lo}, {hi}] spans less than a decade")));
    }
    Ok(idx)
}

/// Sup over x nodes and directions of `f(i, j)` at each radius in the band, fitted against |ξ|.
fn fit_sup(sym: &SymbolGrid, radii: &[usize], f: impl Fn(usize, usize) -> f64) -> Result<Option<PowerFit>> {
    let nd = sym.freq.n_dir;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let mut sup: f64 = 0.0;
        let mut mean_r = 0.0;
        for d in 0..nd {
            let j = r * nd + d;
            mean_r += sym.freq.xi(j).norm() / nd as f64;
            for i in 0..sym.x_nodes.len() {
                sup = sup.max(f(i, j));
            }
        }
        xs.push(mean_r);
        ys.push(sup);
    }
    if ys.iter().all(|y| *y == 0.0) {
        return Ok(None);
    }
    power_fit(&xs, &ys).map(Some)
}

/// Check |∂_ξ^α p| ≲ (1 + |ξ|)^{m − |α|} for |α| ≤ `alpha_max` over `band`.
pub fn seminorm_check_band(
    sym: &SymbolGrid,
    m_claimed: f64,
    alpha_max: usize,
    band: (f64, f64),
) -> Result<SeminormReport> {
    if alpha_max > 2 {
        return Err(SymbolError::Settings("the 3×3 stencil supports |α| ≤ 2".into()));
    }
    let radii = band_radii(sym, band)?;
    let mut rows = Vec::new();
    for alpha in 0..=alpha_max {
        let fit = fit_sup(sym, &radii, |i, j| {
            let d = sym.derivatives(i, j);
            match alpha {
                0 => d.value.norm(),
                1 => d.first.iter().map(|c| c.norm()).fold(0.0, f64::max),
                _ => d.second.iter().map(|c| c.norm()).fold(0.0, f64::max),
            }
        })?;
        let bound = m_claimed - alpha as f64 + EXPONENT_SLACK;
        rows.push(match fit {
            Some(f) => SeminormRow { alpha, exponent: f.slope, constant: f.constant(), bound, pass: f.slope <= bound },
            None => SeminormRow { alpha, exponent: f64::NEG_INFINITY, constant: 0.0, bound, pass: true },
        });
    }
    let x_row = if sym.x_nodes.len() >= 2 {
        let n = sym.x_nodes.len();
        let fit = fit_sup(sym, &radii, |_, j| {
            let mut q: f64 = 0.0;
            for a in 0..n {
                for b in a + 1..n {
                    let dx = (sym.x_nodes[a] - sym.x_nodes[b]).norm();
                    q = q.max((sym.value(a, j) - sym.value(b, j)).norm() / dx);
                }
            }
            q
        })?;
        let bound = m_claimed + EXPONENT_SLACK;
        fit.map(|f| SeminormRow { alpha: 0, exponent: f.slope, constant: f.constant(), bound, pass: f.slope <= bound })
    } else {
        None
    };
    Ok(SeminormReport { claimed_order: m_claimed, band, rows, x_row })
}

pub fn seminorm_check(sym: &SymbolGrid, m_claimed: f64, alpha_max: usize) -> Result<SeminormReport> {
    seminorm_check_band(sym, m_claimed, alpha_max, DEFAULT_BAND)
}
