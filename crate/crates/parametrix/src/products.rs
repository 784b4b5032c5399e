//! Op(pa), Op(pa₋₁) and Op(pc) = Op(pa) − Op(pa₋₁) for conformal metrics.
//!
//! With p = w(x)q(ξ), w = (C√c)⁻¹ and q = ζ|ξ|, right composition with a
//! Fourier multiplier is exact: Op(pa)f = w · Op(a)(Qf) = w · ψNφ(Qf).
//! Qf is refined spectrally before ψNφ sees it, so the ray quadrature
//! resolves it.

use gxr_geometry::{MetricField, Vec2};
use gxr_transform::{normal_many, CutoffSpec, GridSpec, NormalRoute, NormalSettings, RadialCutoff, ScalarGrid};
use num_complex::Complex64;

use crate::error::{ParametrixError, Result};
use crate::fourier::{signed, FourierGrid};
use crate::operator::{apply_op, PseudoOp};
use crate::symbol::{ParametrixSymbol, PrincipalProduct, ZetaShells};


/// Quasi-interpolant coefficients of the trigonometric interpolant of
/// `spectrum`, on the grid refined `factor` times.
pub fn spectral_refine(grid: &FourierGrid, spectrum: &[Complex64], factor: usize) -> Result<ScalarGrid> {
    let s = grid.spec;
    let fine_spec = GridSpec { origin: s.origin, h: s.h / factor as f64, nx: s.nx * factor, ny: s.ny * factor };
    let fine = FourierGrid::new(fine_spec, grid.pad)?;
    let mut data = vec![Complex64::new(0.0, 0.0); fine.len()];
    for (k, v) in spectrum.iter().enumerate() {
        let a = signed(k % grid.nx, grid.nx).rem_euclid(fine.nx as i64) as usize;
        let b = signed(k / grid.nx, grid.ny).rem_euclid(fine.ny as i64) as usize;
        data[b * fine.nx + a] = *v;
    }
    let full = fine.inverse_full(data);
    let at = |i: i64, j: i64| {
        let (i, j) = (i.rem_euclid(fine.nx as i64) as usize, j.rem_euclid(fine.ny as i64) as usize);
        full[j * fine.nx + i].re
    };
    let values = (0..fine_spec.len())
        .map(|k| {
            let (i, j) = fine_spec.coords(k);
            let (i, j) = (i as i64, j as i64);
            let lap = at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j);
            at(i, j) - lap / 12.0
        })
        .collect();
    Ok(ScalarGrid { spec: fine_spec, values, mask: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductSettings {
    pub route: NormalRoute,
    pub pad: usize,
    /// Spectral refinement of Qf before N is applied.
    pub refine: usize,
    /// Directions on S_x M for the compose route.
    pub n_dir: usize,
    pub zeta: ZetaShells,
}

impl Default for ProductSettings {
    fn default() -> Self {
        Self { route: NormalRoute::Compose, pad: crate::fourier::DEFAULT_PAD, refine: 4, n_dir: 256, zeta: ZetaShells::default() }
    }
}

/// Op(pa)f, Op(pa₋₁)f and Op(pc)f.
#[derive(Debug, Clone)]
pub struct ProductActions {
    pub full: ScalarGrid,
    pub principal: ScalarGrid,
    pub lower: ScalarGrid,
}

/// Op(pa₋₁)f, separable for conformal metrics.
pub fn apply_principal_product(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    chi: &RadialCutoff,
    constant: f64,
    f: &ScalarGrid,
    pad: usize,
    zeta: ZetaShells,
) -> Result<ScalarGrid> {
    let grid = FourierGrid::new(f.spec, pad)?;
    let p = ParametrixSymbol::new(m, constant, zeta.cutoff(grid.box_size().0))?;
    apply_op(&PseudoOp::new(PrincipalProduct::new(p, cut.clone(), chi.clone()), grid), f)
}

/// Op(pa)f, Op(pa₋₁)f and Op(pc)f for each f (all on one grid).
pub fn apply_products(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    chi: &RadialCutoff,
    constant: f64,
    fs: &[ScalarGrid],
    settings: &ProductSettings,
) -> Result<Vec<ProductActions>> {
    if m.conformal_factor(&Vec2::zeros()).is_none() {
        return Err(ParametrixError::NotSeparable);
    }
    let Some(spec) = fs.first().map(|f| f.spec) else { return Ok(Vec::new()) };
    let grid = FourierGrid::new(spec, settings.pad)?;
    let zeta = settings.zeta.cutoff(grid.box_size().0);
    // Q f = Op(ζ|ξ|) f, refined
    let refined = fs
        .iter()
        .map(|f| {
            let mut q = grid.forward(f)?;
            q.iter_mut().enumerate().for_each(|(k, v)| {
                let xi = grid.xi(k);
                *v *= zeta.eval(&xi) * xi.norm()
            });
            spectral_refine(&grid, &q, settings.refine)
        })
        .collect::<Result<Vec<_>>>()?;
    let fields: Vec<&dyn gxr_transform::Field> = refined.iter().map(|q| q as &dyn gxr_transform::Field).collect();
    let mut ns = NormalSettings::for_grid(&refined[0].spec);
    ns.compose.n_dir = settings.n_dir;
    let nq = normal_many(settings.route, m, &fields, spec, cut, &ns)?;
    fs.iter()
        .zip(nq)
        .map(|(f, nq)| {
            let full = nq.map(|x, v| v / (constant * m.conformal_factor(x).unwrap_or(1.0).sqrt()));
            let principal = apply_principal_product(m, cut, chi, constant, f, settings.pad, settings.zeta)?;
            let lower = full.sub(&principal);
            Ok(ProductActions { full, principal, lower })
        })
        .collect()
}
