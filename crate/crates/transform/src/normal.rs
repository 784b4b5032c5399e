//! The localized normal operator ψNφ, built two independent ways.
//!
//! * Compose: Nf(x) = 2∫_{S_x M}∫₀^τ f(γ_{x,v}(t)) dt dS_x(v), the fused form of I*I.
//! * Kernel: ∫ K̃(x, y) f(y) dy in Euclidean polar coordinates y = x + ρω about x,
//!   where the ρ from the area element cancels d_g(x, y)^{-1}. With the geodesic
//!   fan Φ(t, θ) around x, K̃ρ = 2ψ(x)φ(y)ρ / |det dΦ|.
//!
//! Both reduce to per-pixel lists of (y, weight) samples, which are either
//! contracted against fields or scattered into a dense matrix.

use std::f64::consts::TAU;

use gxr_geometry::{inv_sqrtm, log_map_full, GeodesicFan, MetricField, Vec2};
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::backproject::{backproject, direction};
use crate::cutoff::CutoffSpec;
use crate::error::{Result, TransformError};
use crate::grid::{Field, GridSpec, ScalarGrid, Weighted};
use crate::rays::{ray_options, trace_clipped, RayScratch};
use gxr_geometry::TraceOptions;
use crate::sinogram::SinogramGrid;
use crate::xray::{xray, RaySettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalRoute {
    Compose,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposeSettings {
    /// Directions on S_x M.
    pub n_dir: usize,
    pub rays: RaySettings,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSettings {
    pub n_rho: usize,
    pub n_omega: usize,
    /// Rays and step of the geodesic fan used to invert exp_x.
    pub fan_angles: usize,
    pub fan_dt: f64,
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self { n_rho: 128, n_omega: 256, fan_angles: 256, fan_dt: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalSettings {
    pub compose: ComposeSettings,
    pub kernel: KernelSettings,
}

impl NormalSettings {
    /// Settings for grid data on `spec`.
    pub fn for_grid(spec: &GridSpec) -> Self {
        Self {
            compose: ComposeSettings { n_dir: 256, rays: RaySettings::for_grid(spec) },
            kernel: KernelSettings::default(),
        }
    }

    /// Settings for analytic fields.
    pub fn analytic() -> Self {
        Self { compose: ComposeSettings { n_dir: 256, rays: RaySettings::analytic() }, kernel: KernelSettings::default() }
    }
}

/// Chord [ρ₁, ρ₂] of the ray x + ρω (ρ ≥ 0) inside the centered disk of radius r.
fn chord(x: &Vec2, w: &Vec2, r: f64) -> Option<(f64, f64)> {
    let b = x.dot(w);
    let disc = b * b - (x.norm_squared() - r * r);
    if disc <= 0.0 {
        return None;
    }
    let q = disc.sqrt();
    let hi = -b + q;
    if hi <= 0.0 {
        return None;
    }
    Some(((-b - q).max(0.0), hi))
}

/// Samples of the compose route at x: Ñf(x) ≈ Σ w_i f(y_i). `opts` come from
/// `ray_options` for the same radius, built once per operator.
#[allow(clippy::too_many_arguments)]
pub fn compose_samples(
    m: &dyn MetricField,
    x: &Vec2,
    cut: &CutoffSpec,
    radius: f64,
    opts: &TraceOptions,
    s: &ComposeSettings,
    scratch: &mut RayScratch,
    out: &mut Vec<(Vec2, f64)>,
) -> Result<()> {
    out.clear();
    let psi = cut.psi.eval(x);
    if psi == 0.0 || x.norm() >= 1.0 {
        return Ok(());
    }
    let frame = inv_sqrtm(&m.eval(x));
    let scale = 2.0 * psi * TAU / s.n_dir as f64;
    for k in 0..s.n_dir {
        let v = direction(&frame, k, s.n_dir);
        let ray = trace_clipped(m, x, &v, opts, Some(radius))?;
        scratch.fill(&ray, &s.rays.rule);
        for (p, w) in scratch.pos.iter().zip(&scratch.ws) {
            let phi = cut.phi.eval(p);
            if phi != 0.0 {
                out.push((*p, scale * w * phi));
            }
        }
    }
    Ok(())
}

/// |det dΦ| at y for the fan around x, falling back to Newton shooting.
fn fan_det(m: &dyn MetricField, fan: Option<&GeodesicFan>, x: &Vec2, y: &Vec2) -> Result<f64> {
    if let Some(p) = fan.and_then(|f| f.locate(y)) {
        return Ok(p.det.abs());
    }
    let l = log_map_full(m, x, y)?;
    let t = gxr_geometry::norm_g(&m.eval(x), &l.w);
    let e = inv_sqrtm(&m.eval(x));
    Ok((t * l.differential.determinant() * e.determinant()).abs())
}

/// Samples of the kernel route at x: midpoint rule in ρ over each chord, uniform in ω.
pub fn kernel_samples(
    m: &dyn MetricField,
    x: &Vec2,
    cut: &CutoffSpec,
    radius: f64,
    s: &KernelSettings,
    out: &mut Vec<(Vec2, f64)>,
) -> Result<()> {
    out.clear();
    let psi = cut.psi.eval(x);
    if psi == 0.0 || x.norm() >= 1.0 {
        return Ok(());
    }
    let flat = m.is_flat();
    let fan = if flat {
        None
    } else {
        let r_stop = (radius + 0.05).min(m.domain_radius() - 1e-3);
        Some(GeodesicFan::build(m, *x, s.fan_angles, s.fan_dt, r_stop)?)
    };
    let dw = TAU / s.n_omega as f64;
    for q in 0..s.n_omega {
        let a = dw * (q as f64 + 0.5);
        let w = Vec2::new(a.cos(), a.sin());
        let Some((r0, r1)) = chord(x, &w, radius) else { continue };
        let dr = (r1 - r0) / s.n_rho as f64;
        for l in 0..s.n_rho {
            let rho = r0 + dr * (l as f64 + 0.5);
            let y = x + w * rho;
            let phi = cut.phi.eval(&y);
            if phi == 0.0 {
                continue;
            }
            let jac = if flat { 1.0 } else { rho / fan_det(m, fan.as_ref(), x, &y)? };
            out.push((y, 2.0 * psi * phi * jac * dr * dw));
        }
    }
    Ok(())
}

fn clip_radius(cut: &CutoffSpec, support: Option<f64>) -> f64 {
    support.unwrap_or(1.0).min(cut.phi_support()).min(1.0)
}

#[allow(clippy::too_many_arguments)]
fn pixel_samples(
    route: NormalRoute,
    m: &dyn MetricField,
    x: &Vec2,
    cut: &CutoffSpec,
    radius: f64,
    opts: &TraceOptions,
    settings: &NormalSettings,
    scratch: &mut RayScratch,
    out: &mut Vec<(Vec2, f64)>,
) -> Result<()> {
    match route {
        NormalRoute::Compose => compose_samples(m, x, cut, radius, opts, &settings.compose, scratch, out),
        NormalRoute::Kernel => kernel_samples(m, x, cut, radius, &settings.kernel, out),
    }
}

/// ψNφ applied to several fields at once on the nodes of `spec`.
pub fn normal_many(
    route: NormalRoute,
    m: &dyn MetricField,
    fields: &[&dyn Field],
    spec: GridSpec,
    cut: &CutoffSpec,
    settings: &NormalSettings,
) -> Result<Vec<ScalarGrid>> {
    let support = fields.iter().map(|f| f.support_radius()).try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)));
    let radius = clip_radius(cut, support);
    let opts = ray_options(m, settings.compose.rays.ray_step, Some(radius));
    let rows: Vec<Vec<f64>> = (0..spec.len())
        .into_par_iter()
        .map_init(
            || (RayScratch::default(), Vec::new()),
            |(scratch, samples), idx| {
                let x = spec.node(idx);
                if radius <= 0.0 {
                    return Ok(vec![0.0; fields.len()]);
                }
                pixel_samples(route, m, &x, cut, radius, &opts, settings, scratch, samples)?;
                Ok(fields.iter().map(|f| samples.iter().map(|(y, w)| w * f.value(y)).sum()).collect())
            },
        )
        .collect::<Result<_>>()?;
    Ok((0..fields.len())
        .map(|k| ScalarGrid { spec, values: rows.iter().map(|r| r[k]).collect(), mask: None })
        .collect())
}

/// Nf by the fused I*I construction (ψ, φ applied as in ψNφ).
pub fn normal_compose(
    m: &dyn MetricField,
    f: &dyn Field,
    spec: GridSpec,
    cut: &CutoffSpec,
    settings: &NormalSettings,
) -> Result<ScalarGrid> {
    Ok(normal_many(NormalRoute::Compose, m, &[f], spec, cut, settings)?.remove(0))
}

/// ∫ K̃(x, y) f(y) dy by polar quadrature of the singular kernel.
pub fn normal_kernel(
    m: &dyn MetricField,
    f: &dyn Field,
    spec: GridSpec,
    cut: &CutoffSpec,
    settings: &NormalSettings,
) -> Result<ScalarGrid> {
    Ok(normal_many(NormalRoute::Kernel, m, &[f], spec, cut, settings)?.remove(0))
}

/// Dense matrix of ψNφ from grid functions on `cols` to values on `rows`
/// (bilinear interpolation of the input), stored row-major.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub spec: GridSpec,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl DenseOperator {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols.len() + j]
    }

    pub fn apply(&self, f: &ScalarGrid) -> Result<ScalarGrid> {
        if !f.spec.same_layout(&self.spec) {
            return Err(TransformError::GridMismatch("operator and input grids differ".into()));
        }
        let nc = self.cols.len();
        let xs: Vec<f64> = self.cols.iter().map(|&c| f.values[c]).collect();
        let out: Vec<f64> = self
            .values
            .par_chunks(nc.max(1))
            .map(|row| row.iter().zip(&xs).map(|(a, b)| a * b).sum())
            .collect();
        let mut g = ScalarGrid::zeros(self.spec);
        for (r, v) in self.rows.iter().zip(out) {
            g.values[*r] = v;
        }
        Ok(g)
    }

    /// The square submatrix on rows ∩ cols, for rows == cols assemblies.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows.len(), self.cols.len(), &self.values)
    }
}

/// Assemble ψNφ restricted to input nodes `col_mask` and output nodes `row_mask`.
pub fn assemble(
    route: NormalRoute,
    m: &dyn MetricField,
    spec: GridSpec,
    cut: &CutoffSpec,
    row_mask: &[bool],
    col_mask: &[bool],
    settings: &NormalSettings,
) -> Result<DenseOperator> {
    let cols: Vec<usize> = (0..spec.len()).filter(|&k| col_mask[k]).collect();
    let rows: Vec<usize> = (0..spec.len()).filter(|&k| row_mask[k]).collect();
    let mut col_of = vec![usize::MAX; spec.len()];
    for (j, &c) in cols.iter().enumerate() {
        col_of[c] = j;
    }
    let reach = cols.iter().map(|&c| spec.node(c).norm()).fold(0.0, f64::max) + 1.5 * spec.h;
    let radius = clip_radius(cut, Some(reach));
    let opts = ray_options(m, settings.compose.rays.ray_step, Some(radius));
    let nc = cols.len();
    let chunks: Vec<Vec<f64>> = rows
        .par_iter()
        .map_init(
            || (RayScratch::default(), Vec::new()),
            |(scratch, samples), &r| {
                let mut row = vec![0.0; nc];
                if nc == 0 {
                    return Ok(row);
                }
                pixel_samples(route, m, &spec.node(r), cut, radius, &opts, settings, scratch, samples)?;
                for (y, w) in samples.iter() {
                    for (k, b) in spec.bilinear(y) {
                        if k != usize::MAX && col_of[k] != usize::MAX {
                            row[col_of[k]] += w * b;
                        }
                    }
                }
                Ok(row)
            },
        )
        .collect::<Result<_>>()?;
    Ok(DenseOperator { spec, rows, cols, values: chunks.concat() })
}

/// I*I f: forward transform followed by backprojection.
pub fn normal_via_sinogram(
    m: &dyn MetricField,
    f: &dyn Field,
    spec: GridSpec,
    sino: &SinogramSettings,
) -> Result<(SinogramGrid, ScalarGrid)> {
    let s = xray(m, f, sino.fan, &sino.rays)?;
    let b = backproject(m, &s, spec, sino.n_dir, sino.rays.ray_step)?;
    Ok((s, b))
}

/// Resolution of the explicit I*I route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramSettings {
    pub fan: gxr_geometry::FanBeam,
    pub rays: RaySettings,
    pub n_dir: usize,
}

/// max over trials of ‖I*I f − N f‖ / ‖f‖ for both constructions of N.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalIdentityReport {
    pub compose: Vec<f64>,
    pub kernel: Vec<f64>,
}

impl NormalIdentityReport {
    pub fn max_compose(&self) -> f64 {
        self.compose.iter().copied().fold(0.0, f64::max)
    }
    pub fn max_kernel(&self) -> f64 {
        self.kernel.iter().copied().fold(0.0, f64::max)
    }
    pub fn max_ratio(&self) -> f64 {
        self.max_compose().max(self.max_kernel())
    }
}

/// Compare I*I f against both constructions of N (without cutoffs) on each trial field.
pub fn verify_normal_identity(
    m: &dyn MetricField,
    trials: &[&dyn Field],
    spec: GridSpec,
    sino: &SinogramSettings,
    settings: &NormalSettings,
) -> Result<NormalIdentityReport> {
    let cut = CutoffSpec::none();
    let nc = normal_many(NormalRoute::Compose, m, trials, spec, &cut, settings)?;
    let nk = normal_many(NormalRoute::Kernel, m, trials, spec, &cut, settings)?;
    let mut report = NormalIdentityReport { compose: Vec::new(), kernel: Vec::new() };
    for (k, f) in trials.iter().enumerate() {
        let fg = ScalarGrid::from_field(spec, *f);
        let norm = fg.l2_norm();
        if norm == 0.0 {
            report.compose.push(0.0);
            report.kernel.push(0.0);
            continue;
        }
        let (_, ii) = normal_via_sinogram(m, *f, spec, sino)?;
        report.compose.push(ii.sub(&nc[k]).l2_norm() / norm);
        report.kernel.push(ii.sub(&nk[k]).l2_norm() / norm);
    }
    Ok(report)
}

/// φ·f as a field, for callers that need the input side of ψNφ explicitly.
pub fn phi_weighted<'a>(f: &'a dyn Field, cut: &'a CutoffSpec) -> Weighted<'a, impl Fn(&Vec2) -> f64 + Sync + 'a> {
    Weighted { inner: f, weight: move |p: &Vec2| cut.phi.eval(p) }
}
