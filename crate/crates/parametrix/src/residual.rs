//! The remainder R in PN = Id + R, measured on band-localized wave packets.

use gxr_geometry::{MetricField, Vec2};
use gxr_kernel_symbol::power_fit;
use gxr_transform::{normal_many, CutoffSpec, Field, GridSpec, NormalRoute, NormalSettings, RadialCutoff, ScalarGrid};

use crate::error::{ParametrixError, Result};
use crate::fourier::{FourierGrid, DEFAULT_PAD};
use crate::operator::{apply_op, parametrix_op_with};
use crate::symbol::ZetaShells;
use crate::sobolev::{band_energies, dyadic_bands, sobolev_from_spectrum};

/// Gaussian envelope × cos(ξ·x), tapered to vanish outside `taper.r_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub center: Vec2,
    pub sigma: f64,
    pub xi: Vec2,
    pub taper: RadialCutoff,
}

impl WavePacket {
    pub const SIGMA: f64 = 0.15;

    /// Packet at 2^j lattice spacings `dxi` along the first axis.
    pub fn level(j: u32, dxi: f64) -> Self {
        Self {
            center: Vec2::zeros(),
            sigma: Self::SIGMA,
            xi: Vec2::new(2f64.powi(j as i32) * dxi, 0.0),
            taper: RadialCutoff::new(0.4, 0.55),
        }
    }
}

impl Field for WavePacket {
    fn value(&self, p: &Vec2) -> f64 {
        let t = self.taper.eval(p);
        if t == 0.0 {
            return 0.0;
        }
        let d = p - self.center;
        t * (-d.norm_squared() / (2.0 * self.sigma * self.sigma)).exp() * self.xi.dot(p).cos()
    }
    fn support_radius(&self) -> Option<f64> {
        Some(self.taper.r_out + self.taper.center.norm())
    }
}

/// How N is evaluated and P discretized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSettings {
    pub route: NormalRoute,
    pub normal: NormalSettings,
    pub pad: usize,
    pub zeta: ZetaShells,
}

impl ResidualSettings {
    /// Kernel route with quadrature for analytic inputs.
    pub fn analytic() -> Self {
        Self { route: NormalRoute::Kernel, normal: NormalSettings::analytic(), pad: DEFAULT_PAD, zeta: ZetaShells::default() }
    }

    /// Kernel route with quadrature for bilinear grid data on `spec`.
    pub fn for_grid(spec: &GridSpec) -> Self {
        Self {
            route: NormalRoute::Kernel,
            normal: NormalSettings::for_grid(spec),
            pad: DEFAULT_PAD,
            zeta: ZetaShells::default(),
        }
    }

    pub fn with_route(mut self, route: NormalRoute) -> Self {
        self.route = route;
        self
    }
}

/// f, PNf and Rf = PNf − f at the nodes.
#[derive(Debug, Clone)]
pub struct Residual {
    pub f: ScalarGrid,
    pub pnf: ScalarGrid,
    pub rf: ScalarGrid,
}

impl Residual {
    /// ‖Rf‖ / ‖f‖ (0 for f = 0).
    pub fn ratio(&self) -> f64 {
        let n = self.f.l2_norm();
        if n == 0.0 {
            0.0
        } else {
            self.rf.l2_norm() / n
        }
    }
}

fn check_support(cut: &CutoffSpec, f: &dyn Field) -> Result<()> {
    let radius = f.support_radius().unwrap_or(f64::INFINITY);
    let limit = cut.identity_radius();
    if radius > limit + 1e-12 {
        return Err(ParametrixError::SupportViolation { radius, limit });
    }
    Ok(())
}

/// PNf and Rf = PNf − f for each field; every field must be supported
/// where ψ = φ = 1, since only there does ψNφ act as N.
pub fn residual_many(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    fields: &[&dyn Field],
    spec: GridSpec,
    constant: f64,
    settings: &ResidualSettings,
) -> Result<Vec<Residual>> {
    for f in fields {
        check_support(cut, *f)?;
    }
    let p = parametrix_op_with(m, constant, spec, settings.pad, settings.zeta)?;
    let nf = normal_many(settings.route, m, fields, spec, cut, &settings.normal)?;
    fields
        .iter()
        .zip(nf)
        .map(|(f, nf)| {
            let fs = ScalarGrid::from_field(spec, *f);
            let pnf = apply_op(&p, &nf)?;
            let rf = pnf.sub(&fs);
            Ok(Residual { f: fs, pnf, rf })
        })
        .collect()
}

pub fn residual(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    f: &dyn Field,
    spec: GridSpec,
    constant: f64,
    settings: &ResidualSettings,
) -> Result<Residual> {
    Ok(residual_many(m, cut, &[f], spec, constant, settings)?.remove(0))
}

/// Per-level measurements of a smoothing experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub level: u32,
    /// |ξ_j| of the packet.
    pub frequency: f64,
    pub input_norm: f64,
    pub residual_norm: f64,
    pub input_bands: Vec<f64>,
    pub residual_bands: Vec<f64>,
    /// ‖f_j‖_{H^t} and ‖Rf_j‖_{H^t} for each probe index t.
    pub input_sobolev: Vec<f64>,
    pub residual_sobolev: Vec<f64>,
}

impl LevelRow {
    pub fn ratio(&self) -> f64 {
        self.residual_norm / self.input_norm
    }
}

/// ‖Rf_j‖/‖f_j‖ ∼ 2^{−jτ̂} over wave-packet levels j.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    /// Band edges in lattice units.
    pub bands: Vec<(f64, f64)>,
    pub sobolev_t: Vec<f64>,
    pub rows: Vec<LevelRow>,
    pub tau_hat: f64,
    pub r_squared: f64,
}

impl SmoothingReport {
    /// R strictly smoothing.
    pub fn passed(&self) -> bool {
        self.tau_hat > 0.0
    }

    pub fn summary(&self) -> String {
        format!(
            "tau_hat={:.4} r_squared={:.4} {}",
            self.tau_hat,
            self.r_squared,
            if self.passed() { "pass" } else { "fail" }
        )
    }

    /// One row per (level, band): band edges, input and residual energy, their ratio.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,band,k_lo,k_hi,input_energy,residual_energy,ratio\n");
        for r in &self.rows {
            for (b, (lo, hi)) in self.bands.iter().enumerate() {
                let (e_in, e_res) = (r.input_bands[b], r.residual_bands[b]);
                let ratio = if e_in > 0.0 { e_res / e_in } else { 0.0 };
                s.push_str(&format!("{},{},{},{},{:e},{:e},{:e}\n", r.level, b, lo, hi, e_in, e_res, ratio));
            }
        }
        s
    }

    /// ‖·‖_{H^t} of inputs and residuals per level.
    pub fn sobolev_csv(&self) -> String {
        let mut s = String::from("level,t,input_norm,residual_norm\n");
        for r in &self.rows {
            for (k, t) in self.sobolev_t.iter().enumerate() {
                s.push_str(&format!("{},{},{:e},{:e}\n", r.level, t, r.input_sobolev[k], r.residual_sobolev[k]));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSettings {
    pub levels: Vec<u32>,
    pub residual: ResidualSettings,
    pub sobolev_t: Vec<f64>,
}

impl SmoothingSettings {
    pub fn new(levels: Vec<u32>, residual: ResidualSettings) -> Self {
        Self { levels, residual, sobolev_t: vec![-1.0, -0.5, 0.0, 0.5, 1.0] }
    }
}

/// Fit τ̂ from wave packets at 2^j padded-lattice spacings, j in `levels`.
pub fn smoothing_order(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    spec: GridSpec,
    constant: f64,
    settings: &SmoothingSettings,
) -> Result<SmoothingReport> {
    if settings.levels.len() < 3 {
        return Err(ParametrixError::Fit(format!("{} levels; at least 3 are needed", settings.levels.len())));
    }
    let grid = FourierGrid::new(spec, settings.residual.pad)?;
    let dxi = grid.dxi().0;
    let packets: Vec<WavePacket> = settings.levels.iter().map(|&j| WavePacket::level(j, dxi)).collect();
    let nyquist = std::f64::consts::PI / spec.h;
    if let Some(p) = packets.iter().find(|p| p.xi.norm() > 0.5 * nyquist * (1.0 + 1e-9)) {
        return Err(ParametrixError::Fit(format!(
            "packet frequency {} is not resolved by the grid (Nyquist {nyquist})",
            p.xi.norm()
        )));
    }
    let fields: Vec<&dyn Field> = packets.iter().map(|p| p as &dyn Field).collect();
    let res = residual_many(m, cut, &fields, spec, constant, &settings.residual)?;
    let bands = dyadic_bands(&grid);
    let rows: Vec<LevelRow> = settings
        .levels
        .iter()
        .zip(&packets)
        .zip(&res)
        .map(|((&level, p), r)| {
            let fh = grid.forward_values(&r.f.values);
            let rh = grid.forward_values(&r.rf.values);
            LevelRow {
                level,
                frequency: p.xi.norm(),
                input_norm: r.f.l2_norm(),
                residual_norm: r.rf.l2_norm(),
                input_bands: band_energies(&grid, &fh, &bands),
                residual_bands: band_energies(&grid, &rh, &bands),
                input_sobolev: settings.sobolev_t.iter().map(|t| sobolev_from_spectrum(&grid, &fh, *t)).collect(),
                residual_sobolev: settings.sobolev_t.iter().map(|t| sobolev_from_spectrum(&grid, &rh, *t)).collect(),
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| 2f64.powi(r.level as i32)).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio()).collect();
    let fit = power_fit(&xs, &ys).map_err(|e| ParametrixError::Fit(e.to_string()))?;
    Ok(SmoothingReport {
        bands,
        sobolev_t: settings.sobolev_t.clone(),
        rows,
        tau_hat: -fit.slope,
        r_squared: fit.r_squared,
    })
}
