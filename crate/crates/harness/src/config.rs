//! Experiment configuration: `[section]` headers with flat `key = value`
//! lines (a TOML subset, so `grid.dims = 64` also works at top level).
//!
//! Only `metric.family` is required; every other key has a default.

use std::path::PathBuf;

use gxr_geometry::MetricFamily;
use gxr_parametrix::ZetaShells;
use gxr_reconstruct::SolverSettings;
use gxr_transform::{CutoffSpec, RadialCutoff};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub metric: MetricSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub fan: FanSection,
    #[serde(default)]
    pub cutoff: CutoffSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub phantom: PhantomSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub name: String,
    pub output: String,
    /// Seed of every random probe.
    pub seed: u64,
    /// Worker threads; 0 uses every core. Never changes results.
    pub workers: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { name: "default".into(), output: "out".into(), seed: 7, workers: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Euclidean,
    Gaussian,
    ConstantCurvature,
    FiniteRegularity,
}

/// Parameters not used by the selected family are kept, so a config
/// switches family by changing one line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSection {
    pub family: FamilyName,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "default_curvature")]
    pub curvature: f64,
    #[serde(default = "default_center_x")]
    pub center_x: f64,
    #[serde(default)]
    pub center_y: f64,
}

fn default_epsilon() -> f64 {
    0.2
}
fn default_k() -> u32 {
    10
}
fn default_curvature() -> f64 {
    4.0
}
fn default_center_x() -> f64 {
    0.3
}

impl MetricSection {
    pub fn with_family(family: FamilyName) -> Self {
        Self {
            family,
            epsilon: default_epsilon(),
            k: default_k(),
            curvature: default_curvature(),
            center_x: default_center_x(),
            center_y: 0.0,
        }
    }

    pub fn family(&self) -> MetricFamily {
        self.family_named(self.family)
    }

    /// The family `name` with this section's parameters.
    pub fn family_named(&self, name: FamilyName) -> MetricFamily {
        match name {
            FamilyName::Euclidean => MetricFamily::Euclidean,
            FamilyName::Gaussian => MetricFamily::Gaussian { epsilon: self.epsilon },
            FamilyName::ConstantCurvature => MetricFamily::ConstantCurvature { curvature: self.curvature },
            FamilyName::FiniteRegularity => {
                MetricFamily::FiniteRegularity { k: self.k, epsilon: self.epsilon, center: [self.center_x, self.center_y] }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Nodes per side of the unit square.
    pub dims: usize,
    /// Zero-padding factor of the Fourier box.
    pub pad: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dims: 128, pad: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FanSection {
    pub n_theta: usize,
    pub n_alpha: usize,
}

impl Default for FanSection {
    fn default() -> Self {
        Self { n_theta: 180, n_alpha: 90 }
    }
}

/// ψ, φ and χ radii are lengths; ζ radii are shells of the padded Fourier
/// lattice, so ζ ramps over [inner, outer]·2π/L.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffSection {
    pub psi_inner: f64,
    pub psi_outer: f64,
    pub phi_inner: f64,
    pub phi_outer: f64,
    pub chi_inner: f64,
    pub chi_outer: f64,
    pub zeta_inner: f64,
    pub zeta_outer: f64,
}

impl Default for CutoffSection {
    fn default() -> Self {
        let cut = CutoffSpec::default();
        let chi = gxr_kernel_symbol::default_chi();
        let zeta = ZetaShells::default();
        Self {
            psi_inner: cut.psi.r_in,
            psi_outer: cut.psi.r_out,
            phi_inner: cut.phi.r_in,
            phi_outer: cut.phi.r_out,
            chi_inner: chi.r_in,
            chi_outer: chi.r_out,
            zeta_inner: zeta.inner,
            zeta_outer: zeta.outer,
        }
    }
}

impl CutoffSection {
    pub fn spec(&self) -> CutoffSpec {
        CutoffSpec::new(RadialCutoff::new(self.psi_inner, self.psi_outer), RadialCutoff::new(self.phi_inner, self.phi_outer))
    }

    pub fn chi(&self) -> RadialCutoff {
        RadialCutoff::new(self.chi_inner, self.chi_outer)
    }

    pub fn zeta(&self) -> ZetaShells {
        ZetaShells { inner: self.zeta_inner, outer: self.zeta_outer }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { max_iter: 30, tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomKind {
    Gaussian,
    Disk,
    Zero,
}

/// Test object of `forward`, `normal` and `reconstruct`, centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhantomSection {
    pub kind: PhantomKind,
    pub sigma: f64,
    pub radius: f64,
}

impl Default for PhantomSection {
    fn default() -> Self {
        Self { kind: PhantomKind::Gaussian, sigma: 0.15, radius: 0.5 }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentSection::default(),
            metric: MetricSection::with_family(FamilyName::Euclidean),
            grid: GridSection::default(),
            fan: FanSection::default(),
            cutoff: CutoffSection::default(),
            solver: SolverSection::default(),
            phantom: PhantomSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(s) => ConfigError::Parse(format!("line {}: {msg}", text[..s.start].matches('\n').count() + 1)),
                None => ConfigError::Parse(msg),
            }
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    /// Canonical text. Panics only for a seed that `validate` rejects.
    pub fn serialize(&self) -> String {
        toml::to_string(self).expect("a config that passes validate() serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.experiment.seed > i64::MAX as u64 {
            return bad(format!("experiment.seed = {} exceeds 2^63 - 1, the largest config integer", self.experiment.seed));
        }
        let g = &self.grid;
        if g.dims < 8 || !g.dims.is_power_of_two() {
            return bad(format!("grid.dims = {} must be a power of two, at least 8", g.dims));
        }
        if g.pad == 0 || !g.pad.is_power_of_two() {
            return bad(format!("grid.pad = {} must be a power of two", g.pad));
        }
        if self.fan.n_theta < 2 || self.fan.n_alpha < 2 {
            return bad(format!("fan resolution {}x{} needs at least 2 samples per axis", self.fan.n_theta, self.fan.n_alpha));
        }
        let c = &self.cutoff;
        for (name, a, b) in [
            ("psi", c.psi_inner, c.psi_outer),
            ("phi", c.phi_inner, c.phi_outer),
            ("chi", c.chi_inner, c.chi_outer),
            ("zeta", c.zeta_inner, c.zeta_outer),
        ] {
            if !(a.is_finite() && b.is_finite() && a > 0.0 && a < b) {
                return bad(format!("cutoff.{name}_inner = {a} and cutoff.{name}_outer = {b} need 0 < inner < outer"));
            }
        }
        let m = &self.metric;
        if !(m.epsilon.is_finite() && m.epsilon > -1.0) {
            return bad(format!("metric.epsilon = {} must exceed -1", m.epsilon));
        }
        if !m.curvature.is_finite() || !m.center_x.is_finite() || !m.center_y.is_finite() {
            return bad("metric.curvature and metric.center_* must be finite".into());
        }
        if m.k < 2 {
            return bad(format!("metric.k = {} must be at least 2", m.k));
        }
        if self.solver.max_iter == 0 || !(self.solver.tol.is_finite() && self.solver.tol >= 0.0) {
            return bad(format!(
                "solver.max_iter = {} must be positive and solver.tol = {} nonnegative",
                self.solver.max_iter, self.solver.tol
            ));
        }
        let p = &self.phantom;
        if !(p.sigma > 0.0 && p.radius > 0.0 && p.sigma.is_finite() && p.radius.is_finite()) {
            return bad(format!("phantom.sigma = {} and phantom.radius = {} must be positive", p.sigma, p.radius));
        }
        Ok(())
    }

    /// SHA-256 of the canonical form, ignoring the keys that cannot change
    /// results (output directory, worker count).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.experiment.output.clear();
        c.experiment.workers = 0;
        Sha256::digest(c.serialize().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn solver_settings(&self) -> SolverSettings {
        let mut s = SolverSettings::default().with_limits(self.solver.max_iter, self.solver.tol);
        s.pad = self.grid.pad;
        s.zeta = self.cutoff.zeta();
        s
    }
}
