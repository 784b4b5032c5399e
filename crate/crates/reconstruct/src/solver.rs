//! Preconditioned Richardson iteration for ψNφ f = d.
//!
//! With PN = Id + R the iteration f_{m+1} = f_m + P(d − N f_m) is the Neumann
//! series for (Id + R)⁻¹ applied to P d. The discrete N is a dense matrix from
//! grid values on Ω (where ψ = φ = 1) to values on the support of ψ, and each
//! correction is restricted back to Ω, the only nodes N sees.

use gxr_geometry::MetricField;
use gxr_parametrix::{parametrix_op_with, sobolev_from_spectrum, PseudoOp, ZetaShells, DEFAULT_PAD};
use gxr_transform::{
    assemble, backproject, disk_mask, CutoffSpec, DenseOperator, GridSpec, NormalRoute, NormalSettings, ScalarGrid,
    SinogramGrid,
};

use crate::error::{ReconstructError, Result};
use crate::trace::{IterationTrace, StopReason};

/// Solver controls. Defaults: tol 1e-3 on the relative residual, 50 iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub max_iter: usize,
    pub tol: f64,
    /// Residual increases in a row that count as divergence.
    pub divergence_window: usize,
    pub route: NormalRoute,
    /// Quadrature for the discrete N; `None` picks `NormalSettings::for_grid`.
    pub normal: Option<NormalSettings>,
    pub pad: usize,
    pub zeta: ZetaShells,
    /// Feed N the quasi-interpolant coefficients f − Δ₅f/12 instead of the
    /// point values, as the pointwise routes do.
    pub prefilter: bool,
    pub sobolev_t: Vec<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iter: 50,
            tol: 1e-3,
            divergence_window: 3,
            route: NormalRoute::Compose,
            normal: None,
            pad: DEFAULT_PAD,
            zeta: ZetaShells::default(),
            prefilter: true,
            sobolev_t: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
        }
    }
}

impl SolverSettings {
    pub fn with_limits(mut self, max_iter: usize, tol: f64) -> Self {
        self.max_iter = max_iter;
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol < 0.0 || self.divergence_window == 0 {
            return Err(ReconstructError::Settings(format!(
                "tol must be nonnegative and the divergence window positive (tol {}, window {})",
                self.tol, self.divergence_window
            )));
        }
        Ok(())
    }
}

/// The discrete ψNφ used for both synthetic data and inversion.
#[derive(Debug, Clone)]
pub struct NormalModel {
    pub op: DenseOperator,
    /// Support of iterates, the disk of radius min(identity radius, 1).
    pub omega: Vec<bool>,
    pub prefilter: bool,
}

impl NormalModel {
    pub fn assemble(
        m: &dyn MetricField,
        cut: &CutoffSpec,
        spec: GridSpec,
        route: NormalRoute,
        settings: &NormalSettings,
        prefilter: bool,
    ) -> Result<Self> {
        let r = cut.identity_radius().min(1.0);
        let omega = disk_mask(&spec, r);
        // the five-point stencil spreads Ω by one node
        let cols = if prefilter { disk_mask(&spec, (r + 1.5 * spec.h).min(1.0)) } else { omega.clone() };
        let rows: Vec<bool> = (0..spec.len())
            .map(|k| {
                let x = spec.node(k);
                x.norm() < 1.0 && cut.psi.eval(&x) > 0.0
            })
            .collect();
        let op = assemble(route, m, spec, cut, &rows, &cols, settings)?;
        Ok(Self { op, omega, prefilter })
    }

    pub fn spec(&self) -> GridSpec {
        self.op.spec
    }

    pub fn apply(&self, f: &ScalarGrid) -> Result<ScalarGrid> {
        if self.prefilter {
            Ok(self.op.apply(&quasi_coefficients(f))?)
        } else {
            Ok(self.op.apply(f)?)
        }
    }

    /// f with every node outside Ω set to zero.
    pub fn restrict(&self, f: &ScalarGrid) -> ScalarGrid {
        let mut g = f.clone();
        for (v, &inside) in g.values.iter_mut().zip(&self.omega) {
            if !inside {
                *v = 0.0;
            }
        }
        g.mask = None;
        g
    }
}

/// c = f − Δ₅f/12 from grid values, with zeros beyond the grid.
pub fn quasi_coefficients(f: &ScalarGrid) -> ScalarGrid {
    let spec = f.spec;
    let at = |i: isize, j: isize| {
        if i < 0 || j < 0 || i as usize >= spec.nx || j as usize >= spec.ny {
            0.0
        } else {
            f.values[spec.index(i as usize, j as usize)]
        }
    };
    let values = (0..spec.len())
        .map(|k| {
            let (i, j) = spec.coords(k);
            let (i, j) = (i as isize, j as isize);
            let lap = at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * f.values[k];
            f.values[k] - lap / 12.0
        })
        .collect();
    ScalarGrid { spec, values, mask: None }
}

/// A reconstruction and its trace.
#[derive(Debug, Clone)]
pub struct Inversion {
    pub f: ScalarGrid,
    pub trace: IterationTrace,
}

/// N and P on one grid, assembled once and reused across data sets.
pub struct Reconstructor<'a> {
    pub metric: &'a dyn MetricField,
    pub cut: CutoffSpec,
    pub model: NormalModel,
    pub parametrix: PseudoOp<'a>,
    pub settings: SolverSettings,
}

impl<'a> Reconstructor<'a> {
    pub fn new(
        m: &'a dyn MetricField,
        cut: &CutoffSpec,
        spec: GridSpec,
        constant: f64,
        settings: SolverSettings,
    ) -> Result<Self> {
        settings.validate()?;
        let normal = settings.normal.unwrap_or_else(|| NormalSettings::for_grid(&spec));
        let model = NormalModel::assemble(m, cut, spec, settings.route, &normal, settings.prefilter)?;
        let parametrix = parametrix_op_with(m, constant, spec, settings.pad, settings.zeta)?;
        Ok(Self { metric: m, cut: cut.clone(), model, parametrix, settings })
    }

    pub fn spec(&self) -> GridSpec {
        self.model.spec()
    }

    /// Synthetic data d = N f from the same discretisation the solver inverts.
    pub fn forward(&self, f: &ScalarGrid) -> Result<ScalarGrid> {
        self.check(f)?;
        self.model.apply(f)
    }

    fn check(&self, f: &ScalarGrid) -> Result<()> {
        if f.spec.same_layout(&self.spec()) {
            Ok(())
        } else {
            Err(ReconstructError::GridMismatch("data and operator grids differ".into()))
        }
    }

    fn sobolev(&self, f: &ScalarGrid) -> Result<Vec<f64>> {
        let grid = &self.parametrix.grid;
        let fhat = grid.forward(f).map_err(ReconstructError::from)?;
        Ok(self.settings.sobolev_t.iter().map(|&t| sobolev_from_spectrum(grid, &fhat, t)).collect())
    }

    /// One correction f ↦ f + P(d − N f) restricted to Ω, with the residual d − N f.
    pub fn step(&self, f: &ScalarGrid, d: &ScalarGrid) -> Result<(ScalarGrid, ScalarGrid)> {
        let r = d.sub(&self.model.apply(f)?);
        let corr = self.model.restrict(&self.parametrix.apply(&r)?);
        Ok((f.axpy(1.0, &corr), r))
    }

    /// Solve ψNφ f = d. When `truth` is given its relative error is traced.
    pub fn invert_normal(&self, d: &ScalarGrid, truth: Option<&ScalarGrid>) -> Result<Inversion> {
        self.check(d)?;
        if let Some(t) = truth {
            self.check(t)?;
        }
        let s = &self.settings;
        let mut trace = IterationTrace::new(s.sobolev_t.clone(), truth.is_some());
        let dn = d.l2_norm();
        let tn = truth.map(|t| t.l2_norm());
        let err_of = |f: &ScalarGrid| {
            truth.zip(tn).map(|(t, n)| if n > 0.0 { f.sub(t).l2_norm() / n } else { f.l2_norm() })
        };
        if dn == 0.0 {
            let f = ScalarGrid::zeros(self.spec());
            trace.push(0.0, err_of(&f), self.sobolev(&f)?);
            trace.stop = StopReason::ZeroData;
            return Ok(Inversion { f, trace });
        }
        let mut f = self.model.restrict(&self.parametrix.apply(d)?);
        loop {
            let (next, r) = self.step(&f, d)?;
            let rel = r.l2_norm() / dn;
            trace.push(rel, err_of(&f), self.sobolev(&f)?);
            if rel <= s.tol {
                trace.stop = StopReason::Converged;
                return Ok(Inversion { f, trace });
            }
            if trace.trailing_increases(0.0) >= s.divergence_window {
                trace.stop = StopReason::Diverged;
                return Err(ReconstructError::Diverged { window: s.divergence_window, last: rel, trace: Box::new(trace) });
            }
            if trace.iterations() >= s.max_iter {
                trace.stop = StopReason::MaxIter;
                return Ok(Inversion { f, trace });
            }
            f = next;
        }
    }

    /// d = ψ·I*s with the same factor-2 convention as N, then `invert_normal`.
    pub fn invert_sinogram(
        &self,
        sino: &SinogramGrid,
        n_dir: usize,
        ray_step: f64,
        truth: Option<&ScalarGrid>,
    ) -> Result<Inversion> {
        let d = self.backproject(sino, n_dir, ray_step)?;
        self.invert_normal(&d, truth)
    }

    /// ψ·I*s on the grid.
    pub fn backproject(&self, sino: &SinogramGrid, n_dir: usize, ray_step: f64) -> Result<ScalarGrid> {
        let b = backproject(self.metric, sino, self.spec(), n_dir, ray_step)?;
        Ok(b.map(|x, v| if x.norm() < 1.0 { self.cut.psi.eval(x) * v } else { 0.0 }))
    }
}

/// One-shot form: assemble N and P on the grid of `d`, then iterate.
pub fn invert_normal(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    d: &ScalarGrid,
    constant: f64,
    settings: SolverSettings,
) -> Result<Inversion> {
    Reconstructor::new(m, cut, d.spec, constant, settings)?.invert_normal(d, None)
}
