//! Singular values of the assembled normal operator on a coarse grid.
//!
//! σ_min > 0 on the discretisation is evidence of injectivity, not a proof:
//! nothing passes from the grid matrix back to the continuum operator.

use std::fmt::Write;

use gxr_geometry::{check_simplicity, MetricField, SimplicityReport};
use gxr_transform::{assemble, disk_mask, CutoffSpec, GridSpec, NormalRoute, NormalSettings};

use crate::error::{ReconstructError, Result};

/// Largest grid side accepted by the dense probe.
pub const MAX_PROBE_DIM: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityReport {
    pub dims: usize,
    /// Grid nodes used as both rows and columns.
    pub nodes: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// ‖B − Bᵀ‖_F / ‖B‖_F for B = diag(√det g)·A, the matrix of N in L²(dvol_g).
    pub symmetry_defect: f64,
    /// The same defect for A itself, which is not symmetric unless g is flat.
    pub raw_symmetry_defect: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
}

impl InjectivityReport {
    pub fn condition(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }

    /// No numerical null space: σ_min > 10·ε·σ_max.
    pub fn passed(&self) -> bool {
        self.sigma_min > 10.0 * f64::EPSILON * self.sigma_max
    }

    /// Iterations to reduce a residual by `tol` under the log-linear model
    /// ρ = (κ − 1)/(κ + 1) of an unpreconditioned Richardson sweep.
    pub fn predicted_iterations(&self, tol: f64) -> f64 {
        let k = self.condition();
        (1.0 / tol).ln() / ((k + 1.0) / (k - 1.0)).ln()
    }

    pub fn summary(&self) -> String {
        format!(
            "{}x{} grid, {} nodes: sigma_min {:.6e}, sigma_max {:.6e}, condition {:.4e}, symmetry defect {:.3e} \
             (numerical probe, not a proof of injectivity)",
            self.dims,
            self.dims,
            self.nodes,
            self.sigma_min,
            self.sigma_max,
            self.condition(),
            self.symmetry_defect
        )
    }

    /// Header `index,sigma` followed by every singular value.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,sigma\n");
        for (k, v) in self.singular_values.iter().enumerate() {
            let _ = writeln!(s, "{k},{v:.12e}");
        }
        s
    }
}

/// Dense SVD of the kernel-route ψNφ on the nodes of a dims² grid inside the
/// region ψ = φ = 1 (clipped to the open unit disk). Refuses non-simple metrics.
pub fn injectivity_probe(m: &dyn MetricField, cut: &CutoffSpec, dims: usize) -> Result<InjectivityReport> {
    injectivity_probe_with(m, cut, dims, &NormalSettings::for_grid(&GridSpec::unit_square(dims.max(1))))
}

pub fn injectivity_probe_with(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    dims: usize,
    settings: &NormalSettings,
) -> Result<InjectivityReport> {
    if dims > MAX_PROBE_DIM {
        return Err(ReconstructError::TooLarge { n: dims, limit: MAX_PROBE_DIM });
    }
    if dims < 2 {
        return Err(ReconstructError::Settings(format!("grid side {dims} is too small")));
    }
    let report = check_simplicity(m);
    if !report.is_simple() {
        return Err(ReconstructError::NotSimple(describe(&report)));
    }
    let spec = GridSpec::unit_square(dims);
    let r = cut.identity_radius().min(1.0 - 1e-9);
    let mask = disk_mask(&spec, r);
    let op = assemble(NormalRoute::Kernel, m, spec, cut, &mask, &mask, settings)?;
    let a = op.to_matrix();
    let nodes = a.nrows();
    if nodes == 0 {
        return Err(ReconstructError::Settings("no grid nodes inside the probe region".into()));
    }
    let raw_symmetry_defect = (&a - a.transpose()).norm() / a.norm();
    let mut b = a.clone();
    for (i, &r) in op.rows.iter().enumerate() {
        let w = m.eval(&spec.node(r)).determinant().sqrt();
        b.row_mut(i).scale_mut(w);
    }
    let symmetry_defect = (&b - b.transpose()).norm() / b.norm();
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(InjectivityReport {
        dims,
        nodes,
        sigma_min: *sv.last().unwrap(),
        sigma_max: sv[0],
        symmetry_defect,
        raw_symmetry_defect,
        singular_values: sv,
    })
}

fn describe(r: &SimplicityReport) -> String {
    let mut parts = Vec::new();
    if !r.convex {
        parts.push(format!(
            "boundary not strictly convex (II = {:.4e} at theta = {:.4})",
            r.min_second_fundamental_form.0, r.min_second_fundamental_form.1
        ));
    }
    if let Some(w) = r.trapped_witness {
        parts.push(format!("trapped ray at theta = {:.4}, alpha = {:.4}", w.theta, w.alpha));
    }
    if let Some(w) = r.conjugate_witness {
        parts.push(format!("conjugate point at t = {:.6} (theta = {:.4}, alpha = {:.4})", w.t, w.theta, w.alpha));
    }
    if parts.is_empty() {
        parts.push("simplicity check failed".into());
    }
    parts.join("; ")
}
