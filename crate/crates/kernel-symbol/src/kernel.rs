//! The cut-off kernel k(x, z) = K̃(x, x − z) and its polar factorization
//! k(x, z) = |z|^{1−n} h(x, |z|, z/|z|).

use gxr_geometry::quadrature::composite_gauss_legendre;
use gxr_geometry::{inv_sqrtm, log_map_full, log_map_steps, norm_g, GeodesicFan, MetricField, Vec2};
use gxr_transform::{CutoffSpec, RadialCutoff};

use crate::error::{Result, SymbolError};

fn check_domain(m: &dyn MetricField, y: &Vec2) -> Result<()> {
    if y.norm() > m.domain_radius() {
        return Err(SymbolError::OutsideDomain([y[0], y[1]]));
    }
    Ok(())
}

/// k(x, z) = ψ(x)·2a(x, y)·d_g(x, y)^{-1}·det g(y)^{1/2}·φ(y), y = x − z, by shooting.
pub fn kernel_eval(m: &dyn MetricField, cut: &CutoffSpec, x: &Vec2, z: &Vec2) -> Result<f64> {
    KernelCenter::shooting(m, cut, *x)?.k(z)
}

/// h(x, 0, ω) = 2ψ(x)φ(x)·det g(x)^{1/2} / |ω|_{g(x)}.
pub fn h_limit(m: &dyn MetricField, cut: &CutoffSpec, x: &Vec2, omega: &Vec2) -> f64 {
    let g = m.eval(x);
    2.0 * cut.psi.eval(x) * cut.phi.eval(x) * g.determinant().sqrt() / norm_g(&g, omega)
}

/// h(x, r, ω) = r·k(x, rω), with the stated limit at r = 0.
pub fn h_eval(m: &dyn MetricField, cut: &CutoffSpec, x: &Vec2, r: f64, omega: &Vec2) -> Result<f64> {
    if r < 0.0 {
        return Err(SymbolError::Settings(format!("negative radius {r}")));
    }
    let w = omega / omega.norm();
    if r == 0.0 {
        return Ok(h_limit(m, cut, x, &w));
    }
    Ok(r * kernel_eval(m, cut, x, &(w * r))?)
}

/// Fast evaluation of k(x, ·) and h(x, ·, ·) at a fixed center x, using a
/// geodesic fan for exp_x⁻¹ and shooting where the fan cannot resolve y.
pub struct KernelCenter<'a> {
    pub m: &'a dyn MetricField,
    pub cut: &'a CutoffSpec,
    pub x: Vec2,
    psi: f64,
    metric_x: gxr_geometry::Mat2,
    fan: Option<GeodesicFan>,
    fixed_steps: Option<usize>,
}

/// RK4 steps per shot in shooting mode; fixed so that h is smooth in r.
pub const SHOOT_STEPS: usize = 400;

/// Fan resolution used by `KernelCenter`.
pub const FAN_ANGLES: usize = 256;
pub const FAN_STEP: f64 = 0.01;

impl<'a> KernelCenter<'a> {
    pub fn new(m: &'a dyn MetricField, cut: &'a CutoffSpec, x: Vec2) -> Result<Self> {
        check_domain(m, &x)?;
        let psi = cut.psi.eval(&x);
        let fan = if m.is_flat() || psi == 0.0 {
            None
        } else {
            let r_stop = (cut.phi_support() + 0.05).min(m.domain_radius() - 1e-3);
            Some(GeodesicFan::build(m, x, FAN_ANGLES, FAN_STEP, r_stop)?)
        };
        Ok(Self { m, cut, x, psi, metric_x: m.eval(&x), fan, fixed_steps: None })
    }

    /// Only the shooting path (no fan), e.g. for derivative-sensitive uses.
    pub fn shooting(m: &'a dyn MetricField, cut: &'a CutoffSpec, x: Vec2) -> Result<Self> {
        check_domain(m, &x)?;
        Ok(Self { m, cut, x, psi: cut.psi.eval(&x), metric_x: m.eval(&x), fan: None, fixed_steps: Some(SHOOT_STEPS) })
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// |det dΦ| at y where Φ(t, θ) = exp_x(t g(x)^{-1/2}(cos θ, sin θ)).
    fn polar_det(&self, y: &Vec2) -> Result<f64> {
        if self.m.is_flat() {
            return Ok((y - self.x).norm());
        }
        if let Some(p) = self.fan.as_ref().and_then(|f| f.locate(y)) {
            return Ok(p.det.abs());
        }
        let l = match self.fixed_steps {
            Some(n) => log_map_steps(self.m, &self.x, y, n)?,
            None => log_map_full(self.m, &self.x, y)?,
        };
        let t = norm_g(&self.metric_x, &l.w);
        let e = inv_sqrtm(&self.metric_x);
        Ok((t * l.differential.determinant() * e.determinant()).abs())
    }

    /// k(x, z) = 2ψ(x)φ(y) / |det dΦ(y)|.
    pub fn k(&self, z: &Vec2) -> Result<f64> {
        if z.norm() == 0.0 {
            return Err(SymbolError::SingularPoint);
        }
        let y = self.x - z;
        let phi = self.cut.phi.eval(&y);
        if self.psi == 0.0 || phi == 0.0 {
            return Ok(0.0);
        }
        check_domain(self.m, &y)?;
        Ok(2.0 * self.psi * phi / self.polar_det(&y)?)
    }

    /// h(x, r, ω) for unit ω.
    pub fn h(&self, r: f64, omega: &Vec2) -> Result<f64> {
        if r == 0.0 {
            return Ok(h_limit(self.m, self.cut, &self.x, omega));
        }
        Ok(r * self.k(&(omega * r))?)
    }

    /// k₋₁(x, z) = |z|^{-1} h(x, 0, z/|z|).
    pub fn k_principal(&self, z: &Vec2) -> f64 {
        let r = z.norm();
        h_limit(self.m, self.cut, &self.x, &(z / r)) / r
    }
}

/// The near-diagonal cutoff χ(z): 1 for |z| ≤ 0.25, 0 for |z| ≥ 0.5.
pub fn default_chi() -> RadialCutoff {
    RadialCutoff::new(0.25, 0.5)
}

/// Central-difference step for ∂_r h.
pub fn dr_step(r: f64) -> f64 {
    1e-4 * (1.0 + r)
}

/// Number of Gauss–Legendre nodes in the remainder integral.
pub const REMAINDER_NODES: usize = 16;

/// Longest r-panel of the remainder quadrature.
pub const REMAINDER_PANEL: f64 = 0.1;

/// k(x, z), k₋₁(x, z), r(x, z) and h on a polar (ρ, ω) grid about x.
#[derive(Debug, Clone)]
pub struct KernelSlice {
    pub center: Vec2,
    pub rho: Vec<f64>,
    pub omega: Vec<f64>,
    /// Index l·n_omega + q.
    pub k: Vec<f64>,
    pub k_principal: Vec<f64>,
    pub remainder: Vec<f64>,
    pub h: Vec<f64>,
    pub chi: Vec<f64>,
}

impl KernelSlice {
    pub fn index(&self, l: usize, q: usize) -> usize {
        l * self.omega.len() + q
    }

    /// max |χk − χk₋₁ − χr| over the slice, excluding ρ = 0 where k is infinite.
    pub fn recomposition_defect(&self) -> f64 {
        (0..self.k.len())
            .filter(|&i| self.k[i].is_finite())
            .map(|i| (self.chi[i] * (self.k[i] - self.k_principal[i] - self.remainder[i])).abs())
            .fold(0.0, f64::max)
    }

    /// max |r| over nodes with ρ ≤ `radius`.
    pub fn remainder_bound(&self, radius: f64) -> f64 {
        let mut b: f64 = 0.0;
        for (l, r) in self.rho.iter().enumerate() {
            if *r <= radius {
                for q in 0..self.omega.len() {
                    b = b.max(self.remainder[self.index(l, q)].abs());
                }
            }
        }
        b
    }
}

/// r(x, z) = |z|^{2−n} ∫₀¹ ∂_r h(x, |z|t, ω) dt for n = 2, by composite
/// Gauss–Legendre with panels of length at most `REMAINDER_PANEL` in r.
pub fn remainder_eval(center: &KernelCenter, rho: f64, omega: &Vec2) -> Result<f64> {
    let panels = ((rho / REMAINDER_PANEL).ceil() as usize).max(1);
    let (ts, ws) = composite_gauss_legendre(REMAINDER_NODES, panels, 0.0, 1.0);
    let mut acc = 0.0;
    for (t, w) in ts.iter().zip(&ws) {
        let r = rho * t;
        let e = dr_step(r);
        // h(x, −s, ω) = h(x, s, −ω) extends h smoothly to negative r
        let hr = |d: f64| {
            let s = r + d * e;
            if s >= 0.0 {
                center.h(s, omega)
            } else {
                center.h(-s, &-omega)
            }
        };
        // fourth-order central difference
        let dh = (8.0 * (hr(1.0)? - hr(-1.0)?) - (hr(2.0)? - hr(-2.0)?)) / (12.0 * e);
        acc += w * dh;
    }
    Ok(acc)
}

/// Evaluate the decomposition k = k₋₁ + r on polar nodes about x by shooting.
pub fn split_kernel(
    m: &dyn MetricField,
    cut: &CutoffSpec,
    x: &Vec2,
    chi: &RadialCutoff,
    rho: &[f64],
    omega: &[f64],
) -> Result<KernelSlice> {
    let center = KernelCenter::shooting(m, cut, *x)?;
    let n = rho.len() * omega.len();
    let mut s = KernelSlice {
        center: *x,
        rho: rho.to_vec(),
        omega: omega.to_vec(),
        k: Vec::with_capacity(n),
        k_principal: Vec::with_capacity(n),
        remainder: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        chi: Vec::with_capacity(n),
    };
    for &r in rho {
        for &a in omega {
            let w = Vec2::new(a.cos(), a.sin());
            let z = w * r;
            let h = center.h(r, &w)?;
            s.h.push(h);
            s.chi.push(chi.radial(r));
            if r > 0.0 {
                s.k.push(h / r);
                s.k_principal.push(center.k_principal(&z));
            } else {
                s.k.push(f64::INFINITY);
                s.k_principal.push(f64::INFINITY);
            }
            s.remainder.push(remainder_eval(&center, r, &w)?);
        }
    }
    Ok(s)
}
