//! Symbols p(x, ξ), the frequency cutoff ζ and the parametrix symbol
//! p(x, ξ) = C⁻¹ ζ(ξ) |ξ|_{g(x)}.

use std::collections::HashMap;
use std::sync::Mutex;

use gxr_geometry::{conorm_g, MetricField, Vec2};
use gxr_kernel_symbol::{hankel_chi, principal_symbol};
use gxr_transform::{CutoffSpec, RadialCutoff};

use crate::error::{ParametrixError, Result};

/// One term w(x) q(ξ) of a separable symbol; `weight: None` means w ≡ 1.
pub struct SeparableTerm<'a> {
    pub weight: Option<Box<dyn Fn(&Vec2) -> f64 + Sync + 'a>>,
    pub multiplier: Box<dyn Fn(&Vec2) -> f64 + Sync + 'a>,
}

/// A real symbol p(x, ξ).
pub trait Symbol: Sync {
    fn eval(&self, x: &Vec2, xi: &Vec2) -> f64;

    /// p(x, ·) with the per-x work done once.
    fn at<'a>(&'a self, x: &Vec2) -> Box<dyn Fn(&Vec2) -> f64 + 'a> {
        let x = *x;
        Box::new(move |xi| self.eval(&x, xi))
    }

    /// A finite form p(x, ξ) = Σ w_l(x) q_l(ξ), when one is known.
    fn separable(&self) -> Option<Vec<SeparableTerm<'_>>> {
        None
    }
}

/// x-independent symbol q(ξ).
pub struct Multiplier<F>(pub F);

impl<F: Fn(&Vec2) -> f64 + Sync> Symbol for Multiplier<F> {
    fn eval(&self, _x: &Vec2, xi: &Vec2) -> f64 {
        (self.0)(xi)
    }
    fn separable(&self) -> Option<Vec<SeparableTerm<'_>>> {
        Some(vec![SeparableTerm { weight: None, multiplier: Box::new(|xi| (self.0)(xi)) }])
    }
}

/// General symbol from a closure, applied by direct summation.
pub struct FnSymbol<F>(pub F);

impl<F: Fn(&Vec2, &Vec2) -> f64 + Sync> Symbol for FnSymbol<F> {
    fn eval(&self, x: &Vec2, xi: &Vec2) -> f64 {
        (self.0)(x, xi)
    }
}

/// Ramp of ζ in lattice spacings 2π/L of the padded FFT box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaShells {
    pub inner: f64,
    pub outer: f64,
}

impl Default for ZetaShells {
    fn default() -> Self {
        Self { inner: 2.0, outer: 4.0 }
    }
}

impl ZetaShells {
    pub fn cutoff(&self, side: f64) -> ZetaCutoff {
        let d = std::f64::consts::TAU / side;
        ZetaCutoff::new(self.inner * d, self.outer * d)
    }
}

/// ζ(ξ): 0 for |ξ| ≤ r_in, 1 for |ξ| ≥ r_out, smooth in between.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaCutoff {
    pub ramp: RadialCutoff,
}

impl ZetaCutoff {
    pub fn new(r_in: f64, r_out: f64) -> Self {
        Self { ramp: RadialCutoff::new(r_in, r_out) }
    }

    /// Ramp from 2 to 4 lattice spacings of a periodic box of side `side`.
    pub fn for_box(side: f64) -> Self {
        ZetaShells::default().cutoff(side)
    }

    pub fn eval(&self, xi: &Vec2) -> f64 {
        1.0 - self.ramp.radial(xi.norm())
    }
}

/// p(x, ξ) = ζ(ξ)|ξ|_{g(x)} / C with the cotangent norm |ξ|_g = (g⁻¹(x)[ξ, ξ])^{1/2}.
pub fn parametrix_symbol(m: &dyn MetricField, constant: f64, zeta: &ZetaCutoff, x: &Vec2, xi: &Vec2) -> f64 {
    let z = zeta.eval(xi);
    if z == 0.0 {
        return 0.0;
    }
    z * conorm_g(&m.eval(x), xi) / constant
}

fn check_constant(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(ParametrixError::Calibration(c))
    }
}

/// The parametrix symbol as a `Symbol`.
pub struct ParametrixSymbol<'a> {
    pub metric: &'a dyn MetricField,
    pub constant: f64,
    pub zeta: ZetaCutoff,
}

impl<'a> ParametrixSymbol<'a> {
    pub fn new(metric: &'a dyn MetricField, constant: f64, zeta: ZetaCutoff) -> Result<Self> {
        check_constant(constant)?;
        Ok(Self { metric, constant, zeta })
    }

    fn conformal(&self) -> bool {
        self.metric.conformal_factor(&Vec2::zeros()).is_some()
    }
}

impl Symbol for ParametrixSymbol<'_> {
    fn eval(&self, x: &Vec2, xi: &Vec2) -> f64 {
        parametrix_symbol(self.metric, self.constant, &self.zeta, x, xi)
    }

    fn at<'b>(&'b self, x: &Vec2) -> Box<dyn Fn(&Vec2) -> f64 + 'b> {
        let ginv = self.metric.eval(x).try_inverse().unwrap_or_else(gxr_geometry::Mat2::identity);
        Box::new(move |xi| {
            let z = self.zeta.eval(xi);
            if z == 0.0 {
                0.0
            } else {
                z * xi.dot(&(ginv * xi)).sqrt() / self.constant
            }
        })
    }

    /// For g = cI: p = (C√c(x))⁻¹ · ζ(ξ)|ξ|.
    fn separable(&self) -> Option<Vec<SeparableTerm<'_>>> {
        if !self.conformal() {
            return None;
        }
        Some(vec![SeparableTerm {
            weight: Some(Box::new(|x| {
                let c = self.metric.conformal_factor(x).unwrap_or(1.0);
                1.0 / (self.constant * c.sqrt())
            })),
            multiplier: Box::new(|xi| self.zeta.eval(xi) * xi.norm()),
        }])
    }
}

/// p·a₋₁, the parametrix times the principal symbol of ψNφ.
pub struct PrincipalProduct<'a> {
    pub parametrix: ParametrixSymbol<'a>,
    pub cut: CutoffSpec,
    pub chi: RadialCutoff,
    hankel: Mutex<HashMap<u64, f64>>,
}

impl<'a> PrincipalProduct<'a> {
    pub fn new(parametrix: ParametrixSymbol<'a>, cut: CutoffSpec, chi: RadialCutoff) -> Self {
        Self { parametrix, cut, chi, hankel: Mutex::new(HashMap::new()) }
    }

    /// I(s) = ∫ χ(ρ) J₀(ρs) dρ, memoized on s.
    fn hankel(&self, s: f64) -> f64 {
        let key = s.to_bits();
        if let Some(v) = self.hankel.lock().map(|c| c.get(&key).copied()).ok().flatten() {
            return v;
        }
        let v = hankel_chi(&self.chi, s);
        if let Ok(mut c) = self.hankel.lock() {
            c.insert(key, v);
        }
        v
    }
}

impl Symbol for PrincipalProduct<'_> {
    fn eval(&self, x: &Vec2, xi: &Vec2) -> f64 {
        if xi.norm() == 0.0 {
            return 0.0;
        }
        let p = self.parametrix.eval(x, xi);
        if p == 0.0 {
            return 0.0;
        }
        let m = self.parametrix.metric;
        p * principal_symbol(m, &self.cut, &self.chi, x, xi, self.parametrix.constant).unwrap_or(0.0)
    }

    /// For g = cI, a₋₁ = ψφ√c·((C − 4π)/s + 4π I(s)) with s = |ξ|, so
    /// p·a₋₁ = ψφ(x) · ζ(ξ)((C − 4π) + 4π s I(s)) / C.
    fn separable(&self) -> Option<Vec<SeparableTerm<'_>>> {
        if !self.parametrix.conformal() {
            return None;
        }
        let c = self.parametrix.constant;
        let four_pi = 2.0 * std::f64::consts::TAU;
        Some(vec![SeparableTerm {
            weight: Some(Box::new(|x| self.cut.psi.eval(x) * self.cut.phi.eval(x))),
            multiplier: Box::new(move |xi| {
                let z = self.parametrix.zeta.eval(xi);
                if z == 0.0 {
                    return 0.0;
                }
                let s = xi.norm();
                z * ((c - four_pi) + four_pi * s * self.hankel(s)) / c
            }),
        }])
    }
}
