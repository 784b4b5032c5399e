//! Riemannian metrics on an extension of the closed unit disk.
//!
//! A metric only has to provide `eval`; derivatives fall back to central
//! differences. The conformal families below supply analytic first and
//! second derivatives, which the geodesic and Jacobi integrators use.

use nalgebra::{Matrix2, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Default extension margin: the metric is defined on the ball of radius `1 + DEFAULT_MARGIN`.
pub const DEFAULT_MARGIN: f64 = 0.25;

/// Finite-difference step used when a metric has no analytic derivative.
pub const FD_STEP: f64 = 1e-5;

pub trait MetricField: Send + Sync {
    /// Metric tensor g(x).
    fn eval(&self, x: &Vec2) -> Mat2;

    /// `[∂_1 g, ∂_2 g]` at x.
    fn deriv(&self, x: &Vec2) -> [Mat2; 2] {
        let mut out = [Mat2::zeros(); 2];
        for (m, slot) in out.iter_mut().enumerate() {
            let mut e = Vec2::zeros();
            e[m] = FD_STEP;
            *slot = (self.eval(&(x + e)) - self.eval(&(x - e))) / (2.0 * FD_STEP);
        }
        out
    }

    /// Regularity class C^k; `None` for C^∞.
    fn regularity(&self) -> Option<u32>;

    /// Extension margin δ_ext.
    fn margin(&self) -> f64 {
        DEFAULT_MARGIN
    }

    fn domain_radius(&self) -> f64 {
        1.0 + self.margin()
    }

    fn dimension(&self) -> usize {
        2
    }

    fn name(&self) -> String;

    /// True when g ≡ Id, enabling straight-line fast paths.
    fn is_flat(&self) -> bool {
        false
    }

    /// Some(c(x)) when g(x) = c(x)·Id.
    fn conformal_factor(&self, _x: &Vec2) -> Option<f64> {
        None
    }

    /// Christoffel symbols, `gamma[i][(j, k)] = Γ^i_{jk}`.
    fn christoffel(&self, x: &Vec2) -> [Mat2; 2] {
        let g = self.eval(x);
        let gi = g.try_inverse().expect("metric must be positive definite");
        let dg = self.deriv(x);
        let mut lower = [Mat2::zeros(); 2];
        for (l, low) in lower.iter_mut().enumerate() {
            for j in 0..2 {
                for k in 0..2 {
                    low[(j, k)] = 0.5 * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)]);
                }
            }
        }
        let mut gamma = [Mat2::zeros(); 2];
        for (i, gam) in gamma.iter_mut().enumerate() {
            *gam = gi[(i, 0)] * lower[0] + gi[(i, 1)] * lower[1];
        }
        gamma
    }

    /// Geodesic acceleration −Γ(v, v).
    fn accel(&self, x: &Vec2, v: &Vec2) -> Vec2 {
        let gamma = self.christoffel(x);
        Vec2::new(-v.dot(&(gamma[0] * v)), -v.dot(&(gamma[1] * v)))
    }

    /// Jacobians of the geodesic acceleration with respect to x and v.
    fn accel_jacobians(&self, x: &Vec2, v: &Vec2) -> (Mat2, Mat2) {
        let h = 1e-6;
        let mut ax = Mat2::zeros();
        for m in 0..2 {
            let mut e = Vec2::zeros();
            e[m] = h;
            let col = (self.accel(&(x + e), v) - self.accel(&(x - e), v)) / (2.0 * h);
            ax.set_column(m, &col);
        }
        let gamma = self.christoffel(x);
        let mut av = Mat2::zeros();
        for i in 0..2 {
            let row = -2.0 * (gamma[i] * v);
            av[(i, 0)] = row[0];
            av[(i, 1)] = row[1];
        }
        (ax, av)
    }
}

/// Scalar conformal factor c with analytic gradient and Hessian.
pub trait ConformalFactor: Send + Sync {
    fn value(&self, x: &Vec2) -> f64;
    fn gradient(&self, x: &Vec2) -> Vec2;
    fn hessian(&self, x: &Vec2) -> Mat2;
    fn regularity(&self) -> Option<u32>;
    fn name(&self) -> String;
}

/// g(x) = c(x)·Id.
#[derive(Debug, Clone)]
pub struct Conformal<F> {
    pub factor: F,
    pub margin: f64,
}

impl<F: ConformalFactor> Conformal<F> {
    pub fn new(factor: F) -> Self {
        Self { factor, margin: DEFAULT_MARGIN }
    }

    /// Gradient and Hessian of u = ½ ln c.
    fn log_derivs(&self, x: &Vec2) -> (Vec2, Mat2) {
        let c = self.factor.value(x);
        let gc = self.factor.gradient(x);
        let hc = self.factor.hessian(x);
        let gu = gc / (2.0 * c);
        let hu = hc / (2.0 * c) - gc * gc.transpose() / (2.0 * c * c);
        (gu, hu)
    }
}

impl<F: ConformalFactor> MetricField for Conformal<F> {
    fn eval(&self, x: &Vec2) -> Mat2 {
        Mat2::identity() * self.factor.value(x)
    }

    fn deriv(&self, x: &Vec2) -> [Mat2; 2] {
        let gc = self.factor.gradient(x);
        [Mat2::identity() * gc[0], Mat2::identity() * gc[1]]
    }

    fn regularity(&self) -> Option<u32> {
        self.factor.regularity()
    }

    fn margin(&self) -> f64 {
        self.margin
    }

    fn name(&self) -> String {
        self.factor.name()
    }

    fn conformal_factor(&self, x: &Vec2) -> Option<f64> {
        Some(self.factor.value(x))
    }

    fn christoffel(&self, x: &Vec2) -> [Mat2; 2] {
        // Γ^i_jk = δ^i_j u_k + δ^i_k u_j − δ_jk u_i
        let (gu, _) = self.log_derivs(x);
        let mut gamma = [Mat2::zeros(); 2];
        for (i, gam) in gamma.iter_mut().enumerate() {
            for j in 0..2 {
                for k in 0..2 {
                    let mut s = 0.0;
                    if i == j {
                        s += gu[k];
                    }
                    if i == k {
                        s += gu[j];
                    }
                    if j == k {
                        s -= gu[i];
                    }
                    gam[(j, k)] = s;
                }
            }
        }
        gamma
    }

    fn accel(&self, x: &Vec2, v: &Vec2) -> Vec2 {
        let (gu, _) = self.log_derivs(x);
        -(2.0 * v.dot(&gu) * v - v.norm_squared() * gu)
    }

    fn accel_jacobians(&self, x: &Vec2, v: &Vec2) -> (Mat2, Mat2) {
        let (gu, hu) = self.log_derivs(x);
        let vv = v.norm_squared();
        let ax = -(2.0 * v * (hu * v).transpose() - vv * hu);
        let av = -(2.0 * v * gu.transpose() + 2.0 * v.dot(&gu) * Mat2::identity()
            - 2.0 * gu * v.transpose());
        (ax, av)
    }
}

/// g = Id.
#[derive(Debug, Clone, Default)]
pub struct Euclidean {
    pub margin: Option<f64>,
}

impl MetricField for Euclidean {
    fn eval(&self, _x: &Vec2) -> Mat2 {
        Mat2::identity()
    }
    fn deriv(&self, _x: &Vec2) -> [Mat2; 2] {
        [Mat2::zeros(); 2]
    }
    fn regularity(&self) -> Option<u32> {
        None
    }
    fn margin(&self) -> f64 {
        self.margin.unwrap_or(DEFAULT_MARGIN)
    }
    fn name(&self) -> String {
        "euclidean".into()
    }
    fn is_flat(&self) -> bool {
        true
    }
    fn conformal_factor(&self, _x: &Vec2) -> Option<f64> {
        Some(1.0)
    }
    fn christoffel(&self, _x: &Vec2) -> [Mat2; 2] {
        [Mat2::zeros(); 2]
    }
    fn accel(&self, _x: &Vec2, _v: &Vec2) -> Vec2 {
        Vec2::zeros()
    }
    fn accel_jacobians(&self, _x: &Vec2, _v: &Vec2) -> (Mat2, Mat2) {
        (Mat2::zeros(), Mat2::zeros())
    }
}

/// c(x) = 1 + ε·exp(−|x|²).
#[derive(Debug, Clone, Copy)]
pub struct GaussianBump {
    pub epsilon: f64,
}

impl ConformalFactor for GaussianBump {
    fn value(&self, x: &Vec2) -> f64 {
        1.0 + self.epsilon * (-x.norm_squared()).exp()
    }
    fn gradient(&self, x: &Vec2) -> Vec2 {
        -2.0 * self.epsilon * (-x.norm_squared()).exp() * x
    }
    fn hessian(&self, x: &Vec2) -> Mat2 {
        let e = self.epsilon * (-x.norm_squared()).exp();
        e * (4.0 * x * x.transpose() - 2.0 * Mat2::identity())
    }
    fn regularity(&self) -> Option<u32> {
        None
    }
    fn name(&self) -> String {
        format!("gaussian(eps={})", self.epsilon)
    }
}

/// c(x) = 4 / (1 + K|x|²)², the stereographic model of curvature K.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCurvature {
    pub curvature: f64,
}

impl ConstantCurvature {
    /// Radius of the unit coordinate circle measured in the metric.
    pub fn boundary_distance(&self) -> f64 {
        let k = self.curvature;
        if k > 0.0 {
            2.0 * k.sqrt().atan() / k.sqrt()
        } else if k < 0.0 {
            2.0 * (-k).sqrt().atanh() / (-k).sqrt()
        } else {
            2.0
        }
    }
}

impl ConformalFactor for ConstantCurvature {
    fn value(&self, x: &Vec2) -> f64 {
        let q = 1.0 + self.curvature * x.norm_squared();
        4.0 / (q * q)
    }
    fn gradient(&self, x: &Vec2) -> Vec2 {
        let q = 1.0 + self.curvature * x.norm_squared();
        -16.0 * self.curvature * x / (q * q * q)
    }
    fn hessian(&self, x: &Vec2) -> Mat2 {
        let k = self.curvature;
        let q = 1.0 + k * x.norm_squared();
        -16.0 * k * (Mat2::identity() / q.powi(3) - 6.0 * k * x * x.transpose() / q.powi(4))
    }
    fn regularity(&self) -> Option<u32> {
        None
    }
    fn name(&self) -> String {
        format!("constant_curvature(K={})", self.curvature)
    }
}

/// c(x) = 1 + ε·max(0, 1 − |x − x₀|²)^(k + 1/2): exactly C^k, not C^(k+1).
#[derive(Debug, Clone, Copy)]
pub struct FiniteRegularity {
    pub k: u32,
    pub epsilon: f64,
    pub center: Vec2,
}

impl FiniteRegularity {
    fn power(&self) -> f64 {
        self.k as f64 + 0.5
    }
}

impl ConformalFactor for FiniteRegularity {
    fn value(&self, x: &Vec2) -> f64 {
        let u = 1.0 - (x - self.center).norm_squared();
        if u <= 0.0 {
            1.0
        } else {
            1.0 + self.epsilon * u.powf(self.power())
        }
    }
    fn gradient(&self, x: &Vec2) -> Vec2 {
        let d = x - self.center;
        let u = 1.0 - d.norm_squared();
        if u <= 0.0 {
            return Vec2::zeros();
        }
        let p = self.power();
        -2.0 * self.epsilon * p * u.powf(p - 1.0) * d
    }
    fn hessian(&self, x: &Vec2) -> Mat2 {
        let d = x - self.center;
        let u = 1.0 - d.norm_squared();
        if u <= 0.0 {
            return Mat2::zeros();
        }
        let p = self.power();
        self.epsilon
            * (4.0 * p * (p - 1.0) * u.powf(p - 2.0) * d * d.transpose()
                - 2.0 * p * u.powf(p - 1.0) * Mat2::identity())
    }
    fn regularity(&self) -> Option<u32> {
        Some(self.k)
    }
    fn name(&self) -> String {
        format!(
            "finite_regularity(k={}, eps={}, x0=({}, {}))",
            self.k, self.epsilon, self.center[0], self.center[1]
        )
    }
}

/// Named metric families selectable from configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricFamily {
    Euclidean,
    Gaussian { epsilon: f64 },
    ConstantCurvature { curvature: f64 },
    FiniteRegularity { k: u32, epsilon: f64, center: [f64; 2] },
}

impl MetricFamily {
    pub fn build(&self) -> Box<dyn MetricField> {
        match *self {
            MetricFamily::Euclidean => Box::new(Euclidean::default()),
            MetricFamily::Gaussian { epsilon } => Box::new(Conformal::new(GaussianBump { epsilon })),
            MetricFamily::ConstantCurvature { curvature } => {
                Box::new(Conformal::new(ConstantCurvature { curvature }))
            }
            MetricFamily::FiniteRegularity { k, epsilon, center } => {
                Box::new(Conformal::new(FiniteRegularity {
                    k,
                    epsilon,
                    center: Vec2::new(center[0], center[1]),
                }))
            }
        }
    }
}

pub fn sqrt_det(g: &Mat2) -> f64 {
    g.determinant().sqrt()
}

/// |v|_g.
pub fn norm_g(g: &Mat2, v: &Vec2) -> f64 {
    v.dot(&(g * v)).sqrt()
}

/// Cotangent norm |ξ|_{g} = sqrt(g⁻¹[ξ, ξ]).
pub fn conorm_g(g: &Mat2, xi: &Vec2) -> f64 {
    let gi = g.try_inverse().expect("metric must be positive definite");
    xi.dot(&(gi * xi)).sqrt()
}

/// Symmetric square root of a 2×2 SPD matrix.
pub fn sqrtm(g: &Mat2) -> Mat2 {
    let s = g.determinant().sqrt();
    let t = (g.trace() + 2.0 * s).sqrt();
    (g + Mat2::identity() * s) / t
}

/// g^{-1/2}: maps Euclidean unit vectors to g-unit vectors.
pub fn inv_sqrtm(g: &Mat2) -> Mat2 {
    sqrtm(g).try_inverse().expect("metric must be positive definite")
}

/// Smallest eigenvalue of g over a polar sample of the extended ball.
pub fn sampled_min_eigenvalue(m: &dyn MetricField, n_radial: usize, n_angular: usize) -> f64 {
    let rmax = m.domain_radius();
    let mut lam = f64::INFINITY;
    for i in 0..=n_radial {
        let r = rmax * i as f64 / n_radial as f64;
        for j in 0..n_angular {
            let a = std::f64::consts::TAU * j as f64 / n_angular as f64;
            let g = m.eval(&Vec2::new(r * a.cos(), r * a.sin()));
            let e = g.symmetric_eigenvalues();
            lam = lam.min(e[0].min(e[1]));
        }
    }
    lam
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Generic<M: MetricField>(M);
    impl<M: MetricField> MetricField for Generic<M> {
        fn eval(&self, x: &Vec2) -> Mat2 {
            self.0.eval(x)
        }
        fn regularity(&self) -> Option<u32> {
            None
        }
        fn name(&self) -> String {
            "generic".into()
        }
    }

    #[test]
    fn conformal_christoffel_matches_generic_formula() {
        let m = Conformal::new(GaussianBump { epsilon: 0.3 });
        let g = Generic(m.clone());
        let x = Vec2::new(0.3, -0.2);
        let a = m.christoffel(&x);
        let b = g.christoffel(&x);
        for i in 0..2 {
            assert!((a[i] - b[i]).abs().max() < 1e-8, "{} vs {}", a[i], b[i]);
        }
        let v = Vec2::new(0.7, 0.4);
        assert!((m.accel(&x, &v) - g.accel(&x, &v)).norm() < 1e-8);
    }

    #[test]
    fn conformal_accel_jacobians_match_finite_differences() {
        let fams = [
            MetricFamily::Gaussian { epsilon: 0.2 },
            MetricFamily::ConstantCurvature { curvature: 0.5 },
            MetricFamily::FiniteRegularity { k: 4, epsilon: 0.3, center: [0.2, 0.1] },
        ];
        for f in fams {
            let m = f.build();
            let x = Vec2::new(-0.25, 0.4);
            let v = Vec2::new(0.3, -0.9);
            let (ax, av) = m.accel_jacobians(&x, &v);
            let h = 1e-6;
            for c in 0..2 {
                let mut e = Vec2::zeros();
                e[c] = h;
                let dx = (m.accel(&(x + e), &v) - m.accel(&(x - e), &v)) / (2.0 * h);
                let dv = (m.accel(&x, &(v + e)) - m.accel(&x, &(v - e))) / (2.0 * h);
                assert!((ax.column(c) - dx).norm() < 1e-6, "{}", m.name());
                assert!((av.column(c) - dv).norm() < 1e-6, "{}", m.name());
            }
        }
    }

    #[test]
    fn analytic_gradient_and_hessian_match_differences() {
        let f = FiniteRegularity { k: 3, epsilon: 0.4, center: Vec2::new(0.1, -0.2) };
        let x = Vec2::new(0.35, 0.2);
        let h = 1e-5;
        for c in 0..2 {
            let mut e = Vec2::zeros();
            e[c] = h;
            let d = (f.value(&(x + e)) - f.value(&(x - e))) / (2.0 * h);
            assert!((d - f.gradient(&x)[c]).abs() < 1e-8);
            let dg = (f.gradient(&(x + e)) - f.gradient(&(x - e))) / (2.0 * h);
            assert!((dg - f.hessian(&x).column(c)).norm() < 1e-6);
        }
    }

    #[test]
    fn finite_regularity_is_flat_outside_its_ball() {
        let f = FiniteRegularity { k: 10, epsilon: 0.5, center: Vec2::new(0.3, 0.0) };
        let x = Vec2::new(-0.8, 0.0);
        assert_eq!(f.value(&x), 1.0);
        assert_eq!(f.gradient(&x), Vec2::zeros());
    }

    #[test]
    fn matrix_square_roots() {
        let g = Mat2::new(2.0, 0.3, 0.3, 1.5);
        let s = sqrtm(&g);
        assert!((s * s - g).abs().max() < 1e-13);
        let e = inv_sqrtm(&g);
        assert!((e * g * e - Mat2::identity()).abs().max() < 1e-13);
    }

    #[test]
    fn min_eigenvalue_of_gaussian_family_is_one() {
        let m = MetricFamily::Gaussian { epsilon: 0.2 }.build();
        let lam = sampled_min_eigenvalue(m.as_ref(), 8, 16);
        assert!(lam >= 1.0 && lam < 1.1);
    }
}
