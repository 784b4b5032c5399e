//! Gauss–Legendre rules and the Bessel function J₀.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    (x.iter().map(|t| c + r * t).collect(), w.iter().map(|v| v * r).collect())
}

/// Composite Gauss–Legendre rule with `panels` equal panels on [a, b].
pub fn composite_gauss_legendre(n: usize, panels: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let len = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(n * panels);
    let mut ws = Vec::with_capacity(n * panels);
    for p in 0..panels {
        let lo = a + len * p as f64;
        for k in 0..n {
            xs.push(lo + 0.5 * len * (x[k] + 1.0));
            ws.push(0.5 * len * w[k]);
        }
    }
    (xs, ws)
}

/// J₀(x) = (1/π) ∫₀^π cos(x sin t) dt by the trapezoid rule, which is
/// spectrally accurate for this periodic integrand once the node count
/// exceeds roughly |x|/2.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    let m = (0.5 * ax + 6.0 * ax.cbrt() + 24.0).ceil() as usize;
    let h = PI / m as f64;
    let mut s = 0.5 * (1.0 + 1.0);
    for k in 1..m {
        s += (ax * (h * k as f64).sin()).cos();
    }
    s / m as f64
}
