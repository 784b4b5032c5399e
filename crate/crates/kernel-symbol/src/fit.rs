//! Log-log regression helpers.

use crate::error::{Result, SymbolError};

/// Least-squares line log y = slope·log x + intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl PowerFit {
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Fit y ∼ C x^slope on positive data.
pub fn power_fit(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return Err(SymbolError::FitRange(format!("{} positive points", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SymbolError::FitRange("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(PowerFit { slope, intercept, r_squared, points: pts.len() })
}

/// Slope of the upper envelope of oscillating |f(s)| over [lo, hi]: at 16
/// geometric points s_i, take max |f| over samples in [s_i, 1.3 s_i].
pub fn envelope_fit(samples: &[(f64, f64)], lo: f64, hi: f64) -> Result<PowerFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..16 {
        let s = lo * (hi / lo).powf(i as f64 / 15.0);
        let env = samples.iter().filter(|(x, _)| *x >= s && *x <= 1.3 * s).map(|(_, y)| y.abs()).fold(0.0, f64::max);
        if env > 0.0 {
            xs.push(s);
            ys.push(env);
        }
    }
    power_fit(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.7)).collect();
        let f = power_fit(&xs, &ys).unwrap();
        assert!((f.slope + 1.7).abs() < 1e-12);
        assert!((f.constant() - 3.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_ignores_oscillation_zeros() {
        let samples: Vec<(f64, f64)> = (0..4000)
            .map(|i| {
                let s = 10.0 * 1.001f64.powi(i);
                (s, s.powf(-3.0) * (s).cos())
            })
            .collect();
        let f = envelope_fit(&samples, 20.0, 200.0).unwrap();
        assert!((f.slope + 3.0).abs() < 0.1, "{}", f.slope);
    }
}
