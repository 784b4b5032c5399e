//! The a priori smoothness gain of the bootstrap, made visible: for a rough
//! input f the iterates keep the regularity of f, while each correction
//! f_{m+1} − f_m ≈ −R(f_m − f) is smoother by the smoothing order of R.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use gxr_geometry::Vec2;
use gxr_parametrix::sobolev_from_spectrum;
use gxr_transform::{Field, GridSpec, RadialCutoff, ScalarGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ReconstructError, Result};
use crate::solver::Reconstructor;

/// Random Fourier series with |a_ξ| ~ |ξ|^{−(s₀+1)} on the lattice πZ² up to
/// `max_freq`, times a taper supported in |x| ≤ 0.55. Its H^s norm stays
/// bounded under growing `max_freq` only for s < s₀. Each mode's coefficient
/// depends only on the seed and the mode, so raising `max_freq` extends the
/// same series.
#[derive(Debug, Clone)]
pub struct RoughSeries {
    pub s0: f64,
    pub max_freq: f64,
    pub seed: u64,
    pub taper: RadialCutoff,
    modes: Vec<(Vec2, f64, f64)>,
}

impl RoughSeries {
    pub fn new(s0: f64, max_freq: f64, seed: u64) -> Self {
        let kmax = (max_freq / PI).floor() as i64;
        let mut modes = Vec::new();
        for kx in 0..=kmax {
            for ky in -kmax..=kmax {
                if kx == 0 && ky <= 0 {
                    continue;
                }
                let xi = Vec2::new(kx as f64, ky as f64) * PI;
                let r = xi.norm();
                if r > max_freq {
                    continue;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((kx as u64) << 32) | (ky + (1 << 31)) as u64);
                let amp = rng.gen_range(0.5..1.5) * r.powf(-(s0 + 1.0));
                modes.push((xi, amp, rng.gen_range(0.0..TAU)));
            }
        }
        Self { s0, max_freq, seed, taper: RadialCutoff::new(0.4, 0.55), modes }
    }

    /// Truncated at a quarter of the grid's Nyquist frequency, where the
    /// discrete operators are accurate.
    pub fn for_grid(spec: &GridSpec, s0: f64, seed: u64) -> Self {
        Self::new(s0, 0.25 * PI / spec.h, seed)
    }

    pub fn modes(&self) -> usize {
        self.modes.len()
    }
}

impl Field for RoughSeries {
    fn value(&self, x: &Vec2) -> f64 {
        let w = self.taper.eval(x);
        if w == 0.0 {
            return 0.0;
        }
        w * self.modes.iter().map(|(xi, a, ph)| a * (xi.dot(x) + ph).cos()).sum::<f64>()
    }

    fn support_radius(&self) -> Option<f64> {
        Some(self.taper.r_out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub sobolev_t: Vec<f64>,
    /// Frequency range |ξ| of the shells used for index fits.
    pub band: (f64, f64),
    /// Smooth window applied before every profile.
    pub window: RadialCutoff,
    pub input: Vec<f64>,
    /// ‖f_m‖_{H^t}; f_0 = P d.
    pub iterates: Vec<Vec<f64>>,
    /// ‖f_{m+1} − f_m‖_{H^t}.
    pub corrections: Vec<Vec<f64>>,
    pub input_index: f64,
    pub iterate_index: Vec<f64>,
    pub correction_index: Vec<f64>,
}

impl RegularityReport {
    /// Regularity index of f_m minus that of f.
    pub fn shift(&self) -> Vec<f64> {
        self.iterate_index.iter().map(|s| s - self.input_index).collect()
    }

    /// Regularity index of the m-th correction minus that of f.
    pub fn gain(&self) -> Vec<f64> {
        self.correction_index.iter().map(|s| s - self.input_index).collect()
    }

    /// Header `stage,index,h<t>...`; stages are `input`, `iterate<m>`, `correction<m>`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("stage,index");
        for t in &self.sobolev_t {
            let _ = write!(s, ",h{t}");
        }
        s.push('\n');
        let mut row = |name: String, idx: f64, vals: &[f64]| {
            let _ = write!(s, "{name},{idx:.6e}");
            for v in vals {
                let _ = write!(s, ",{v:.12e}");
            }
            s.push('\n');
        };
        row("input".into(), self.input_index, &self.input);
        for (m, (v, i)) in self.iterates.iter().zip(&self.iterate_index).enumerate() {
            row(format!("iterate{m}"), *i, v);
        }
        for (m, (v, i)) in self.corrections.iter().zip(&self.correction_index).enumerate() {
            row(format!("correction{m}"), *i, v);
        }
        s
    }
}

/// Shells per octave in index fits.
const SHELLS_PER_OCTAVE: f64 = 4.0;

/// Profile of g: H^t norms and the regularity index s fitted to shell
/// energies E(a) ~ a^{−2s} over geometric shells [a, 2^{1/4}a) inside `band`.
fn profile(r: &Reconstructor<'_>, g: &ScalarGrid, opts: &RegularityOptions) -> Result<(Vec<f64>, f64)> {
    let grid = &r.parametrix.grid;
    let band = opts.band;
    let ghat = grid.forward(&g.map(|x, v| opts.window.eval(x) * v))?;
    let norms = r.settings.sobolev_t.iter().map(|&t| sobolev_from_spectrum(grid, &ghat, t)).collect();
    let shells = if band.0 > 0.0 && band.1 > band.0 {
        ((band.1 / band.0).log2() * SHELLS_PER_OCTAVE + 1e-9).floor() as usize
    } else {
        0
    };
    let mut energy = vec![0.0; shells];
    for (k, v) in ghat.iter().enumerate() {
        let q = (grid.xi(k).norm() / band.0).log2() * SHELLS_PER_OCTAVE;
        if q >= 0.0 && (q as usize) < shells {
            energy[q as usize] += v.norm_sqr();
        }
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (b, e) in energy.iter().enumerate() {
        if *e > 0.0 {
            xs.push((b as f64 + 0.5) / SHELLS_PER_OCTAVE);
            ys.push(e.log2());
        }
    }
    if xs.len() < 2 {
        return Err(ReconstructError::Settings(format!(
            "fewer than two frequency shells inside |xi| in [{:.3}, {:.3}]",
            band.0, band.1
        )));
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok((norms, -0.5 * sxy / sxx))
}

/// Controls of `regularity_gain_demo`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityOptions {
    pub iterations: usize,
    /// Frequency range |ξ| of the shells used for index fits.
    pub band: (f64, f64),
    /// Profiles are local: the restriction of each iterate to Ω leaves a jump
    /// of size |Rf| on ∂Ω, which is not part of the gain being measured.
    pub window: RadialCutoff,
}

impl RegularityOptions {
    /// Shells from 2π (above the ζ ramp) to the series' top frequency.
    pub fn for_series(series: &RoughSeries, iterations: usize) -> Self {
        Self { iterations, band: (TAU, series.max_freq), window: RadialCutoff::new(0.4, 0.5) }
    }
}

/// Run corrections on exact data d = N f and compare the localized Sobolev
/// profiles of f, f_0 = P d, the iterates and the corrections.
pub fn regularity_gain_demo(r: &Reconstructor<'_>, f: &ScalarGrid, opts: &RegularityOptions) -> Result<RegularityReport> {
    let iterations = opts.iterations;
    let d = r.forward(f)?;
    let (input, input_index) = profile(r, f, opts)?;
    let mut fm = r.model.restrict(&r.parametrix.apply(&d)?);
    let mut report = RegularityReport {
        sobolev_t: r.settings.sobolev_t.clone(),
        band: opts.band,
        window: opts.window.clone(),
        input,
        iterates: Vec::new(),
        corrections: Vec::new(),
        input_index,
        iterate_index: Vec::new(),
        correction_index: Vec::new(),
    };
    for m in 0..=iterations {
        let (p, s) = profile(r, &fm, opts)?;
        report.iterates.push(p);
        report.iterate_index.push(s);
        if m == iterations {
            break;
        }
        let (next, _) = r.step(&fm, &d)?;
        let (p, s) = profile(r, &next.sub(&fm), opts)?;
        report.corrections.push(p);
        report.correction_index.push(s);
        fm = next;
    }
    Ok(report)
}
