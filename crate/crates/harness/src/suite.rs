//! The property suite: one runner per acceptance criterion.
//!
//! Runners never fail; an error from a module becomes a failing check. Wall
//! time is reported but kept out of every CSV so that outputs depend only on
//! the configuration.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::time::Instant;

use gxr_geometry::{check_simplicity, conorm_g, Euclidean, FanBeam, MetricFamily, MetricField, Vec2};
use gxr_kernel_symbol::{
    b_symbol, envelope_fit, power_fit, principal_symbol, seminorm_check, symbol_fft, FftSettings, FrequencyGrid,
    SymbolDecomposition, DEFAULT_BAND,
};
use gxr_parametrix::{residual, smoothing_order, FourierGrid, ResidualSettings, SmoothingSettings, WavePacket, ZetaShells};
use gxr_reconstruct::{injectivity_probe, Reconstructor, SolverSettings};
use gxr_transform::{
    normal_compose, normal_kernel, verify_normal_identity, xray, BandLimited, CutoffSpec, DiskIndicator, Field, Gaussian,
    GridSpec, NormalRoute, NormalSettings, RadialCutoff, RaySettings, ScalarGrid, SinogramGrid, SinogramSettings,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::artifacts::Table;
use crate::config::{ExperimentConfig, FamilyName};

/// One pass/fail measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    /// Human-readable acceptance rule, e.g. `< 1e-3`.
    pub rule: String,
    pub passed: bool,
    /// Wall-clock checks are excluded from CSV output.
    pub timing: bool,
}

impl Check {
    pub fn below(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { label: label.into(), value, rule: format!("< {limit:e}"), passed: value < limit, timing: false }
    }

    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { label: label.into(), value, rule: format!("<= {limit}"), passed: value <= limit, timing: false }
    }

    pub fn above(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { label: label.into(), value, rule: format!("> {limit:e}"), passed: value > limit, timing: false }
    }

    pub fn within(label: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            label: label.into(),
            value,
            rule: format!("{target} +- {tol}"),
            passed: (value - target).abs() <= tol,
            timing: false,
        }
    }

    pub fn flag(label: impl Into<String>, ok: bool) -> Self {
        Self { label: label.into(), value: ok as u8 as f64, rule: "true".into(), passed: ok, timing: false }
    }

    pub fn seconds(label: impl Into<String>, secs: f64, limit: f64) -> Self {
        Self { label: label.into(), value: secs, rule: format!("< {limit} s"), passed: secs < limit, timing: true }
    }

    fn error(label: impl Into<String>, msg: &str) -> Self {
        Self { label: format!("{}: {msg}", label.into()), value: f64::NAN, rule: "no error".into(), passed: false, timing: false }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub seconds: f64,
}

impl Outcome {
    fn new(id: u8, title: &str) -> Self {
        Self { id, title: title.into(), checks: Vec::new(), tables: Vec::new(), seconds: 0.0 }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// `[PASS] n title` followed by one indented line per check.
    pub fn report(&self) -> String {
        let mut s = format!("[{}] {} {}", if self.passed() { "PASS" } else { "FAIL" }, self.id, self.title);
        for c in &self.checks {
            let _ = write!(s, "\n    {} {} = {:.6e} (want {})", if c.passed { "ok  " } else { "FAIL" }, c.label, c.value, c.rule);
        }
        s
    }

    /// First line of `report`, with the failing checks appended.
    pub fn headline(&self) -> String {
        let mut s = format!("[{}] {} {}", if self.passed() { "PASS" } else { "FAIL" }, self.id, self.title);
        let bad: Vec<String> =
            self.checks.iter().filter(|c| !c.passed).map(|c| format!("{} = {:.4e}, want {}", c.label, c.value, c.rule)).collect();
        if !bad.is_empty() {
            let _ = write!(s, " ({})", bad.join("; "));
        }
        s
    }
}

/// Everything the runners read. `metrics` are the metrics the
/// metric-dependent criteria run on.
#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub metrics: Vec<(String, MetricFamily)>,
    pub cut: CutoffSpec,
    pub chi: RadialCutoff,
    pub zeta: ZetaShells,
    pub dims: usize,
    pub pad: usize,
    pub fan: FanBeam,
    pub seed: u64,
    pub constant: f64,
    pub max_iter: usize,
    /// The C^k family of the remainder-decay criterion.
    pub finite: MetricFamily,
    /// Curvature of the non-simple metric that must be rejected.
    pub curvature: f64,
    pub workers: usize,
}

pub fn metric_label(f: &MetricFamily) -> String {
    match f {
        MetricFamily::Euclidean => "euclidean".into(),
        MetricFamily::Gaussian { epsilon } => format!("gaussian(eps={epsilon})"),
        MetricFamily::ConstantCurvature { curvature } => format!("constant_curvature(K={curvature})"),
        MetricFamily::FiniteRegularity { k, epsilon, center } => {
            format!("finite_regularity(k={k};eps={epsilon};x0=({};{}))", center[0], center[1])
        }
    }
}

impl SuiteParams {
    /// The acceptance protocol: Euclidean and g_ε (ε = 0.2) at 128².
    pub fn acceptance(constant: f64) -> Self {
        let mut cfg = ExperimentConfig::default();
        cfg.metric.family = FamilyName::Gaussian;
        let mut p = Self::from_config(&cfg, constant);
        p.metrics = vec![
            (metric_label(&MetricFamily::Euclidean), MetricFamily::Euclidean),
            (metric_label(&cfg.metric.family()), cfg.metric.family()),
        ];
        p
    }

    /// The suite on the configured metric only.
    pub fn from_config(cfg: &ExperimentConfig, constant: f64) -> Self {
        let fam = cfg.metric.family();
        let curvature = if cfg.metric.family == FamilyName::ConstantCurvature { cfg.metric.curvature } else { 4.0 };
        Self {
            metrics: vec![(metric_label(&fam), fam)],
            cut: cfg.cutoff.spec(),
            chi: cfg.cutoff.chi(),
            zeta: cfg.cutoff.zeta(),
            dims: cfg.grid.dims,
            pad: cfg.grid.pad,
            fan: FanBeam::new(cfg.fan.n_theta, cfg.fan.n_alpha),
            seed: cfg.experiment.seed,
            constant,
            max_iter: cfg.solver.max_iter,
            finite: cfg.metric.family_named(FamilyName::FiniteRegularity),
            curvature,
            workers: cfg.experiment.workers,
        }
    }
}

fn timed(id: u8, title: &str, body: impl FnOnce(&mut Outcome)) -> Outcome {
    let mut o = Outcome::new(id, title);
    let t0 = Instant::now();
    body(&mut o);
    o.seconds = t0.elapsed().as_secs_f64();
    o
}

fn gaussian_line_integral(sigma: f64, rho: f64) -> f64 {
    sigma * (2.0 * PI).sqrt() * (-rho * rho / (2.0 * sigma * sigma)).exp()
}

fn forward_gaussian(dims: usize, fan: FanBeam) -> gxr_transform::Result<SinogramGrid> {
    let sigma = 0.15;
    let spec = GridSpec::unit_square(dims);
    let f = ScalarGrid::quasi_interpolant(spec, |p: &Vec2| (-p.norm_squared() / (2.0 * sigma * sigma)).exp());
    xray(&Euclidean::default(), &f, fan, &RaySettings::for_grid(&spec))
}

/// 1. Euclidean sinogram of the σ = 0.15 Gaussian against exact line integrals.
pub fn forward_exactness(p: &SuiteParams) -> Outcome {
    let t0 = Instant::now();
    let mut o = timed(1, "Euclidean forward exactness", |o| match forward_gaussian(p.dims, p.fan) {
        Ok(s) => {
            let mut t = Table::new("c1_forward.csv", "theta,alpha,computed,exact");
            let (mut err, mut top) = (0.0f64, 0.0f64);
            for i in 0..p.fan.n_theta {
                for j in 0..p.fan.n_alpha {
                    // the ray (θ, α) passes at signed distance sin α from the origin
                    let exact = gaussian_line_integral(0.15, p.fan.alpha(j).sin());
                    err = err.max((s.get(i, j) - exact).abs());
                    top = top.max(exact);
                    t.push(format!("{},{},{:.15e},{:.15e}", p.fan.theta(i), p.fan.alpha(j), s.get(i, j), exact));
                }
            }
            o.checks.push(Check::below("max relative error", err / top, 1e-3));
            o.tables.push(t);
        }
        Err(e) => o.checks.push(Check::error("forward", &e.to_string())),
    });
    o.checks.push(Check::seconds("runtime", t0.elapsed().as_secs_f64(), 60.0));
    o
}

/// 2. ‖I*If − Nf‖/‖f‖ on random band-limited fields.
pub fn normal_identity(p: &SuiteParams) -> Outcome {
    timed(2, "normal-operator identity I*I = N", |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let fs: Vec<BandLimited> = (0..5).map(|_| BandLimited::random(&mut rng, 6, 12.0, 0.3, 0.6)).collect();
        let refs: Vec<&dyn Field> = fs.iter().map(|f| f as &dyn Field).collect();
        let sino = SinogramSettings {
            fan: FanBeam::new(2 * p.fan.n_theta, 2 * p.fan.n_alpha),
            rays: RaySettings::analytic(),
            n_dir: 256,
        };
        let mut t = Table::new("c2_identity.csv", "metric,trial,compose_ratio,kernel_ratio");
        for (name, fam) in &p.metrics {
            let m = fam.build();
            match verify_normal_identity(m.as_ref(), &refs, GridSpec::unit_square(32), &sino, &NormalSettings::analytic()) {
                Ok(rep) => {
                    for (k, (c, kr)) in rep.compose.iter().zip(&rep.kernel).enumerate() {
                        t.push(format!("{name},{k},{c:.12e},{kr:.12e}"));
                    }
                    o.checks.push(Check::below(format!("{name} max ratio"), rep.max_ratio(), 2e-2));
                }
                Err(e) => o.checks.push(Check::error(name.clone(), &e.to_string())),
            }
        }
        o.tables.push(t);
    })
}

/// 3. N applied to the radius-0.5 disk indicator at the origin is 2π.
pub fn kernel_quadrature(_p: &SuiteParams) -> Outcome {
    timed(3, "kernel quadrature exactness", |o| {
        let m = Euclidean::default();
        let f = DiskIndicator { radius: 0.5 };
        let one = GridSpec { origin: Vec2::zeros(), h: 1.0, nx: 1, ny: 1 };
        let st = NormalSettings::analytic();
        let cut = CutoffSpec::none();
        let mut t = Table::new("c3_quadrature.csv", "route,value,exact");
        for (route, v) in [
            ("kernel", normal_kernel(&m, &f, one, &cut, &st)),
            ("compose", normal_compose(&m, &f, one, &cut, &st)),
        ] {
            match v {
                Ok(g) => {
                    let v = g.values[0];
                    t.push(format!("{route},{v:.15e},{TAU:.15e}"));
                    o.checks.push(Check::below(format!("{route} relative error"), (v - TAU).abs() / TAU, 1e-3));
                }
                Err(e) => o.checks.push(Check::error(route, &e.to_string())),
            }
        }
        o.tables.push(t);
    })
}

pub fn interior_points() -> Vec<Vec2> {
    vec![Vec2::new(0.0, 0.0), Vec2::new(0.3, 0.0), Vec2::new(-0.2, 0.25), Vec2::new(0.1, -0.35), Vec2::new(-0.3, -0.3)]
}

fn decompose(fam: &MetricFamily, p: &SuiteParams) -> gxr_kernel_symbol::Result<SymbolDecomposition> {
    let st = FftSettings::default();
    let freq = FrequencyGrid::standard(st.extent);
    symbol_fft(fam.build().as_ref(), &p.cut, &p.chi, &interior_points(), &freq, &st)
}

/// Power-law exponent of the direction-averaged |a(x_i, ξ)| over the fit decade.
fn decay_exponent(d: &SymbolDecomposition, i: usize) -> gxr_kernel_symbol::Result<f64> {
    let sym = &d.full;
    let nd = sym.freq.n_dir;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (r, &rad) in sym.freq.radii.iter().enumerate() {
        if rad < DEFAULT_BAND.0 * (1.0 - 1e-9) || rad > DEFAULT_BAND.1 * (1.0 + 1e-9) {
            continue;
        }
        let (mut s, mut a) = (0.0, 0.0);
        for k in 0..nd {
            let j = r * nd + k;
            s += sym.freq.xi(j).norm() / nd as f64;
            a += sym.value(i, j).norm() / nd as f64;
        }
        xs.push(s);
        ys.push(a);
    }
    Ok(power_fit(&xs, &ys)?.slope)
}

/// Least-squares constant of a₋₁·|ξ|_g over the plateau band.
fn plateau(m: &dyn MetricField, p: &SuiteParams, x: &Vec2, band: (f64, f64)) -> gxr_kernel_symbol::Result<f64> {
    let g = m.eval(x);
    let n = 64;
    let mut sum = 0.0;
    for i in 0..n {
        let s = band.0 * (band.1 / band.0).powf(i as f64 / (n - 1) as f64);
        let a = 0.37 + 1.1 * i as f64;
        let xi = Vec2::new(a.cos(), a.sin()) * s;
        sum += principal_symbol(m, &p.cut, &p.chi, x, &xi, p.constant)? * conorm_g(&g, &xi);
    }
    Ok(sum / n as f64)
}

/// 4 and 6 share one symbol computation per metric.
pub fn symbol_criteria(p: &SuiteParams) -> (Outcome, Outcome) {
    let mut c4 = Outcome::new(4, "ellipticity and principal symbol");
    let mut c6 = Outcome::new(6, "symbol-class seminorms");
    let mut t4 = Table::new("c4_symbol.csv", "metric,x1,x2,decay_exponent,plateau,constant");
    let mut t6 = Table::new("c6_seminorms.csv", "metric,symbol,claimed_order,alpha,exponent,constant,bound,pass");
    let extent = FftSettings::default().extent;
    let band = (16.0 * TAU / extent, 64.0 * TAU / extent);
    let mut secs = 0.0;
    for (name, fam) in &p.metrics {
        let t0 = Instant::now();
        let m = fam.build();
        let d = match decompose(fam, p) {
            Ok(d) => d,
            Err(e) => {
                c4.checks.push(Check::error(name.clone(), &e.to_string()));
                c6.checks.push(Check::error(name.clone(), &e.to_string()));
                continue;
            }
        };
        for (i, x) in interior_points().iter().enumerate() {
            let at = format!("{name} x=({};{})", x[0], x[1]);
            match (decay_exponent(&d, i), plateau(m.as_ref(), p, x, band)) {
                (Ok(e), Ok(pl)) => {
                    t4.push(format!("{name},{},{},{e:.6e},{pl:.12e},{:.12e}", x[0], x[1], p.constant));
                    c4.checks.push(Check::within(format!("{at} decay exponent"), e, -1.0, 0.1));
                    c4.checks.push(Check::below(format!("{at} plateau deviation"), (pl - p.constant).abs() / p.constant, 0.05));
                }
                (Err(e), _) | (_, Err(e)) => c4.checks.push(Check::error(at, &e.to_string())),
            }
        }
        for (label, sym, order, alpha) in [("a", &d.full, -1.0, 2), ("c", &d.lower, -2.0, 1)] {
            match seminorm_check(sym, order, alpha) {
                Ok(rep) => {
                    for row in rep.to_csv_rows() {
                        t6.push(format!("{name},{label},{order},{row}"));
                    }
                    c6.checks.push(Check::flag(format!("{name} {label} in S^{order} for |alpha| <= {alpha}"), rep.pass()));
                }
                Err(e) => c6.checks.push(Check::error(format!("{name} {label}"), &e.to_string())),
            }
        }
        secs += t0.elapsed().as_secs_f64();
    }
    c4.tables.push(t4);
    c6.tables.push(t6);
    c4.seconds = secs;
    c6.seconds = secs;
    (c4, c6)
}

/// 5. Decay of |b(x, ξ)| on the C^k family.
pub fn remainder_decay(p: &SuiteParams) -> Outcome {
    timed(5, "remainder decay on the finite-regularity metric", |o| {
        let k = match p.finite {
            MetricFamily::FiniteRegularity { k, .. } => k,
            _ => 10,
        };
        let bound = -(k as f64 - 2.5);
        let m = p.finite.build();
        let x = Vec2::new(0.1, 0.1);
        let mut t = Table::new("c5_remainder.csv", "xi,b");
        let mut samples = Vec::with_capacity(400);
        for i in 0..400 {
            let s = 20.0 * 40f64.powf(i as f64 / 399.0);
            match b_symbol(m.as_ref(), &p.cut, &p.chi, &x, &Vec2::new(s, 0.0)) {
                Ok(b) => {
                    t.push(format!("{s:.12e},{b:.12e}"));
                    samples.push((s, b));
                }
                Err(e) => {
                    o.checks.push(Check::error("b", &e.to_string()));
                    return;
                }
            }
        }
        match envelope_fit(&samples, 40.0, 400.0) {
            Ok(f) => o.checks.push(Check::at_most(format!("{} envelope slope", metric_label(&p.finite)), f.slope, bound)),
            Err(e) => o.checks.push(Check::error("fit", &e.to_string())),
        }
        o.tables.push(t);
    })
}

/// Highest packet level resolved on a dims² grid.
pub fn top_level(dims: usize) -> u32 {
    (dims.trailing_zeros().max(3)) - 1
}

/// Packet levels j = top − 3..=top (3..=6 at 128²).
pub fn smoothing_levels(dims: usize) -> Vec<u32> {
    let top = top_level(dims);
    (top.saturating_sub(3).max(2)..=top).collect()
}

/// Compose route with the configured padding and ζ shells.
pub fn residual_settings(p: &SuiteParams) -> ResidualSettings {
    let mut s = ResidualSettings::analytic().with_route(NormalRoute::Compose);
    s.pad = p.pad;
    s.zeta = p.zeta;
    s
}

/// 7. Fitted smoothing order of R = PN − Id and its decrease under refinement.
pub fn parametrix_smoothing(p: &SuiteParams) -> Outcome {
    timed(7, "parametrix smoothing PN = Id + R", |o| {
        let levels = smoothing_levels(p.dims);
        let rs = residual_settings(p);
        let mut refine = Table::new("c7_refinement.csv", "metric,dims,level,ratio");
        for (name, fam) in &p.metrics {
            let m = fam.build();
            let st = SmoothingSettings::new(levels.clone(), rs);
            match smoothing_order(m.as_ref(), &p.cut, GridSpec::unit_square(p.dims), p.constant, &st) {
                Ok(r) => {
                    o.checks.push(Check::above(format!("{name} tau_hat"), r.tau_hat, 0.0));
                    o.checks.push(Check::above(format!("{name} fit R^2"), r.r_squared, 0.9));
                    let mut t = Table::from_text(format!("c7_smoothing_{}.csv", file_tag(fam)), &r.to_csv());
                    t.header = format!("{},tau_hat,r_squared", t.header);
                    for row in &mut t.rows {
                        let _ = write!(row, ",{:.6e},{:.6e}", r.tau_hat, r.r_squared);
                    }
                    o.tables.push(t);
                }
                Err(e) => o.checks.push(Check::error(format!("{name} smoothing"), &e.to_string())),
            }
            let level = top_level(p.dims).saturating_sub(2).max(2);
            let mut ratios = Vec::new();
            for n in [p.dims / 4, p.dims / 2, p.dims] {
                let spec = GridSpec::unit_square(n);
                let res = FourierGrid::new(spec, p.pad)
                    .map_err(|e| e.to_string())
                    .and_then(|g| {
                        let f = WavePacket::level(level, g.dxi().0);
                        residual(m.as_ref(), &p.cut, &f, spec, p.constant, &rs).map_err(|e| e.to_string())
                    });
                match res {
                    Ok(r) => {
                        refine.push(format!("{name},{n},{level},{:.12e}", r.ratio()));
                        ratios.push(r.ratio());
                    }
                    Err(e) => {
                        o.checks.push(Check::error(format!("{name} residual at {n}"), &e));
                        break;
                    }
                }
            }
            if ratios.len() == 3 {
                let worst = (ratios[1] / ratios[0]).max(ratios[2] / ratios[1]);
                o.checks.push(Check::below(format!("{name} largest refinement ratio of |Rf|/|f|"), worst, 1.0));
            }
        }
        o.tables.push(refine);
    })
}

fn file_tag(f: &MetricFamily) -> &'static str {
    match f {
        MetricFamily::Euclidean => "euclidean",
        MetricFamily::Gaussian { .. } => "gaussian",
        MetricFamily::ConstantCurvature { .. } => "constant_curvature",
        MetricFamily::FiniteRegularity { .. } => "finite_regularity",
    }
}

/// 8. Reconstruction of the σ = 0.15 Gaussian from d = N f.
pub fn round_trip(p: &SuiteParams) -> Outcome {
    let t0 = Instant::now();
    let mut o = timed(8, "reconstruction round trip", |o| {
        let spec = GridSpec::unit_square(p.dims);
        for (name, fam) in &p.metrics {
            let limit = if *fam == MetricFamily::Euclidean { 1e-2 } else { 3e-2 };
            let m = fam.build();
            let mut settings = SolverSettings::default().with_limits(p.max_iter, 0.0);
            settings.pad = p.pad;
            settings.zeta = p.zeta;
            let run = Reconstructor::new(m.as_ref(), &p.cut, spec, p.constant, settings).and_then(|r| {
                let truth = ScalarGrid::from_field(spec, &Gaussian { center: Vec2::zeros(), sigma: 0.15 });
                let d = r.forward(&r.model.restrict(&truth))?;
                r.invert_normal(&d, Some(&truth))
            });
            match run {
                Ok(inv) => {
                    let err = inv.trace.final_error().unwrap_or(f64::NAN);
                    o.checks.push(Check::below(format!("{name} relative L2 error"), err, limit));
                    o.checks.push(Check::at_most(format!("{name} iterations"), inv.trace.iterations() as f64, 30.0));
                    o.tables.push(Table::from_text(format!("c8_trace_{}.csv", file_tag(fam)), &inv.trace.to_csv()));
                }
                Err(e) => o.checks.push(Check::error(name.clone(), &e.to_string())),
            }
        }
    });
    o.checks.push(Check::seconds("runtime", t0.elapsed().as_secs_f64(), 600.0));
    o
}

/// 9. Dense singular values on 16², and rejection of a metric with conjugate points.
pub fn injectivity(p: &SuiteParams) -> Outcome {
    timed(9, "injectivity probe", |o| {
        for (name, fam) in &p.metrics {
            let m = fam.build();
            match injectivity_probe(m.as_ref(), &p.cut, 16) {
                Ok(r) => {
                    o.checks.push(Check::above(format!("{name} sigma_min/sigma_max"), r.sigma_min / r.sigma_max, 1e-6));
                    o.checks.push(Check::below(format!("{name} symmetry defect"), r.symmetry_defect, 1e-2));
                    o.tables.push(Table::from_text(format!("c9_singular_values_{}.csv", file_tag(fam)), &r.to_csv()));
                }
                Err(e) => o.checks.push(Check::error(name.clone(), &e.to_string())),
            }
        }
        let k = p.curvature;
        let rep = check_simplicity(MetricFamily::ConstantCurvature { curvature: k }.build().as_ref());
        let mut t = Table::new("c9_simplicity.csv", "curvature,simple,witness_t,expected_t");
        let expected = PI / k.sqrt();
        o.checks.push(Check::flag(format!("K={k} rejected"), !rep.is_simple()));
        match rep.conjugate_witness {
            Some(w) => {
                t.push(format!("{k},{},{:.12e},{expected:.12e}", rep.is_simple(), w.t));
                o.checks.push(Check::below(format!("K={k} witness offset from pi/sqrt(K)"), (w.t - expected).abs() / expected, 0.05));
            }
            None => {
                t.push(format!("{k},{},,{expected:.12e}", rep.is_simple()));
                o.checks.push(Check::flag(format!("K={k} conjugate-point witness"), false));
            }
        }
        o.tables.push(t);
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// 10 within one run: the criterion-1 sinogram under one worker and under
/// several must hash equal. Comparing two whole `verify` runs is done by the
/// acceptance suite.
pub fn determinism_self_check(p: &SuiteParams) -> Outcome {
    timed(10, "determinism across worker counts", |o| {
        let many = if p.workers == 1 { 2 } else { p.workers.max(2) };
        let mut t = Table::new("c10_determinism.csv", "run,sha256");
        let mut hashes = Vec::new();
        for (k, w) in [1, many].into_iter().enumerate() {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w).build();
            let res = pool.map_err(|e| e.to_string()).and_then(|pool| {
                pool.install(|| forward_gaussian(p.dims.min(64), FanBeam::new(60, 30))).map_err(|e| e.to_string())
            });
            match res {
                Ok(s) => {
                    let bytes: Vec<u8> = s.values.iter().flat_map(|v| v.to_le_bytes()).collect();
                    let h = sha256_hex(&bytes);
                    t.push(format!("{k},{h}"));
                    hashes.push(h);
                }
                Err(e) => o.checks.push(Check::error(format!("{w} workers"), &e)),
            }
        }
        if hashes.len() == 2 {
            o.checks.push(Check::flag("sinogram hash equal under one and several workers", hashes[0] == hashes[1]));
        }
        o.tables.push(t);
    })
}

/// Every criterion in order.
pub fn run_all(p: &SuiteParams, mut progress: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let mut out = Vec::with_capacity(10);
    let mut push = |o: Outcome, out: &mut Vec<Outcome>| {
        progress(&o);
        out.push(o);
    };
    push(forward_exactness(p), &mut out);
    push(normal_identity(p), &mut out);
    push(kernel_quadrature(p), &mut out);
    let (c4, c6) = symbol_criteria(p);
    push(c4, &mut out);
    push(remainder_decay(p), &mut out);
    push(c6, &mut out);
    push(parametrix_smoothing(p), &mut out);
    push(round_trip(p), &mut out);
    push(injectivity(p), &mut out);
    push(determinism_self_check(p), &mut out);
    out
}

/// `verify.csv`: every non-timing check.
pub fn summary_table(outcomes: &[Outcome]) -> Table {
    let mut t = Table::new("verify.csv", "criterion,check,value,rule,passed");
    for o in outcomes {
        for c in o.checks.iter().filter(|c| !c.timing) {
            t.push(format!("{},{},{:.12e},{},{}", o.id, c.label.replace(',', ";"), c.value, c.rule, c.passed));
        }
    }
    t
}
