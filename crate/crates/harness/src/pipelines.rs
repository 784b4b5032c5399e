//! One function per subcommand. Each writes its artifacts and returns the
//! process exit code.

use std::fmt::Write as _;

use gxr_geometry::{check_simplicity, FanBeam};
use gxr_kernel_symbol::{calibrate_constant, seminorm_check, symbol_fft, FftSettings, FrequencyGrid, CALIBRATION_BAND};
use gxr_parametrix::{smoothing_order, SmoothingSettings};
use gxr_reconstruct::{ReconstructError, Reconstructor};
use gxr_transform::{normal_compose, xray, DiskIndicator, GridSpec, NormalSettings, RaySettings, ScalarGrid};

use crate::artifacts::{Artifacts, CalibrationRecord, Table};
use crate::config::{ExperimentConfig, PhantomKind};
use crate::error::Result;
use crate::suite::{self, interior_points, metric_label, SuiteParams};

/// Exit code of a completed run with failed checks.
pub const EXIT_FAILED: i32 = 1;

pub struct Run<'a> {
    pub cfg: &'a ExperimentConfig,
    pub out: Artifacts,
}

impl Run<'_> {
    fn spec(&self) -> GridSpec {
        GridSpec::unit_square(self.cfg.grid.dims)
    }

    fn fan(&self) -> FanBeam {
        FanBeam::new(self.cfg.fan.n_theta, self.cfg.fan.n_alpha)
    }

    fn phantom(&self) -> ScalarGrid {
        let spec = self.spec();
        let p = &self.cfg.phantom;
        match p.kind {
            PhantomKind::Zero => ScalarGrid::zeros(spec),
            PhantomKind::Disk => ScalarGrid::from_field(spec, &DiskIndicator { radius: p.radius }),
            PhantomKind::Gaussian => {
                let s = p.sigma;
                ScalarGrid::quasi_interpolant(spec, |x| (-x.norm_squared() / (2.0 * s * s)).exp())
            }
        }
    }

    fn chi_radii(&self) -> (f64, f64) {
        (self.cfg.cutoff.chi_inner, self.cfg.cutoff.chi_outer)
    }

    fn calibration(&self) -> Result<CalibrationRecord> {
        CalibrationRecord::load(&self.out.dir, self.chi_radii())
    }

    fn report(&self, name: &str, text: &str) -> Result<()> {
        self.out.write(name, text.as_bytes())?;
        println!("{text}");
        Ok(())
    }

    pub fn simplicity(&self) -> Result<i32> {
        let fam = self.cfg.metric.family();
        let r = check_simplicity(fam.build().as_ref());
        let mut t = Table::new("simplicity.csv", "property,value");
        t.push(format!("simple,{}", r.is_simple()));
        t.push(format!("convex,{}", r.convex));
        t.push(format!("min_second_fundamental_form,{:.12e}", r.min_second_fundamental_form.0));
        t.push(format!("min_second_fundamental_form_theta,{:.12e}", r.min_second_fundamental_form.1));
        t.push(format!("non_trapping,{}", r.non_trapping));
        t.push(format!("no_conjugate_points,{}", r.no_conjugate_points));
        let t_conj = r.conjugate_witness.map(|w| format!("{:.12e}", w.t)).unwrap_or_default();
        t.push(format!("conjugate_witness_t,{t_conj}"));
        t.push(format!("rays_checked,{}", r.rays_checked));
        self.out.table(&t)?;
        let mut s = format!("{}: {}", metric_label(&fam), if r.is_simple() { "simple" } else { "NOT simple" });
        if let Some(w) = r.conjugate_witness {
            let _ = write!(s, "\nconjugate point at t = {:.6} (theta = {:.4}, alpha = {:.4})", w.t, w.theta, w.alpha);
        }
        if let Some(w) = r.trapped_witness {
            let _ = write!(s, "\ntrapped ray at theta = {:.4}, alpha = {:.4}", w.theta, w.alpha);
        }
        self.report("simplicity.txt", &s)?;
        Ok(0)
    }

    pub fn forward(&self) -> Result<i32> {
        let m = self.cfg.metric.family().build();
        let f = self.phantom();
        let s = xray(m.as_ref(), &f, self.fan(), &RaySettings::for_grid(&f.spec))?;
        self.out.grid_csv("phantom.csv", &f)?;
        self.out.grid_pgm("phantom.pgm", &f)?;
        self.out.sinogram_csv("sinogram.csv", &s)?;
        self.out.sinogram_pgm("sinogram.pgm", &s)?;
        self.report("forward.txt", &format!("sinogram {}x{}: max |If| = {:.6e}", s.fan.n_theta, s.fan.n_alpha, s.max_abs()))?;
        Ok(0)
    }

    pub fn normal(&self) -> Result<i32> {
        let m = self.cfg.metric.family().build();
        let f = self.phantom();
        let spec = self.spec();
        let nf = normal_compose(m.as_ref(), &f, spec, &self.cfg.cutoff.spec(), &NormalSettings::for_grid(&spec))?;
        self.out.grid_csv("normal.csv", &nf)?;
        self.out.grid_pgm("normal.pgm", &nf)?;
        self.report("normal.txt", &format!("psi N phi f on {0}x{0}: max |Nf| = {1:.6e}", spec.nx, nf.max_abs()))?;
        Ok(0)
    }

    pub fn symbol(&self) -> Result<i32> {
        let m = self.cfg.metric.family().build();
        let st = FftSettings::default();
        let freq = FrequencyGrid::standard(st.extent);
        let d = symbol_fft(m.as_ref(), &self.cfg.cutoff.spec(), &self.cfg.cutoff.chi(), &interior_points(), &freq, &st)?;
        let mut t = Table::new("symbol.csv", "x1,x2,xi1,xi2,re,im");
        t.rows = d.full.to_csv_rows();
        self.out.table(&t)?;
        let mut sem = Table::new("seminorms.csv", "symbol,alpha,exponent,constant,bound,pass");
        let mut text = String::new();
        let mut ok = true;
        for (label, sym, order, alpha) in [("a", &d.full, -1.0, 2), ("c", &d.lower, -2.0, 1)] {
            let rep = seminorm_check(sym, order, alpha)?;
            ok &= rep.pass();
            for row in rep.to_csv_rows() {
                sem.push(format!("{label},{row}"));
            }
            let exps: Vec<String> = rep.rows.iter().map(|r| format!("{:.3}", r.exponent)).collect();
            let _ = writeln!(text, "{label}: claimed order {order}, fitted exponents by |alpha| [{}], pass {}", exps.join(", "), rep.pass());
        }
        for w in d.full.warnings.iter().chain(&d.lower.warnings) {
            let _ = writeln!(text, "warning: {w}");
        }
        self.out.table(&sem)?;
        self.report("symbol.txt", text.trim_end())?;
        Ok(if ok { 0 } else { EXIT_FAILED })
    }

    pub fn calibrate(&self) -> Result<i32> {
        let c = calibrate_constant(&self.cfg.cutoff.chi(), CALIBRATION_BAND, 17);
        let (chi_inner, chi_outer) = self.chi_radii();
        let rec = CalibrationRecord {
            constant: c.constant,
            spread: c.spread,
            band_lo: c.band.0,
            band_hi: c.band.1,
            chi_inner,
            chi_outer,
        };
        let path = rec.save(&self.out)?;
        println!("C = {:.15} (spread {:.3e}) written to {}", rec.constant, rec.spread, path.display());
        Ok(0)
    }

    pub fn parametrix(&self) -> Result<i32> {
        let cal = self.calibration()?;
        let m = self.cfg.metric.family().build();
        let p = SuiteParams::from_config(self.cfg, cal.constant);
        let st = SmoothingSettings::new(suite::smoothing_levels(p.dims), suite::residual_settings(&p));
        let r = smoothing_order(m.as_ref(), &p.cut, self.spec(), cal.constant, &st)?;
        self.out.table(&Table::from_text("smoothing.csv", &r.to_csv()))?;
        let mut text = format!("{}\n", r.summary());
        for row in &r.rows {
            let _ = writeln!(text, "level {}: |xi| = {:.3}, |Rf|/|f| = {:.6e}", row.level, row.frequency, row.ratio());
        }
        self.report("parametrix.txt", text.trim_end())?;
        Ok(0)
    }

    pub fn reconstruct(&self) -> Result<i32> {
        let cal = self.calibration()?;
        let m = self.cfg.metric.family().build();
        let spec = self.spec();
        let r = Reconstructor::new(m.as_ref(), &self.cfg.cutoff.spec(), spec, cal.constant, self.cfg.solver_settings())?;
        let truth = r.model.restrict(&self.phantom());
        let d = r.forward(&truth)?;
        let inv = match r.invert_normal(&d, Some(&truth)) {
            Ok(inv) => inv,
            Err(ReconstructError::Diverged { window, last, trace }) => {
                self.out.table(&Table::from_text("trace.csv", &trace.to_csv()))?;
                return Err(ReconstructError::Diverged { window, last, trace }.into());
            }
            Err(e) => return Err(e.into()),
        };
        self.out.grid_csv("reconstruction.csv", &inv.f)?;
        self.out.grid_pgm("reconstruction.pgm", &inv.f)?;
        self.out.table(&Table::from_text("trace.csv", &inv.trace.to_csv()))?;
        let text = format!(
            "{:?} after {} iterations: residual {:.6e}, relative error {:.6e}",
            inv.trace.stop,
            inv.trace.iterations(),
            inv.trace.final_residual(),
            inv.trace.final_error().unwrap_or(f64::NAN)
        );
        self.report("reconstruct.txt", &text)?;
        Ok(0)
    }

    /// Calibrate, then run every criterion on the configured metric.
    pub fn verify(&self) -> Result<i32> {
        self.calibrate()?;
        let cal = self.calibration()?;
        let p = SuiteParams::from_config(self.cfg, cal.constant);
        let outcomes = suite::run_all(&p, |o| println!("{}", o.headline()));
        let mut text = String::new();
        for o in &outcomes {
            for t in &o.tables {
                self.out.table(t)?;
            }
            let _ = writeln!(text, "{}\n    wall time {:.1} s", o.report(), o.seconds);
        }
        self.out.table(&suite::summary_table(&outcomes))?;
        let failed = outcomes.iter().filter(|o| !o.passed()).count();
        let _ = writeln!(text, "{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
        self.out.write("verify.txt", text.as_bytes())?;
        println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
        Ok(if failed == 0 { 0 } else { EXIT_FAILED })
    }
}
