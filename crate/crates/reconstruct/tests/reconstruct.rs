use gxr_geometry::{Conformal, ConstantCurvature, Euclidean, GaussianBump, MetricField, Vec2};
use gxr_kernel_symbol::default_calibration;
use gxr_reconstruct::*;
use gxr_transform::{xray, CutoffSpec, FnField, Gaussian, GridSpec, RadialCutoff, RaySettings, ScalarGrid, SinogramGrid};
use gxr_geometry::FanBeam;
use proptest::prelude::*;

fn constant() -> f64 {
    default_calibration().constant
}

fn g_eps() -> Conformal<GaussianBump> {
    Conformal::new(GaussianBump { epsilon: 0.2 })
}

fn bump() -> Gaussian {
    Gaussian { center: Vec2::zeros(), sigma: 0.15 }
}

fn solver<'a>(m: &'a dyn MetricField, n: usize, settings: SolverSettings) -> Reconstructor<'a> {
    Reconstructor::new(m, &CutoffSpec::default(), GridSpec::unit_square(n), constant(), settings).unwrap()
}

/// Data N f_true from the solver's own discretisation, and the truth sampled on the grid.
fn round_trip_data(r: &Reconstructor<'_>) -> (ScalarGrid, ScalarGrid) {
    let truth = ScalarGrid::from_field(r.spec(), &bump());
    let d = r.forward(&r.model.restrict(&truth)).unwrap();
    (d, truth)
}

/// First iteration whose error is below `level`.
fn first_below(errors: &[f64], level: f64) -> Option<usize> {
    errors.iter().position(|&e| e < level)
}

#[test]
fn zero_data_gives_zero_in_one_step() {
    let m = Euclidean::default();
    let r = solver(&m, 16, SolverSettings::default());
    let out = r.invert_normal(&ScalarGrid::zeros(r.spec()), None).unwrap();
    assert_eq!(out.f.max_abs(), 0.0);
    assert_eq!(out.trace.len(), 1);
    assert_eq!(out.trace.stop, StopReason::ZeroData);
}

#[test]
fn euclidean_round_trip_within_twenty_iterations() {
    let m = Euclidean::default();
    let r = solver(&m, 64, SolverSettings::default().with_limits(20, 0.0));
    let (d, truth) = round_trip_data(&r);
    let out = r.invert_normal(&d, Some(&truth)).unwrap();
    let err = out.trace.final_error().unwrap();
    assert!(out.trace.iterations() <= 20);
    assert!(err < 1e-2, "relative error after {} iterations: {err:.4e}", out.trace.iterations());
}

#[test]
fn curved_round_trip_within_thirty_iterations() {
    let m = g_eps();
    let r = solver(&m, 64, SolverSettings::default().with_limits(30, 0.0));
    let (d, truth) = round_trip_data(&r);
    let out = r.invert_normal(&d, Some(&truth)).unwrap();
    let err = out.trace.final_error().unwrap();
    assert!(err < 3e-2, "relative error after 30 iterations: {err:.4e}");
    assert!(out.trace.max_residual_increase() <= 1e-12);
}

#[test]
fn default_run_converges_monotonically_to_tolerance() {
    let m = Euclidean::default();
    let r = solver(&m, 32, SolverSettings::default());
    let (d, truth) = round_trip_data(&r);
    let out = r.invert_normal(&d, Some(&truth)).unwrap();
    let t = &out.trace;
    assert_eq!(t.stop, StopReason::Converged);
    assert!(t.final_residual() <= 1e-3);
    assert!(t.max_residual_increase() <= 1e-12, "residual increased by {}", t.max_residual_increase());
    assert_eq!(t.error.as_ref().unwrap().len(), t.len());
    assert_eq!(t.sobolev.len(), t.len());
    assert!(t.residual.iter().chain(t.error.as_ref().unwrap()).all(|&v| v >= 0.0));
    assert!(first_below(t.error.as_ref().unwrap(), 1e-2).is_some());
}

#[test]
fn converged_solution_is_a_fixed_point() {
    let m = Euclidean::default();
    let r = solver(&m, 32, SolverSettings::default().with_limits(200, 1e-6));
    let (d, _) = round_trip_data(&r);
    let out = r.invert_normal(&d, None).unwrap();
    assert_eq!(out.trace.stop, StopReason::Converged);
    let (next, _) = r.step(&out.f, &d).unwrap();
    let change = next.sub(&out.f).l2_norm() / out.f.l2_norm();
    assert!(change < 1e-6, "{change:e}");
}

#[test]
fn reconstruction_stays_inside_the_support() {
    let m = g_eps();
    let r = solver(&m, 64, SolverSettings::default());
    let taper = RadialCutoff::new(0.2, 0.3);
    let small = FnField::with_support(
        move |p: &Vec2| (-p.norm_squared() / (2.0 * 0.1 * 0.1)).exp() * taper.eval(p),
        0.3,
    );
    let truth = ScalarGrid::from_field(r.spec(), &small);
    let d = r.forward(&truth).unwrap();
    let out = r.invert_normal(&d, Some(&truth)).unwrap();
    let reach = 0.3 + 2.0 * r.spec().h;
    let outside = out
        .f
        .values
        .iter()
        .enumerate()
        .filter(|(k, _)| r.spec().node(*k).norm() > reach)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max);
    assert!(outside < 1e-3 * out.f.max_abs(), "{outside:e} vs max {}", out.f.max_abs());
}

#[test]
fn wrong_scale_is_reported_as_divergence() {
    let m = Euclidean::default();
    let r = Reconstructor::new(&m, &CutoffSpec::default(), GridSpec::unit_square(32), constant() / 3.0, SolverSettings::default())
        .unwrap();
    let (d, _) = round_trip_data(&r);
    match r.invert_normal(&d, None) {
        Err(ReconstructError::Diverged { window, trace, .. }) => {
            assert_eq!(window, 3);
            assert_eq!(trace.stop, StopReason::Diverged);
            assert!(trace.trailing_increases(0.0) >= 3);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn mismatched_grids_are_rejected() {
    let m = Euclidean::default();
    let r = solver(&m, 16, SolverSettings::default());
    let d = ScalarGrid::zeros(GridSpec::unit_square(32));
    assert!(matches!(r.invert_normal(&d, None), Err(ReconstructError::GridMismatch(_))));
}

#[test]
fn trace_csv_has_one_row_per_iterate() {
    let m = Euclidean::default();
    let r = solver(&m, 16, SolverSettings::default().with_limits(5, 0.0));
    let (d, truth) = round_trip_data(&r);
    let out = r.invert_normal(&d, Some(&truth)).unwrap();
    let csv = out.trace.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iteration,residual,error,h-1,h-0.5,h0,h0.5,h1");
    assert_eq!(lines.len(), 1 + out.trace.len());
    assert_eq!(out.trace.len(), 6);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 8));
}

#[test]
fn zero_sinogram_gives_zero() {
    let m = Euclidean::default();
    let r = solver(&m, 16, SolverSettings::default());
    let out = r.invert_sinogram(&SinogramGrid::zeros(FanBeam::new(64, 32)), 64, 0.01, None).unwrap();
    assert_eq!(out.f.max_abs(), 0.0);
    assert_eq!(out.trace.stop, StopReason::ZeroData);
}

#[test]
fn sinogram_round_trip_agrees_with_normal_data() {
    let m = Euclidean::default();
    let r = solver(&m, 64, SolverSettings::default());
    let (d, truth) = round_trip_data(&r);
    let s = xray(&m, &bump(), FanBeam::new(360, 180), &RaySettings::analytic()).unwrap();
    let from_sino = r.invert_sinogram(&s, 256, 0.01, Some(&truth)).unwrap();
    let from_normal = r.invert_normal(&d, Some(&truth)).unwrap();
    let err = from_sino.trace.final_error().unwrap();
    assert!(err < 2e-2, "sinogram round trip error {err:.4e}");
    let gap = from_sino.f.sub(&from_normal.f).l2_norm() / from_normal.f.l2_norm();
    assert!(gap < 1e-2, "solver-level discrepancy {gap:.4e}");
}

#[test]
fn probe_finds_no_null_space_on_the_euclidean_disk() {
    let rep = injectivity_probe(&Euclidean::default(), &CutoffSpec::default(), 16).unwrap();
    assert!(rep.passed());
    assert!(rep.nodes <= 32 * 32);
    assert!(rep.sigma_min > 0.0);
    assert!(rep.sigma_min / rep.sigma_max > 1e-6, "{}", rep.summary());
    assert!(rep.symmetry_defect < 1e-2, "{}", rep.symmetry_defect);
    assert_eq!(rep.symmetry_defect, rep.raw_symmetry_defect);
    assert!(rep.singular_values.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(rep.to_csv().lines().count(), rep.nodes + 1);
}

#[test]
fn curved_normal_operator_is_symmetric_in_the_riemannian_measure() {
    let m = g_eps();
    let rep = injectivity_probe(&m, &CutoffSpec::default(), 16).unwrap();
    assert!(rep.passed());
    assert!(rep.symmetry_defect < 1e-2, "{}", rep.symmetry_defect);
    assert!(rep.symmetry_defect < rep.raw_symmetry_defect);
}

#[test]
fn probe_refuses_non_simple_metrics() {
    let k: f64 = 4.0;
    let m = Conformal::new(ConstantCurvature { curvature: k });
    match injectivity_probe(&m, &CutoffSpec::default(), 16) {
        Err(ReconstructError::NotSimple(msg)) => {
            let t: f64 = msg
                .split("conjugate point at t = ")
                .nth(1)
                .and_then(|s| s.split_whitespace().next())
                .and_then(|s| s.parse().ok())
                .unwrap_or_else(|| panic!("no witness in {msg}"));
            let expected = std::f64::consts::PI / k.sqrt();
            assert!((t - expected).abs() / expected < 0.05, "{t} vs {expected}");
        }
        other => panic!("expected refusal, got {other:?}"),
    }
}

#[test]
fn probe_guards_memory() {
    let r = injectivity_probe(&Euclidean::default(), &CutoffSpec::default(), 64);
    assert!(matches!(r, Err(ReconstructError::TooLarge { n: 64, limit: 48 })));
}

#[test]
fn condition_number_predicts_iteration_count() {
    for m in [Box::new(Euclidean::default()) as Box<dyn MetricField>, Box::new(g_eps())] {
        let rep = injectivity_probe(m.as_ref(), &CutoffSpec::default(), 16).unwrap();
        let r = solver(m.as_ref(), 16, SolverSettings::default());
        let (d, _) = round_trip_data(&r);
        let out = r.invert_normal(&d, None).unwrap();
        assert_eq!(out.trace.stop, StopReason::Converged);
        let actual = out.trace.iterations() as f64;
        let predicted = rep.predicted_iterations(r.settings.tol);
        let ratio = predicted / actual;
        assert!((0.25..=4.0).contains(&ratio), "predicted {predicted:.1}, actual {actual}");
    }
}

fn rough_demo(n: usize, s0: f64, scale: f64) -> RegularityReport {
    let m = Euclidean::default();
    let r = solver(&m, n, SolverSettings::default());
    let series = RoughSeries::for_grid(&r.spec(), s0, 7);
    let f = ScalarGrid::from_field(r.spec(), &series).scaled(scale);
    regularity_gain_demo(&r, &f, &RegularityOptions::for_series(&series, 3)).unwrap()
}

#[test]
fn smooth_input_shows_no_profile_shift() {
    let rep = rough_demo(64, 3.0, 1.0);
    for s in rep.shift() {
        assert!(s.abs() < 0.1, "{:?}", rep.shift());
    }
}

#[test]
fn correction_is_smoother_than_rough_input_under_refinement() {
    // H^{s0 + 1/2} with s0 = 1/2: f's norm grows as modes are added, the
    // first correction's settles.
    let reps: Vec<RegularityReport> = [32, 64, 128].iter().map(|&n| rough_demo(n, 0.5, 1.0)).collect();
    let t = reps[0].sobolev_t.iter().position(|&t| t == 1.0).unwrap();
    let f: Vec<f64> = reps.iter().map(|r| r.input[t]).collect();
    let c: Vec<f64> = reps.iter().map(|r| r.corrections[0][t]).collect();
    assert!(f[2] / f[0] > 1.2, "input norms {f:?}");
    assert!(c[2] / c[0] < 1.1, "correction norms {c:?}");
    assert!(c[2] / c[1] < c[1] / c[0], "correction norms {c:?}");
    for r in &reps {
        assert!(r.gain()[0] > 0.0, "{:?}", r.gain());
    }
}

#[test]
fn doubling_the_input_doubles_every_iterate() {
    let a = rough_demo(32, 0.5, 1.0);
    let b = rough_demo(32, 0.5, 2.0);
    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(u, v)| (2.0 * u - v).abs() <= 1e-12 * v.abs().max(1e-300));
    for (x, y) in a.iterates.iter().zip(&b.iterates).chain(a.corrections.iter().zip(&b.corrections)) {
        assert!(close(x, y), "{x:?} vs {y:?}");
    }
    for (x, y) in a.iterate_index.iter().zip(&b.iterate_index) {
        assert!((x - y).abs() < 1e-9);
    }
    assert!(a.to_csv().starts_with("stage,index,h-1"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn iterates_are_linear_in_the_data(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let m = Euclidean::default();
        let r = solver(&m, 16, SolverSettings::default().with_limits(4, 0.0));
        let f1 = r.model.restrict(&ScalarGrid::from_field(r.spec(), &bump()));
        let f2 = r.model.restrict(&ScalarGrid::from_fn(r.spec(), |p| p[0] * (1.0 - p.norm_squared())));
        let d1 = r.forward(&f1).unwrap();
        let d2 = r.forward(&f2).unwrap();
        let x1 = r.invert_normal(&d1, None).unwrap().f;
        let x2 = r.invert_normal(&d2, None).unwrap().f;
        let xs = r.invert_normal(&d1.scaled(a).axpy(b, &d2), None).unwrap().f;
        let expected = x1.scaled(a).axpy(b, &x2);
        let err = xs.sub(&expected).max_abs();
        prop_assert!(err <= 1e-10 * (1.0 + expected.max_abs()), "{}", err);
    }
}
