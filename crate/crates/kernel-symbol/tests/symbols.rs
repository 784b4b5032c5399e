use std::f64::consts::{PI, TAU};

use gxr_geometry::{conorm_g, Conformal, Euclidean, FiniteRegularity, GaussianBump, MetricField, Vec2};
use gxr_kernel_symbol::*;
use gxr_transform::{CutoffSpec, RadialCutoff};
use num_complex::Complex64;

fn geps() -> Conformal<GaussianBump> {
    Conformal::new(GaussianBump { epsilon: 0.2 })
}

fn finite(k: u32) -> Conformal<FiniteRegularity> {
    Conformal::new(FiniteRegularity { k, epsilon: 0.2, center: Vec2::new(0.3, 0.0) })
}

fn unit(a: f64) -> Vec2 {
    Vec2::new(a.cos(), a.sin())
}

fn interior_points() -> Vec<Vec2> {
    vec![Vec2::new(0.0, 0.0), Vec2::new(0.3, 0.0), Vec2::new(-0.2, 0.25), Vec2::new(0.1, -0.35), Vec2::new(-0.3, -0.3)]
}

#[test]
fn euclidean_kernel_is_two_over_distance() {
    let m = Euclidean::default();
    let cut = CutoffSpec::default();
    let k = kernel_eval(&m, &cut, &Vec2::zeros(), &Vec2::new(0.5, 0.0)).unwrap();
    assert!((k - 4.0).abs() < 1e-10, "{k}");
    let k = kernel_eval(&m, &cut, &Vec2::new(0.1, 0.2), &Vec2::new(-0.1, 0.2)).unwrap();
    assert!((k - 2.0 / 0.223606797749979).abs() < 1e-9, "{k}");
}

#[test]
fn kernel_vanishes_off_phi_support() {
    let m = geps();
    let cut = CutoffSpec::default();
    // x − z = (0.9, 0) is outside the support of φ
    let k = kernel_eval(&m, &cut, &Vec2::new(0.2, 0.0), &Vec2::new(-0.7, 0.0)).unwrap();
    assert_eq!(k, 0.0);
}

#[test]
fn kernel_at_zero_offset_is_an_error() {
    let m = geps();
    assert!(kernel_eval(&m, &CutoffSpec::default(), &Vec2::zeros(), &Vec2::zeros()).is_err());
}

#[test]
fn curved_kernel_times_distance_tends_to_h_limit() {
    let m = geps();
    let cut = CutoffSpec::default();
    let x = Vec2::zeros();
    for a in [0.0, 0.7, 2.1, 4.0] {
        let w = unit(a);
        let h0 = h_eval(&m, &cut, &x, 0.0, &w).unwrap();
        let r = 1e-5;
        let k = kernel_eval(&m, &cut, &x, &(w * r)).unwrap();
        assert!((k * r - h0).abs() < 1e-4, "{} vs {h0}", k * r);
    }
}

#[test]
fn euclidean_h_is_two() {
    let m = Euclidean::default();
    let cut = CutoffSpec::default();
    for (x, r, a) in [(Vec2::zeros(), 0.0, 0.3), (Vec2::new(0.2, -0.1), 0.2, 1.9), (Vec2::new(-0.1, 0.1), 0.35, 5.0)] {
        let h = h_eval(&m, &cut, &x, r, &unit(a)).unwrap();
        assert!((h - 2.0).abs() < 1e-10, "{h}");
    }
}

#[test]
fn h_at_zero_radius_matches_closed_form() {
    let m = geps();
    let cut = CutoffSpec::default();
    for x in [Vec2::zeros(), Vec2::new(0.3, -0.2), Vec2::new(0.6, 0.3)] {
        for a in [0.2, 1.3, 3.7] {
            let w = unit(a);
            let g = m.eval(&x);
            let expect = cut.psi.eval(&x) * cut.phi.eval(&x) * 2.0 * g.determinant().sqrt() / (w.dot(&(g * w))).sqrt();
            let h = h_eval(&m, &cut, &x, 0.0, &w).unwrap();
            assert!((h - expect).abs() < 1e-12 * expect.max(1.0), "{h} vs {expect}");
            assert!((h_limit(&m, &cut, &x, &w) - expect).abs() < 1e-12 * expect.max(1.0));
        }
    }
}

#[test]
fn curved_h_is_lipschitz_in_r() {
    let m = geps();
    let cut = CutoffSpec::default();
    let x = Vec2::new(0.1, 0.05);
    let mut lip: f64 = 0.0;
    for a in [0.0, 1.0, 2.5, 4.4] {
        let w = unit(a);
        let h0 = h_eval(&m, &cut, &x, 0.0, &w).unwrap();
        for i in 1..=20 {
            let r = 0.005 * i as f64;
            lip = lip.max((h_eval(&m, &cut, &x, r, &w).unwrap() - h0).abs() / r);
        }
    }
    assert!(lip.is_finite() && lip < 5.0, "fitted constant {lip}");
    assert!(lip > 1e-4, "h should vary with r on a curved metric");
}

#[test]
fn euclidean_split_has_no_remainder() {
    let m = Euclidean::default();
    let cut = CutoffSpec::default();
    let chi = default_chi();
    let rho: Vec<f64> = (1..=10).map(|i| 0.04 * i as f64).collect();
    let omega: Vec<f64> = (0..8).map(|q| TAU * q as f64 / 8.0).collect();
    let s = split_kernel(&m, &cut, &Vec2::zeros(), &chi, &rho, &omega).unwrap();
    for (l, r) in rho.iter().enumerate() {
        for q in 0..omega.len() {
            let i = s.index(l, q);
            assert!((s.k_principal[i] - 2.0 / r).abs() < 1e-9);
            assert!(s.remainder[i].abs() < 1e-6, "{}", s.remainder[i]);
        }
    }
}

#[test]
fn split_recomposes_the_kernel() {
    let cut = CutoffSpec::default();
    let chi = default_chi();
    let rho: Vec<f64> = (0..=6).map(|i| 0.08 * i as f64).collect();
    let omega: Vec<f64> = (0..6).map(|q| TAU * q as f64 / 6.0 + 0.1).collect();
    let metrics: Vec<Box<dyn MetricField>> = vec![Box::new(geps()), Box::new(finite(6))];
    for m in &metrics {
        for x in [Vec2::zeros(), Vec2::new(0.25, -0.1)] {
            let s = split_kernel(m.as_ref(), &cut, &x, &chi, &rho, &omega).unwrap();
            assert!(s.recomposition_defect() < 1e-8, "{} at {x:?} on {}", s.recomposition_defect(), m.name());
        }
    }
}

#[test]
fn curved_remainder_stays_bounded_near_the_diagonal() {
    let m = geps();
    let cut = CutoffSpec::default();
    let chi = default_chi();
    let rho: Vec<f64> = (0..=8).map(|i| 0.1 * 0.5f64.powi(i)).collect();
    let omega: Vec<f64> = (0..16).map(|q| TAU * q as f64 / 16.0).collect();
    let s = split_kernel(&m, &cut, &Vec2::zeros(), &chi, &rho, &omega).unwrap();
    let near = s.remainder_bound(1e-3);
    let far = s.remainder_bound(0.1);
    assert!(near.is_finite() && far.is_finite());
    assert!(near <= 1.5 * far + 1e-3, "remainder grows toward the diagonal: {near} vs {far}");
}

fn euclidean_decomposition(x_nodes: Vec<Vec2>) -> SymbolDecomposition {
    let st = FftSettings::default();
    let freq = FrequencyGrid::standard(st.extent);
    symbol_fft(&Euclidean::default(), &CutoffSpec::default(), &default_chi(), &x_nodes, &freq, &st).unwrap()
}

#[test]
fn euclidean_symbol_matches_radial_oracle() {
    let d = euclidean_decomposition(vec![Vec2::zeros()]);
    let chi = default_chi();
    let freq = &d.full.freq;
    for j in 0..freq.len() {
        let xi = freq.xi(j);
        let s = xi.norm();
        if s < 100.0 {
            continue;
        }
        let a = d.full.value(0, j);
        // ∫₀^∞ 2πρ · 2ρ⁻¹ J₀(ρs) χ(ρ) dρ
        let oracle = 4.0 * PI * hankel_chi(&chi, s);
        assert!((a.re - oracle).abs() < 0.05 * oracle, "|ξ| = {s}: {} vs {oracle}", a.re);
        // no warnings at the default resolution
        assert!(d.full.warnings.is_empty());
    }
}

#[test]
fn euclidean_symbol_is_real_for_even_kernel() {
    let d = euclidean_decomposition(vec![Vec2::zeros()]);
    for j in 0..d.full.freq.len() {
        let a = d.full.value(0, j);
        assert!(a.im.abs() <= 1e-8 * a.norm(), "{a}");
    }
}

#[test]
fn symbol_is_hermitian() {
    let st = FftSettings::default();
    let freq = FrequencyGrid::standard(st.extent);
    let d = symbol_fft(&geps(), &CutoffSpec::default(), &default_chi(), &[Vec2::new(0.3, 0.1)], &freq, &st).unwrap();
    let half = freq.n_dir / 2;
    for r in 0..freq.radii.len() {
        for dir in 0..half {
            let (j, jm) = (r * freq.n_dir + dir, r * freq.n_dir + dir + half);
            if freq.lattice[jm] != (-freq.lattice[j].0, -freq.lattice[j].1) {
                continue;
            }
            let (a, b) = (d.full.value(0, j), d.full.value(0, jm));
            assert!((a - b.conj()).norm() <= 1e-9 * a.norm().max(1e-12), "{a} vs {b}");
        }
    }
}

#[test]
fn symbol_of_zero_kernel_is_zero() {
    // ψ vanishes at x, so k(x, ·) ≡ 0
    let st = FftSettings::default();
    let freq = FrequencyGrid::standard(st.extent);
    let d = symbol_fft(&geps(), &CutoffSpec::default(), &default_chi(), &[Vec2::new(0.9, 0.0)], &freq, &st).unwrap();
    for s in &d.full.stencil {
        assert!(s.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }
}

#[test]
fn coarse_fft_of_a_sharp_cutoff_warns_about_aliasing() {
    let st = FftSettings { n: 64, ..FftSettings::default() };
    let freq = FrequencyGrid::log_radial(st.extent, 2.0, 30.0, 6, 8);
    let cut = CutoffSpec::new(RadialCutoff::new(0.5, 0.52), RadialCutoff::new(0.5, 0.52));
    let d = symbol_fft(&geps(), &cut, &default_chi(), &[Vec2::new(0.1, 0.0)], &freq, &st).unwrap();
    assert!(!d.full.warnings.is_empty(), "alias fraction {:?}", d.alias_fraction);
}

#[test]
fn frequency_lattice_mismatch_is_rejected() {
    let st = FftSettings::default();
    let freq = FrequencyGrid::standard(2.0 * st.extent);
    let r = symbol_fft(&geps(), &CutoffSpec::default(), &default_chi(), &[Vec2::zeros()], &freq, &st);
    assert!(matches!(r, Err(SymbolError::Settings(_))));
}

#[test]
fn calibrated_constant_is_four_pi() {
    let c = default_calibration();
    assert!((c.constant - 4.0 * PI).abs() < 1e-6, "{}", c.constant);
    assert!(c.spread < 1e-6);
}

/// Plateau value: least-squares constant of a₋₁·|ξ|_g over the band, and the
/// largest pointwise deviation from it.
fn plateau(m: &dyn MetricField, x: &Vec2, band: (f64, f64), c: f64) -> (f64, f64) {
    let cut = CutoffSpec::default();
    let chi = default_chi();
    let g = m.eval(x);
    let n = 64;
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let s = band.0 * (band.1 / band.0).powf(i as f64 / (n - 1) as f64);
            let xi = unit(0.37 + 1.1 * i as f64) * s;
            principal_symbol(m, &cut, &chi, x, &xi, c).unwrap() * conorm_g(&g, &xi)
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let dev = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    (mean, dev)
}

#[test]
fn principal_symbol_plateau_matches_the_constant() {
    let c = default_calibration().constant;
    let band = (16.0 * TAU / 4.0, 64.0 * TAU / 4.0);
    let euc = Euclidean::default();
    let curved = geps();
    for x in [Vec2::zeros(), Vec2::new(0.3, 0.2), Vec2::new(-0.4, 0.1)] {
        for m in [&euc as &dyn MetricField, &curved] {
            let (mean, _) = plateau(m, &x, band, c);
            assert!((mean - c).abs() < 0.05 * c, "plateau {mean} vs {c}");
        }
    }
}

#[test]
fn principal_symbol_is_elliptic_on_the_identity_region() {
    let c = default_calibration().constant;
    let cut = CutoffSpec::default();
    let chi = default_chi();
    let m = geps();
    let mut lo = f64::INFINITY;
    for x in [Vec2::zeros(), Vec2::new(0.4, 0.3), Vec2::new(-0.5, 0.0)] {
        let g = m.eval(&x);
        for i in 0..40 {
            let s = 10.0 * 100f64.powf(i as f64 / 39.0);
            let xi = unit(0.3 * i as f64) * s;
            lo = lo.min(principal_symbol(&m, &cut, &chi, &x, &xi, c).unwrap() * conorm_g(&g, &xi));
        }
    }
    assert!(lo > 0.5 * c, "c0 = {lo}");
}

#[test]
fn principal_symbol_is_homogeneous_of_degree_minus_one() {
    let c = default_calibration().constant;
    let cut = CutoffSpec::default();
    let chi = default_chi();
    let m = geps();
    let x = Vec2::new(0.2, -0.1);
    let dir = unit(0.8);
    let xs: Vec<f64> = (0..24).map(|i| 50.0 * 10f64.powf(i as f64 / 23.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|s| principal_symbol(&m, &cut, &chi, &x, &(dir * *s), c).unwrap()).collect();
    let f = power_fit(&xs, &ys).unwrap();
    assert!((f.slope + 1.0).abs() < 0.1, "{f:?}");
    let lead = c / conorm_g(&m.eval(&x), &dir);
    let last = ys.last().unwrap() * xs.last().unwrap();
    assert!((last - lead).abs() < 1e-3 * lead, "{last} vs {lead}");
}

#[test]
fn principal_symbol_vanishes_where_psi_does() {
    let c = default_calibration().constant;
    let x = Vec2::new(0.0, 0.9);
    for s in [5.0, 50.0, 500.0] {
        let v = principal_symbol(&geps(), &CutoffSpec::default(), &default_chi(), &x, &Vec2::new(s, 0.3 * s), c).unwrap();
        assert_eq!(v, 0.0);
    }
}

#[test]
fn principal_symbol_rejects_zero_frequency() {
    let r = principal_symbol(&geps(), &CutoffSpec::default(), &default_chi(), &Vec2::zeros(), &Vec2::zeros(), 1.0);
    assert!(matches!(r, Err(SymbolError::ZeroFrequency)));
}

#[test]
fn tail_symbol_decays_on_finite_regularity_metric() {
    let m = finite(10);
    let cut = CutoffSpec::default();
    let chi = default_chi();
    let x = Vec2::new(0.1, 0.1);
    let samples: Vec<(f64, f64)> = (0..400)
        .map(|i| {
            let s = 20.0 * 40f64.powf(i as f64 / 399.0);
            (s, b_symbol(&m, &cut, &chi, &x, &Vec2::new(s, 0.0)).unwrap())
        })
        .collect();
    let f = envelope_fit(&samples, 40.0, 400.0).unwrap();
    assert!(f.slope <= -7.5, "{f:?}");
}

#[test]
fn exact_symbol_has_expected_exponents() {
    let freq = FrequencyGrid::standard(4.0);
    let sym = SymbolGrid::from_fn(vec![Vec2::zeros()], freq, SymbolClass::classical(-1.0, None), |_, xi| {
        Complex64::new((1.0 + xi.norm_squared()).powf(-0.5), 0.0)
    });
    let rep = seminorm_check(&sym, -1.0, 2).unwrap();
    for (row, want) in rep.rows.iter().zip([-1.0, -2.0, -3.0]) {
        assert!((row.exponent - want).abs() < 0.1, "{row:?}");
    }
    assert!(rep.pass());
    assert!(rep.x_row.is_none());
}

#[test]
fn too_narrow_band_is_rejected() {
    let freq = FrequencyGrid::standard(4.0);
    let sym = SymbolGrid::from_fn(vec![Vec2::zeros()], freq, SymbolClass::classical(-1.0, None), |_, _| {
        Complex64::new(1.0, 0.0)
    });
    assert!(matches!(seminorm_check_band(&sym, -1.0, 1, (20.0, 60.0)), Err(SymbolError::FitRange(_))));
}

#[test]
fn computed_symbols_satisfy_seminorm_bounds() {
    let st = FftSettings::default();
    let freq = FrequencyGrid::standard(st.extent);
    let cut = CutoffSpec::default();
    let metrics: Vec<Box<dyn MetricField>> = vec![Box::new(Euclidean::default()), Box::new(geps())];
    for m in &metrics {
        let d = symbol_fft(m.as_ref(), &cut, &default_chi(), &interior_points(), &freq, &st).unwrap();
        let a = seminorm_check(&d.full, -1.0, 2).unwrap();
        assert!(a.pass(), "a: {:?} {:?}", a.rows, a.x_row);
        assert!((a.rows[0].exponent + 1.0).abs() < 0.1, "{:?}", a.rows[0]);
        let c = seminorm_check(&d.lower, -2.0, 1).unwrap();
        assert!(c.pass(), "c: {:?} {:?}", c.rows, c.x_row);
    }
}

/// max |D⁴_{y₁} K̃(x, y)| over sample points, by fourth differences with step `h`.
fn fourth_difference(m: &dyn MetricField, x: &Vec2, ys: &[Vec2], h: f64) -> f64 {
    let cut = CutoffSpec::default();
    let kt = |y: Vec2| kernel_eval(m, &cut, x, &(x - y)).unwrap();
    ys.iter()
        .map(|y| {
            let e = Vec2::new(h, 0.0);
            let v = kt(y - 2.0 * e) - 4.0 * kt(y - e) + 6.0 * kt(*y) - 4.0 * kt(y + e) + kt(y + 2.0 * e);
            (v / h.powi(4)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn off_diagonal_kernel_derivatives_stay_bounded_under_refinement() {
    let m = finite(6);
    let x = Vec2::new(-0.1, 0.0);
    let ys = [Vec2::new(0.2, 0.1), Vec2::new(0.35, -0.2), Vec2::new(-0.1, 0.3), Vec2::new(0.3, 0.0)];
    let coarse = fourth_difference(&m, &x, &ys, 0.04);
    let fine = fourth_difference(&m, &x, &ys, 0.02);
    assert!(fine.is_finite() && coarse > 0.0);
    assert!(fine <= 2.0 * coarse, "{fine} vs {coarse}");
}
