use gxr_harness::config::*;
use proptest::prelude::*;

const MINIMAL: &str = "[metric]\nfamily = \"euclidean\"\n";

fn full() -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentSection { name: "full".into(), output: "runs/full".into(), seed: 11, workers: 3 },
        metric: MetricSection {
            family: FamilyName::FiniteRegularity,
            epsilon: 0.15,
            k: 6,
            curvature: 2.5,
            center_x: -0.1,
            center_y: 0.25,
        },
        grid: GridSection { dims: 64, pad: 4 },
        fan: FanSection { n_theta: 90, n_alpha: 45 },
        cutoff: CutoffSection {
            psi_inner: 0.5,
            psi_outer: 0.8,
            phi_inner: 0.52,
            phi_outer: 0.9,
            chi_inner: 0.2,
            chi_outer: 0.45,
            zeta_inner: 1.5,
            zeta_outer: 3.5,
        },
        solver: SolverSection { max_iter: 40, tol: 1e-4 },
        phantom: PhantomSection { kind: PhantomKind::Disk, sigma: 0.1, radius: 0.3 },
    }
}

fn err(text: &str) -> String {
    ExperimentConfig::parse(text).unwrap_err().to_string()
}

#[test]
fn minimal_config_fills_defaults() {
    let c = ExperimentConfig::parse(MINIMAL).unwrap();
    assert_eq!(c, ExperimentConfig::default());
    assert_eq!(c.grid.dims, 128);
    assert_eq!(c.solver.max_iter, 30);
}

#[test]
fn fully_specified_config_round_trips() {
    let c = full();
    let text = c.serialize();
    assert_eq!(ExperimentConfig::parse(&text).unwrap(), c);
    // and the text itself is stable
    assert_eq!(ExperimentConfig::parse(&text).unwrap().serialize(), text);
}

#[test]
fn serialized_form_is_sections_of_flat_pairs() {
    let text = ExperimentConfig::default().serialize();
    assert!(text.contains("[grid]\ndims = 128\npad = 2\n"), "{text}");
    for line in text.lines().filter(|l| !l.is_empty() && !l.starts_with('[')) {
        assert!(line.contains(" = "), "{line}");
    }
}

#[test]
fn dotted_keys_work_at_top_level() {
    let c = ExperimentConfig::parse("grid.dims = 32\nsolver.tol = 1e-5\n[metric]\nfamily = \"gaussian\"\n").unwrap();
    assert_eq!(c.grid.dims, 32);
    assert_eq!(c.solver.tol, 1e-5);
    assert_eq!(c.metric.family, FamilyName::Gaussian);
}

#[test]
fn comments_and_integer_floats_are_accepted() {
    let c = ExperimentConfig::parse("# experiment\n[metric]\nfamily = \"gaussian\" # smooth\nepsilon = 1\n").unwrap();
    assert_eq!(c.metric.epsilon, 1.0);
}

#[test]
fn dims_must_be_a_power_of_two() {
    let e = err("grid.dims = 96\n[metric]\nfamily = \"euclidean\"\n");
    assert!(e.contains("grid.dims = 96") && e.contains("power of two"), "{e}");
    assert!(err("grid.pad = 3\n[metric]\nfamily = \"euclidean\"\n").contains("grid.pad"));
}

#[test]
fn unknown_key_lists_the_valid_keys() {
    let e = err("[metric]\nfamily = \"euclidean\"\n[grid]\nsize = 64\n");
    assert!(e.contains("`size`") && e.contains("`dims`") && e.contains("`pad`"), "{e}");
    assert!(e.contains("line 4"), "{e}");
}

#[test]
fn unknown_section_lists_the_valid_sections() {
    let e = err("[metric]\nfamily = \"euclidean\"\n[mesh]\ndims = 64\n");
    for s in ["`mesh`", "`grid`", "`solver`", "`cutoff`"] {
        assert!(e.contains(s), "{e}");
    }
}

#[test]
fn type_mismatch_is_reported() {
    let e = err("[metric]\nfamily = \"euclidean\"\n[grid]\ndims = \"large\"\n");
    assert!(e.contains("invalid type"), "{e}");
    let e = err("[metric]\nfamily = \"hyperbolic\"\n");
    assert!(e.contains("hyperbolic") && e.contains("euclidean"), "{e}");
}

#[test]
fn missing_required_key_is_reported() {
    assert!(err("[grid]\ndims = 64\n").contains("missing field `metric`"));
    assert!(err("[metric]\nepsilon = 0.1\n").contains("missing field `family`"));
}

#[test]
fn radii_must_be_ordered() {
    let e = err("[metric]\nfamily = \"euclidean\"\n[cutoff]\npsi_inner = 0.9\npsi_outer = 0.8\n");
    assert!(e.contains("cutoff.psi_inner") && e.contains("inner < outer"), "{e}");
    let e = err("[metric]\nfamily = \"euclidean\"\n[cutoff]\nzeta_inner = 4\nzeta_outer = 4\n");
    assert!(e.contains("zeta"), "{e}");
}

#[test]
fn other_invalid_values_are_rejected() {
    assert!(err("[metric]\nfamily = \"gaussian\"\nepsilon = -1.5\n").contains("metric.epsilon"));
    assert!(err("[metric]\nfamily = \"euclidean\"\n[solver]\nmax_iter = 0\n").contains("solver.max_iter"));
    assert!(err("[metric]\nfamily = \"euclidean\"\n[fan]\nn_alpha = 1\n").contains("fan resolution"));
    assert!(err("[metric]\nfamily = \"euclidean\"\n[phantom]\nsigma = 0\n").contains("phantom.sigma"));
}

#[test]
fn seeds_beyond_signed_range_are_rejected() {
    let mut c = ExperimentConfig::default();
    c.experiment.seed = u64::MAX;
    assert!(c.validate().unwrap_err().to_string().contains("experiment.seed"));
    c.experiment.seed = i64::MAX as u64;
    assert_eq!(ExperimentConfig::parse(&c.serialize()).unwrap(), c);
}

#[test]
fn hash_ignores_output_and_workers_only() {
    let a = full();
    let mut b = a.clone();
    b.experiment.output = "elsewhere".into();
    b.experiment.workers = 1;
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
    b.experiment.seed += 1;
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn families_carry_their_parameters() {
    let c = full();
    assert_eq!(
        c.metric.family(),
        gxr_geometry::MetricFamily::FiniteRegularity { k: 6, epsilon: 0.15, center: [-0.1, 0.25] }
    );
    assert_eq!(c.metric.family_named(FamilyName::ConstantCurvature), gxr_geometry::MetricFamily::ConstantCurvature {
        curvature: 2.5
    });
    let s = c.solver_settings();
    assert_eq!((s.max_iter, s.tol, s.pad), (40, 1e-4, 4));
    assert_eq!((s.zeta.inner, s.zeta.outer), (1.5, 3.5));
}

fn family() -> impl Strategy<Value = FamilyName> {
    prop_oneof![
        Just(FamilyName::Euclidean),
        Just(FamilyName::Gaussian),
        Just(FamilyName::ConstantCurvature),
        Just(FamilyName::FiniteRegularity)
    ]
}

proptest! {
    #[test]
    fn random_configs_round_trip(
        fam in family(),
        eps in -0.9f64..5.0,
        k in 2u32..20,
        curv in -3.0f64..30.0,
        center in (-1.0f64..1.0, -1.0f64..1.0),
        logdims in 3u32..10,
        radii in proptest::collection::vec((1e-3f64..2.0, 1e-6f64..2.0), 4),
        tol in 0.0f64..1.0,
        seed in 0..=i64::MAX as u64,
        name in "[a-z][a-z0-9_ -]{0,12}",
    ) {
        let mut c = ExperimentConfig::default();
        c.experiment.name = name;
        c.experiment.seed = seed;
        c.metric = MetricSection { family: fam, epsilon: eps, k, curvature: curv, center_x: center.0, center_y: center.1 };
        c.grid.dims = 1 << logdims;
        let r: Vec<(f64, f64)> = radii.iter().map(|&(a, d)| (a, a + d)).collect();
        c.cutoff = CutoffSection {
            psi_inner: r[0].0, psi_outer: r[0].1,
            phi_inner: r[1].0, phi_outer: r[1].1,
            chi_inner: r[2].0, chi_outer: r[2].1,
            zeta_inner: r[3].0, zeta_outer: r[3].1,
        };
        c.solver.tol = tol;
        let back = ExperimentConfig::parse(&c.serialize()).unwrap();
        prop_assert_eq!(back, c);
    }
}
