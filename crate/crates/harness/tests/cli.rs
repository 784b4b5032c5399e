use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gxr_harness::suite::sha256_hex;
use gxr_harness::{cli_run, ExperimentConfig, EXIT_ERROR, EXIT_USAGE};

fn scratch(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("experiment.toml");
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> i32 {
    cli_run(std::iter::once("gxr").chain(args.iter().copied()))
}

fn run_in(dir: &Path, cmd: &str, config: &Path, extra: &[&str]) -> i32 {
    let (c, o) = (config.to_str().unwrap(), dir.join("out"));
    let mut args = vec![cmd, "--config", c, "--out", o.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

const SMALL: &str = "[metric]\nfamily = \"euclidean\"\n[grid]\ndims = 16\n[fan]\nn_theta = 12\nn_alpha = 6\n";

fn csv_digests(dir: &Path) -> BTreeMap<String, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), sha256_hex(&fs::read(&p).unwrap())))
        .collect()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["reticulate"]), 2);
    assert_eq!(run(&[]), 2);
    assert_eq!(run(&["forward", "--workers", "many"]), 2);
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]), 0);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let d = scratch("unknown_key");
    let c = write_config(&d, "[metric]\nfamily = \"euclidean\"\nradius = 2\n");
    assert_eq!(run_in(&d, "forward", &c, &[]), EXIT_USAGE);
    assert!(!d.join("out").exists());
}

#[test]
fn forward_of_zero_phantom_writes_a_zero_sinogram() {
    let d = scratch("forward_zero");
    let text = format!("{SMALL}[phantom]\nkind = \"zero\"\n");
    let c = write_config(&d, &text);
    assert_eq!(run_in(&d, "forward", &c, &[]), 0);
    let csv = fs::read_to_string(d.join("out/sinogram.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "theta,alpha,value");
    assert_eq!(lines.len(), 1 + 12 * 6 + 1);
    for row in &lines[1..lines.len() - 1] {
        assert_eq!(row.rsplit(',').next().unwrap().parse::<f64>().unwrap(), 0.0, "{row}");
    }
    let hash = ExperimentConfig::parse(&text).unwrap().hash();
    assert_eq!(*lines.last().unwrap(), format!("# config_hash={hash}"));
    let pgm = fs::read_to_string(d.join("out/sinogram.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n6 12\n65535\n"));
}

#[test]
fn every_csv_has_a_header_and_a_hash_trailer() {
    let d = scratch("trailers");
    let c = write_config(&d, SMALL);
    for cmd in ["simplicity", "forward", "normal"] {
        assert_eq!(run_in(&d, cmd, &c, &[]), 0, "{cmd}");
    }
    let digests = csv_digests(&d.join("out"));
    assert_eq!(digests.len(), 4, "{digests:?}");
    let hash = ExperimentConfig::parse(SMALL).unwrap().hash();
    for name in digests.keys() {
        let text = fs::read_to_string(d.join("out").join(name)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.len() >= 3 && !lines[0].starts_with('#') && lines[0].contains(','), "{name}");
        assert_eq!(*lines.last().unwrap(), format!("# config_hash={hash}"), "{name}");
    }
}

#[test]
fn parametrix_and_reconstruct_need_a_calibration() {
    let d = scratch("no_calibration");
    let c = write_config(&d, SMALL);
    assert_eq!(run_in(&d, "parametrix", &c, &[]), EXIT_ERROR);
    assert_eq!(run_in(&d, "reconstruct", &c, &[]), EXIT_ERROR);
    assert!(!d.join("out/trace.csv").exists());
}

#[test]
fn calibration_for_another_chi_is_rejected() {
    let d = scratch("other_chi");
    let c = write_config(&d, SMALL);
    assert_eq!(run_in(&d, "calibrate", &c, &[]), 0);
    let c2 = write_config(&d, &format!("{SMALL}[cutoff]\nchi_inner = 0.2\n"));
    assert_eq!(run_in(&d, "reconstruct", &c2, &[]), EXIT_ERROR);
}

#[test]
fn calibrate_then_reconstruct() {
    let d = scratch("reconstruct");
    let c = write_config(&d, "[metric]\nfamily = \"euclidean\"\n[grid]\ndims = 32\n");
    assert_eq!(run_in(&d, "calibrate", &c, &[]), 0);
    let cal = fs::read_to_string(d.join("out/calibration.txt")).unwrap();
    let constant: f64 = cal.lines().find_map(|l| l.strip_prefix("constant = ")).unwrap().parse().unwrap();
    assert!((constant - 4.0 * std::f64::consts::PI).abs() < 1e-6, "{constant}");
    assert_eq!(run_in(&d, "reconstruct", &c, &[]), 0);
    let trace = fs::read_to_string(d.join("out/trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,residual,error,"));
    let last: Vec<&str> = trace.lines().rev().nth(1).unwrap().split(',').collect();
    assert!(last[0].parse::<usize>().unwrap() <= 30, "{last:?}");
    assert!(last[2].parse::<f64>().unwrap() < 1e-2, "{last:?}");
    assert!(d.join("out/reconstruction.pgm").exists());
}

#[test]
fn calibrate_then_parametrix() {
    let d = scratch("parametrix");
    let c = write_config(&d, "[metric]\nfamily = \"gaussian\"\n[grid]\ndims = 32\n");
    assert_eq!(run_in(&d, "calibrate", &c, &[]), 0);
    assert_eq!(run_in(&d, "parametrix", &c, &[]), 0);
    let csv = fs::read_to_string(d.join("out/smoothing.csv")).unwrap();
    assert!(csv.starts_with("level,band,"));
    assert!(fs::read_to_string(d.join("out/parametrix.txt")).unwrap().contains("tau_hat"));
}

#[test]
fn simplicity_reports_a_conjugate_point() {
    let d = scratch("simplicity");
    let c = write_config(&d, "[metric]\nfamily = \"constant_curvature\"\ncurvature = 4\n");
    assert_eq!(run_in(&d, "simplicity", &c, &[]), 0);
    let csv = fs::read_to_string(d.join("out/simplicity.csv")).unwrap();
    assert!(csv.contains("simple,false"), "{csv}");
    let t: f64 = csv.lines().find_map(|l| l.strip_prefix("conjugate_witness_t,")).unwrap().parse().unwrap();
    assert!((t - std::f64::consts::FRAC_PI_2).abs() < 0.05 * std::f64::consts::FRAC_PI_2, "{t}");
}

#[test]
fn symbol_runs_on_the_configured_metric() {
    let d = scratch("symbol");
    let c = write_config(&d, "[metric]\nfamily = \"gaussian\"\n");
    assert_eq!(run_in(&d, "symbol", &c, &[]), 0);
    let csv = fs::read_to_string(d.join("out/seminorms.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.ends_with(",true")).count(), csv.lines().count() - 2, "{csv}");
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let d1 = scratch("workers_1");
    let d3 = scratch("workers_3");
    let text = "[metric]\nfamily = \"gaussian\"\n[grid]\ndims = 16\n[fan]\nn_theta = 24\nn_alpha = 12\n";
    for (d, w) in [(&d1, "1"), (&d3, "3")] {
        let c = write_config(d, text);
        for cmd in ["forward", "normal", "calibrate", "reconstruct"] {
            assert_eq!(run_in(d, cmd, &c, &["--workers", w]), 0, "{cmd}");
        }
    }
    let (a, b) = (csv_digests(&d1.join("out")), csv_digests(&d3.join("out")));
    assert_eq!(a.len(), 5);
    assert_eq!(a, b);
}

#[test]
fn seed_flag_is_part_of_the_hash() {
    let d = scratch("seed");
    let c = write_config(&d, &format!("{SMALL}[phantom]\nkind = \"zero\"\n"));
    assert_eq!(run_in(&d, "forward", &c, &["--seed", "1"]), 0);
    let a = fs::read_to_string(d.join("out/sinogram.csv")).unwrap();
    assert_eq!(run_in(&d, "forward", &c, &["--seed", "2"]), 0);
    let b = fs::read_to_string(d.join("out/sinogram.csv")).unwrap();
    assert_ne!(a.lines().last(), b.lines().last());
    assert_eq!(a.lines().count(), b.lines().count());
}

#[test]
fn verify_on_the_default_config_exits_zero() {
    let d = scratch("verify_default");
    let out = d.join("out");
    assert_eq!(run(&["verify", "--out", out.to_str().unwrap()]), 0);
    let summary = fs::read_to_string(out.join("verify.csv")).unwrap();
    assert!(summary.lines().skip(1).filter(|l| !l.starts_with('#')).all(|l| l.ends_with(",true")), "{summary}");
    for c in 1..=10 {
        assert!(summary.lines().any(|l| l.starts_with(&format!("{c},"))), "criterion {c} missing");
    }
}
