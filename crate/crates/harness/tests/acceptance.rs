//! The ten acceptance criteria, one `[PASS]`/`[FAIL]` line each.
//!
//! Criteria 1 to 9 run on the Euclidean metric and on the Gaussian
//! perturbation with epsilon = 0.2. Criterion 10 runs `gxr verify` twice on
//! the default config, once with one worker and once with three, and
//! requires every CSV to be byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gxr_harness::suite::{self, sha256_hex};
use gxr_harness::{cli_run, CalibrationRecord, Check, Outcome, SuiteParams};

fn scratch(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn gxr(args: &[&str]) -> i32 {
    cli_run(std::iter::once("gxr").chain(args.iter().copied()))
}

/// Prints past the test harness's output capture.
fn show(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

fn csv_digests(dir: &Path) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "csv") {
            m.insert(p.file_name().unwrap().to_string_lossy().into_owned(), sha256_hex(&fs::read(&p).unwrap()));
        }
    }
    m
}

fn verify_runs_agree() -> Outcome {
    let start = Instant::now();
    let mut o = Outcome {
        id: 10,
        title: "verify output identical under 1 and 3 workers".into(),
        checks: Vec::new(),
        tables: Vec::new(),
        seconds: 0.0,
    };
    let mut digests = Vec::new();
    for w in ["1", "3"] {
        let dir = scratch(&format!("verify_w{w}"));
        let code = gxr(&["verify", "--out", dir.to_str().unwrap(), "--workers", w, "--seed", "7"]);
        o.checks.push(Check::flag(format!("verify with {w} worker(s) completed (exit {code})"), code == 0 || code == 1));
        digests.push(csv_digests(&dir));
    }
    let (a, b) = (&digests[0], &digests[1]);
    o.checks.push(Check::above("csv files written", a.len() as f64, 10.0));
    o.checks.push(Check::flag("same csv file set", a.keys().eq(b.keys())));
    let differing: Vec<&String> = a.iter().filter(|(k, h)| b.get(*k) != Some(*h)).map(|(k, _)| k).collect();
    o.checks.push(Check::flag(format!("byte-identical csv files (differing: [{}])", differing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ")), differing.is_empty()));
    o.seconds = start.elapsed().as_secs_f64();
    o
}

#[test]
fn acceptance() {
    let cal_dir = scratch("calibration");
    assert_eq!(gxr(&["calibrate", "--out", cal_dir.to_str().unwrap()]), 0);
    let cal = CalibrationRecord::load(&cal_dir, (0.25, 0.5)).unwrap();
    show(&format!("calibrated C = {:.12} (spread {:.2e})", cal.constant, cal.spread));

    let p = SuiteParams::acceptance(cal.constant);
    let mut outcomes = Vec::new();
    let record = |o: Outcome, all: &mut Vec<Outcome>| {
        show(&format!("{}\n    wall time {:.1} s", o.report(), o.seconds));
        all.push(o);
    };
    record(suite::forward_exactness(&p), &mut outcomes);
    record(suite::normal_identity(&p), &mut outcomes);
    record(suite::kernel_quadrature(&p), &mut outcomes);
    let (c4, c6) = suite::symbol_criteria(&p);
    record(c4, &mut outcomes);
    record(suite::remainder_decay(&p), &mut outcomes);
    record(c6, &mut outcomes);
    record(suite::parametrix_smoothing(&p), &mut outcomes);
    record(suite::round_trip(&p), &mut outcomes);
    record(suite::injectivity(&p), &mut outcomes);
    record(verify_runs_agree(), &mut outcomes);

    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.headline()).collect();
    show(&format!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len()));
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
