//! Acceptance run: every criterion at full size, one PASS/FAIL line each.
//! A criterion fails when its suite fails or exceeds its time limit.
//! Lines go straight to stdout so they show without `--nocapture`.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use mwaring::selftest::{self, Outcome};

type Suite = Box<dyn FnOnce() -> Outcome>;

fn timed(limit: Option<u64>, suite: impl FnOnce() -> Outcome) -> (Outcome, Duration, bool) {
    let start = Instant::now();
    let outcome = suite();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|s| elapsed <= Duration::from_secs(s));
    (outcome, elapsed, in_time)
}

#[test]
fn acceptance() {
    let binary = Path::new(env!("CARGO_BIN_EXE_mwaring"));
    let runs: Vec<(Option<u64>, Suite)> = vec![
        (Some(30), Box::new(|| selftest::nilpotent_split(&[2, 3, 4, 5, 7, 9], &[2, 3, 4, 5]))),
        (Some(10), Box::new(|| selftest::power_jordan_type(40))),
        (Some(60), Box::new(|| selftest::census_bound(81))),
        (Some(30), Box::new(|| selftest::bn_charpoly(100, 0))),
        (Some(60), Box::new(|| selftest::bidiagonal_split(&[7, 11, 13, 25], &[2, 3], 8))),
        (Some(120), Box::new(|| selftest::semisimple_split(&[13, 17, 19, 23, 25], &[3, 4, 5], 0))),
        (
            Some(300),
            Box::new(|| {
                let plans = selftest::coverage_plans(&[3, 5, 7, 9, 11, 13], &[2, 3, 4], 10_000, 1_000);
                selftest::coverage(&plans, 1)
            }),
        ),
        (Some(30), Box::new(|| selftest::charpoly_agreement(500, 0))),
        (None, Box::new(move || selftest::determinism(binary, &[0, 7]))),
    ];

    let mut failed = Vec::new();
    let mut lines = Vec::new();
    for (limit, suite) in runs {
        let (outcome, elapsed, in_time) = timed(limit, suite);
        let passed = outcome.passed && in_time;
        let limit = limit.map_or("none".to_string(), |s| format!("{s} s"));
        lines.push(format!(
            "{} criterion {} {}: {} [{:.1} s, limit {limit}]",
            if passed { "PASS" } else { "FAIL" },
            outcome.id,
            outcome.name,
            outcome.summary,
            elapsed.as_secs_f64(),
        ));
        let mut out = std::io::stdout().lock();
        for detail in &outcome.details {
            writeln!(out, "    criterion {}: {detail}", outcome.id).unwrap();
        }
        if !passed {
            failed.push(outcome.id);
        }
    }
    let mut out = std::io::stdout().lock();
    for line in &lines {
        writeln!(out, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
