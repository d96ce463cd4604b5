//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed. The process
//! exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use schatten_perturb::constructions::{minimax_pair, tightness_constant, tightness_instance, TightnessParams};
use schatten_perturb::experiment::{emit_csv, run_sweep, Decay, ExperimentConfig, ExperimentResult, Study};
use schatten_perturb::verify::{self, Profile, Scope, VerifyOptions, VerifyReport};
use schatten_perturb::{Result, RngSeed, SchattenIndex};

const SEED: u64 = 20_240_917;

/// Slack on every bound comparison: `lhs ≤ bound + 1e-9·(1 + lhs)`.
const BOUND_SLACK: f64 = 1e-9;
const TIGHTNESS_ETA: f64 = 1e-3;
const TIGHTNESS_GAP: f64 = 2e-3;
const MINIMAX_SLACK: f64 = 1e-9;
const SEPARATION_TOL: f64 = 1e-10;
const TRIANGLE_GROWTH: f64 = 2.0;
const THM1_DRIFT: f64 = 0.30;

const BOUNDS_BUDGET: Duration = Duration::from_secs(120);
const ESTIMATION_BUDGET: Duration = Duration::from_secs(600);
const PROJECTION_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn q(value: f64) -> SchattenIndex {
    SchattenIndex::new(value).expect("valid exponent")
}

fn summarize(report: &VerifyReport, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        match report.check(name) {
            Some(c) => {
                ok &= c.passed();
                parts.push(format!("{name}: {}/{} failed", c.failures, c.cases));
                if let Some(first) = &c.first_failure {
                    parts.push(format!("first [{first}]"));
                }
            }
            None => {
                ok = false;
                parts.push(format!("{name}: missing"));
            }
        }
    }
    (ok, parts.join("; "))
}

fn criterion_1(report: &VerifyReport, elapsed: Duration) -> Result<Outcome> {
    let (ok, detail) = summarize(report, &["estimation bound"]);
    let in_budget = elapsed < BOUNDS_BUDGET;
    Ok(Outcome::new(
        ok && in_budget,
        format!(
            "estimation bound over 1000 instances x 5 exponents; {detail}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_2() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (qv, r) in [(1.0, 1), (1.5, 1), (2.0, 1), (f64::INFINITY, 1), (2.0, 3)] {
        let idx = q(qv);
        let params = TightnessParams::square(r, idx, TIGHTNESS_ETA)?;
        let inst = tightness_instance(&params)?;
        let ratio = inst.estimation_error(idx)? / inst.z_truncated_norm(idx);
        let gap = (ratio - tightness_constant(idx)).abs();
        ok &= gap <= TIGHTNESS_GAP;
        parts.push(format!("q={idx} r={r} ratio={ratio:.6} gap={gap:.2e}"));
    }
    Ok(Outcome::new(
        ok,
        format!("tightness at eta=1e-3 within 2e-3; {}", parts.join(", ")),
    ))
}

fn criterion_3(report: &VerifyReport) -> Result<Outcome> {
    let (ok, detail) = summarize(
        report,
        &[
            "projection bound",
            "refined projection bound",
            "refined projection bound below projection bound",
        ],
    );
    Ok(Outcome::new(ok, detail))
}

fn criterion_4() -> Result<Outcome> {
    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    let mut worst_sep = 0.0f64;
    for r in [1, 2] {
        for qv in [1.0, 2.0] {
            for xi in [0.5, 1.0] {
                let idx = q(qv);
                let pair = minimax_pair(r, idx, xi, 2 * r, 2 * r)?;
                let (e1, e2) = pair.estimator_errors()?;
                let margin = e1.max(e2) - pair.lower_bound();
                let sep = (pair.separation()? - idx.root(2.0) * xi).abs();
                ok &= margin >= -MINIMAX_SLACK && sep <= SEPARATION_TOL;
                worst_margin = worst_margin.min(margin);
                worst_sep = worst_sep.max(sep);
            }
        }
    }
    Ok(Outcome::new(
        ok,
        format!("8 pairs; min(max error - lower bound)={worst_margin:.3e}; max separation error={worst_sep:.2e}"),
    ))
}

fn criterion_5(report: &VerifyReport) -> Result<Outcome> {
    let (ok, detail) = summarize(report, &["sin-theta bound", "sin-theta bound below the PSD comparator"]);
    Ok(Outcome::new(ok, detail))
}

fn criterion_6(norms: &VerifyReport, subspace: &VerifyReport) -> Result<Outcome> {
    let checks: Vec<_> = norms.checks.iter().chain(&subspace.checks).collect();
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.to_string()).collect();
    let cases: usize = checks.iter().map(|c| c.cases).sum();
    let detail = if failed.is_empty() {
        format!("{} lemma checks, {cases} cases, zero failures", checks.len())
    } else {
        failed.join("; ")
    };
    Ok(Outcome::new(failed.is_empty() && !checks.is_empty(), detail))
}

fn sweep(study: Study, n_grid: Vec<usize>, decay: Decay) -> Result<ExperimentResult> {
    let cfg = ExperimentConfig {
        n_grid,
        decay,
        ..ExperimentConfig::new(RngSeed(SEED))
    };
    run_sweep(study, &cfg)
}

fn mean(res: &ExperimentResult, n: usize, r: usize, column: &str) -> f64 {
    let row = res.row(n, r).expect("row in grid");
    if column == "true" {
        row.mean_true
    } else {
        row.mean_of(res.study, column).expect("column in study")
    }
}

fn criterion_7() -> Result<Outcome> {
    let start = Instant::now();
    let res = sweep(Study::Estimation, vec![100, 300], Decay::Polynomial)?;
    let elapsed = start.elapsed();
    let mut ordering = true;
    let mut growth = true;
    let mut steady = true;
    let (mut min_growth, mut max_drift) = (f64::INFINITY, 0.0f64);
    for r in (4..=16).step_by(2) {
        for n in [100, 300] {
            let (t, thm1) = (mean(&res, n, r, "true"), mean(&res, n, r, "thm1"));
            ordering &= t <= thm1 && thm1 <= mean(&res, n, r, "triangle") && thm1 <= mean(&res, n, r, "rank_spectral");
        }
        let g = mean(&res, 300, r, "triangle") / mean(&res, 100, r, "triangle");
        let drift = (mean(&res, 300, r, "thm1") / mean(&res, 100, r, "thm1") - 1.0).abs();
        growth &= g > TRIANGLE_GROWTH;
        steady &= drift < THM1_DRIFT;
        min_growth = min_growth.min(g);
        max_drift = max_drift.max(drift);
    }
    let in_budget = elapsed < ESTIMATION_BUDGET;
    Ok(Outcome::new(
        ordering && growth && steady && in_budget,
        format!(
            "ordering {}; triangle growth min {min_growth:.3} (> 2: {}); thm1 drift max {:.1}% (< 30%: {}); {:.1}s",
            if ordering { "ok" } else { "violated" },
            growth,
            100.0 * max_drift,
            steady,
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_8() -> Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for decay in [Decay::Polynomial, Decay::Exponential] {
        let res = sweep(Study::Projection, vec![100], decay)?;
        let mut dominated = true;
        for r in (4..=16).step_by(2) {
            let (thm2, classical) = (
                mean(&res, 100, r, "thm2"),
                mean(&res, 100, r, "projection_via_sin_theta"),
            );
            if thm2 > classical {
                dominated = false;
                parts.push(format!("{decay} r={r}: thm2 {thm2:.4} > comparator {classical:.4}"));
            }
        }
        ok &= dominated;
        if decay == Decay::Exponential {
            let ratio = |r| mean(&res, 100, r, "projection_via_sin_theta") / mean(&res, 100, r, "thm2");
            let (low, high) = (ratio(4), ratio(16));
            ok &= high > low;
            parts.push(format!("exponential ratio r=4 {low:.3}, r=16 {high:.3}"));
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < PROJECTION_BUDGET;
    parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    Ok(Outcome::new(ok, parts.join("; ")))
}

fn run_cli(out: &PathBuf, extra: &[&str]) -> Result<std::process::ExitStatus> {
    let status = Command::new(env!("CARGO_BIN_EXE_schatten-perturb"))
        .args([
            "experiment",
            "estimation",
            "--seed",
            "11",
            "--trials",
            "10",
            "--r",
            "4:10:2",
        ])
        .args(extra)
        .arg("--out")
        .arg(out)
        .stderr(std::process::Stdio::null())
        .status()?;
    Ok(status)
}

fn criterion_9() -> Result<Outcome> {
    let dir = std::env::temp_dir().join(format!("schatten-perturb-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let (first, second, parallel) = (dir.join("first.csv"), dir.join("second.csv"), dir.join("parallel.csv"));
    run_cli(&first, &[])?;
    run_cli(&second, &[])?;
    run_cli(&parallel, &["--parallel"])?;
    let bytes = |p: &PathBuf| std::fs::read(p);
    let (a, b, c) = (bytes(&first)?, bytes(&second)?, bytes(&parallel)?);
    let cli_same = !a.is_empty() && a == b && a == c;

    let cfg = ExperimentConfig {
        r_grid: vec![4, 8],
        trials: 12,
        ..ExperimentConfig::new(RngSeed(SEED))
    };
    let serial = run_sweep(Study::Projection, &cfg)?;
    let threaded = run_sweep(Study::Projection, &ExperimentConfig { parallel: true, ..cfg })?;
    let bitwise = serial.rows.iter().zip(&threaded.rows).all(|(s, t)| {
        s.mean_true.to_bits() == t.mean_true.to_bits()
            && s.mean_bounds
                .iter()
                .map(|x| x.to_bits())
                .eq(t.mean_bounds.iter().map(|x| x.to_bits()))
    }) && serial.rows.len() == threaded.rows.len();
    let (mut sa, mut sb) = (Vec::new(), Vec::new());
    emit_csv(&serial, &mut sa)?;
    emit_csv(&threaded, &mut sb)?;
    std::fs::remove_dir_all(&dir)?;
    Ok(Outcome::new(
        cli_same && bitwise && sa == sb,
        format!("CLI reruns byte-identical: {cli_same}; parallel equals serial bitwise: {bitwise}"),
    ))
}

fn report(criterion: usize, outcome: Result<Outcome>) -> bool {
    let outcome = outcome.unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
    println!(
        "{} criterion {criterion}: {}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.detail
    );
    outcome.passed
}

fn suite(scope: Scope) -> Result<(VerifyReport, Duration)> {
    let start = Instant::now();
    let report = verify::run(&VerifyOptions::new(scope, RngSeed(SEED), Profile::Full))?;
    Ok((report, start.elapsed()))
}

fn main() {
    assert_eq!(
        schatten_perturb::tol::BOUND_SLACK,
        BOUND_SLACK,
        "verify suites must use the pinned bound slack"
    );
    let mut results = Vec::new();
    match suite(Scope::Bounds) {
        Ok((bounds, elapsed)) => {
            results.push(report(1, criterion_1(&bounds, elapsed)));
            results.push(report(2, criterion_2()));
            results.push(report(3, criterion_3(&bounds)));
            results.push(report(4, criterion_4()));
            results.push(report(5, criterion_5(&bounds)));
        }
        Err(e) => {
            for c in [1, 3, 5] {
                results.push(report(
                    c,
                    Err(schatten_perturb::Error::Domain(format!("bounds suite: {e}"))),
                ));
            }
            results.push(report(2, criterion_2()));
            results.push(report(4, criterion_4()));
        }
    }
    let lemmas = suite(Scope::Norms).and_then(|(n, _)| suite(Scope::Subspace).map(|(s, _)| (n, s)));
    results.push(report(6, lemmas.and_then(|(n, s)| criterion_6(&n, &s))));
    results.push(report(7, criterion_7()));
    results.push(report(8, criterion_8()));
    results.push(report(9, criterion_9()));

    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
