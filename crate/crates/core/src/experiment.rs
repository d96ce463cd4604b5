//! Monte Carlo sweeps comparing the bounds with the errors they control.
//!
//! Every trial draws its own instance from a seed derived from
//! `(seed, n, r, trial)`, so trials can run in any order or in parallel and
//! still aggregate to identical means.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bounds::{
    bound_projection_via_sin_theta, format_float, projection_error, thm1_constant, PerturbationInstance,
};
use crate::error::{domain, Error, Result};
use crate::matrix::io::Metadata;
use crate::matrix::{sample_gaussian_with, sample_haar_frame_with, RngSeed};
use crate::norms::SchattenIndex;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decay {
    /// `σ_i = 10 / i`.
    Polynomial,
    /// `σ_i = 2^{5 − i}`.
    Exponential,
}

impl Decay {
    pub fn spectrum(self, r: usize) -> Vec<f64> {
        (1..=r)
            .map(|i| match self {
                Decay::Polynomial => 10.0 / i as f64,
                Decay::Exponential => 2f64.powi(5 - i as i32),
            })
            .collect()
    }
}

impl fmt::Display for Decay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decay::Polynomial => "polynomial",
            Decay::Exponential => "exponential",
        })
    }
}

impl FromStr for Decay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "polynomial" | "poly" => Ok(Decay::Polynomial),
            "exponential" | "exp" => Ok(Decay::Exponential),
            other => Err(domain(format!("unknown decay '{other}' (polynomial or exponential)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    /// `‖Â − A‖_q` against the estimation bounds.
    Estimation,
    /// `‖P_{Û⊥} A‖_q` against the projection bounds.
    Projection,
}

impl Study {
    /// Names of the averaged columns after `mean_true`.
    pub fn bound_columns(self) -> &'static [&'static str] {
        match self {
            Study::Estimation => &["thm1", "triangle", "rank_spectral"],
            Study::Projection => &["thm2", "projection_via_sin_theta"],
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Study::Estimation => "estimation",
            Study::Projection => "projection",
        })
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "estimation" => Ok(Study::Estimation),
            "projection" => Ok(Study::Projection),
            other => Err(domain(format!("unknown study '{other}' (estimation or projection)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Ambient dimensions; the matrices are `n × n`.
    pub n_grid: Vec<usize>,
    pub r_grid: Vec<usize>,
    pub sigma: f64,
    /// Adds the rank-one `u vᵀ` component to the noise.
    pub spike: bool,
    pub decay: Decay,
    pub trials: usize,
    pub q: SchattenIndex,
    pub seed: RngSeed,
    pub parallel: bool,
}

impl ExperimentConfig {
    /// `n = 100`, `r = 4, 6, …, 16`, `σ = 0.02`, spiked noise, polynomial
    /// decay, 100 trials, Frobenius norm.
    pub fn new(seed: RngSeed) -> Self {
        ExperimentConfig {
            n_grid: vec![100],
            r_grid: (4..=16).step_by(2).collect(),
            sigma: 0.02,
            spike: true,
            decay: Decay::Polynomial,
            trials: 100,
            q: SchattenIndex::two(),
            seed,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain("trials must be at least 1"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(domain(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(domain("n must list at least one positive dimension"));
        }
        if self.r_grid.is_empty() {
            return Err(domain("r must list at least one rank"));
        }
        for &n in &self.n_grid {
            if let Some(&r) = self.r_grid.iter().find(|&&r| r == 0 || r > n) {
                return Err(domain(format!("rank {r} outside 1..={n}")));
            }
        }
        Ok(())
    }

    /// Overrides fields from `key=value` pairs; unknown keys are rejected.
    pub fn apply(&mut self, meta: &Metadata) -> Result<()> {
        for (key, value) in meta {
            match key.as_str() {
                "n" => self.n_grid = parse_grid(value)?,
                "r" | "r_grid" => self.r_grid = parse_grid(value)?,
                "sigma" => self.sigma = parse_number(key, value)?,
                "spike" => self.spike = parse_switch(value)?,
                "decay" => self.decay = value.parse()?,
                "trials" => self.trials = parse_number(key, value)?,
                "q" => self.q = value.parse()?,
                "seed" => self.seed = RngSeed(parse_number(key, value)?),
                "parallel" => self.parallel = parse_switch(value)?,
                "study" => {}
                other => return Err(domain(format!("unknown configuration key '{other}'"))),
            }
        }
        Ok(())
    }
}

fn parse_number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| domain(format!("{key}: cannot parse '{value}'")))
}

/// `on`/`off`, `true`/`false`, `1`/`0`.
pub fn parse_switch(value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(domain(format!("expected on or off, got '{other}'"))),
    }
}

/// Comma-separated values, each either an integer or an inclusive
/// `start:stop[:step]` range. An empty string is the empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let mut grid = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        let num = |s: &str| parse_number::<usize>("grid", s);
        match fields.as_slice() {
            [single] => grid.push(num(single)?),
            [start, stop] | [start, stop, _] => {
                let step = if fields.len() == 3 { num(fields[2])? } else { 1 };
                if step == 0 {
                    return Err(domain(format!("grid step must be positive in '{part}'")));
                }
                grid.extend((num(start)?..=num(stop)?).step_by(step));
            }
            _ => return Err(domain(format!("cannot parse grid entry '{part}'"))),
        }
    }
    Ok(grid)
}

/// One random instance: `A = U Σ₁ Vᵀ`, `Z = u vᵀ + Z̃`.
pub fn generate_instance(cfg: &ExperimentConfig, n: usize, r: usize, trial: usize) -> Result<PerturbationInstance> {
    cfg.validate()?;
    if r == 0 || r > n {
        return Err(domain(format!("rank {r} outside 1..={n}")));
    }
    let mut rng = cfg.seed.derive(&[n as u64, r as u64, trial as u64]).rng();
    let u = sample_haar_frame_with(&mut rng, n, r)?;
    let v = sample_haar_frame_with(&mut rng, n, r)?;
    let mut z = sample_gaussian_with(&mut rng, n, n, cfg.sigma)?;
    if cfg.spike {
        let left = sample_haar_frame_with(&mut rng, n, 1)?;
        let right = sample_haar_frame_with(&mut rng, n, 1)?;
        z = &z + &(left.as_matrix() * &right.transposed());
    }
    PerturbationInstance::from_factors(u, &cfg.decay.spectrum(r), v, z)
}

/// Left-hand value first, then one value per bound column.
struct TrialOutcome {
    values: Vec<f64>,
    violated: bool,
}

fn run_trial(study: Study, cfg: &ExperimentConfig, n: usize, r: usize, trial: usize) -> Result<TrialOutcome> {
    let inst = generate_instance(cfg, n, r, trial)?;
    let q = cfg.q;
    let z_trunc = inst.z_truncated_norm(q);
    Ok(match study {
        Study::Estimation => {
            let truth = inst.estimation_error(q)?;
            let thm1 = thm1_constant(q) * z_trunc;
            let spectrum = inst.z_spectrum();
            let triangle = 2.0 * spectrum.norm(q);
            let rank_spectral = 2.0 * q.root(r as f64) * spectrum.values()[0];
            TrialOutcome {
                values: vec![truth, thm1, triangle, rank_spectral],
                violated: !tol::within_bound(truth, thm1),
            }
        }
        Study::Projection => {
            let (left, right) = projection_error(&inst, q)?;
            let thm2 = 2.0 * z_trunc;
            let via_sin = bound_projection_via_sin_theta(&inst, q)?.unwrap_or(f64::NAN);
            TrialOutcome {
                values: vec![left, thm2, via_sin],
                violated: !tol::within_bound(left, thm2) || !tol::within_bound(right, thm2),
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub r: usize,
    pub mean_true: f64,
    /// In the order of [`Study::bound_columns`].
    pub mean_bounds: Vec<f64>,
}

impl ResultRow {
    pub fn mean_of(&self, study: Study, column: &str) -> Option<f64> {
        study
            .bound_columns()
            .iter()
            .position(|&c| c == column)
            .map(|i| self.mean_bounds[i])
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub study: Study,
    pub rows: Vec<ResultRow>,
    pub trials: usize,
    pub seed: RngSeed,
    /// Trials on which the theorem bound was exceeded.
    pub violations: usize,
    pub wall_time: Duration,
}

impl PartialEq for ExperimentResult {
    /// Wall time is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.study == other.study
            && self.rows == other.rows
            && self.trials == other.trials
            && self.seed == other.seed
            && self.violations == other.violations
    }
}

impl ExperimentResult {
    pub fn row(&self, n: usize, r: usize) -> Option<&ResultRow> {
        self.rows.iter().find(|row| row.n == n && row.r == r)
    }
}

pub fn run_sweep(study: Study, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let started = Instant::now();
    let mut rows = Vec::new();
    let mut violations = 0;
    for &n in &cfg.n_grid {
        for &r in &cfg.r_grid {
            let outcomes: Vec<TrialOutcome> = if cfg.parallel {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| run_trial(study, cfg, n, r, t))
                    .collect::<Result<_>>()?
            } else {
                (0..cfg.trials)
                    .map(|t| run_trial(study, cfg, n, r, t))
                    .collect::<Result<_>>()?
            };
            let width = outcomes[0].values.len();
            let mut sums = vec![0.0; width];
            for outcome in &outcomes {
                for (sum, value) in sums.iter_mut().zip(&outcome.values) {
                    *sum += value;
                }
                violations += usize::from(outcome.violated);
            }
            let means: Vec<f64> = sums.iter().map(|s| s / cfg.trials as f64).collect();
            rows.push(ResultRow {
                n,
                r,
                mean_true: means[0],
                mean_bounds: means[1..].to_vec(),
            });
        }
    }
    Ok(ExperimentResult {
        study,
        rows,
        trials: cfg.trials,
        seed: cfg.seed,
        violations,
        wall_time: started.elapsed(),
    })
}

/// Averages of `‖Â − A‖_q` and the three estimation bounds.
pub fn run_estimation_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_sweep(Study::Estimation, cfg)
}

/// Averages of `‖P_{Û⊥} A‖_q`, `2‖Z_max(r)‖_q` and the sin-Θ route.
pub fn run_projection_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_sweep(Study::Projection, cfg)
}

pub fn csv_header(study: Study) -> String {
    let mut cols = vec!["n".to_string(), "r".to_string(), "mean_true".to_string()];
    cols.extend(study.bound_columns().iter().map(|c| format!("mean_{c}")));
    cols.push("trials".to_string());
    cols.push("seed".to_string());
    cols.join(",")
}

pub fn emit_csv<W: Write>(res: &ExperimentResult, mut sink: W) -> Result<()> {
    writeln!(sink, "{}", csv_header(res.study))?;
    for row in &res.rows {
        let mut cols = vec![row.n.to_string(), row.r.to_string(), format_float(row.mean_true)];
        cols.extend(row.mean_bounds.iter().map(|&m| format_float(m)));
        cols.push(res.trials.to_string());
        cols.push(res.seed.0.to_string());
        writeln!(sink, "{}", cols.join(","))?;
    }
    sink.flush()?;
    Ok(())
}

/// One qualitative ordering claim evaluated on a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderingCheck {
    pub description: String,
    pub passed: bool,
}

/// Per-row orderings, up to the bound slack: for estimation, `true ≤ thm1 ≤ triangle` and
/// `thm1 ≤ rank_spectral`; for projection, `thm2 ≤ projection_via_sin_theta`.
pub fn ordering_checks(res: &ExperimentResult) -> Vec<OrderingCheck> {
    let mut checks = Vec::new();
    let mut check = |row: &ResultRow, lhs: &str, rhs: &str, a: f64, b: f64| {
        checks.push(OrderingCheck {
            description: format!("n={} r={}: mean {lhs} <= mean {rhs}", row.n, row.r),
            passed: tol::within_bound(a, b),
        });
    };
    for row in &res.rows {
        let col = |c: &str| row.mean_of(res.study, c).expect("known column");
        match res.study {
            Study::Estimation => {
                check(row, "true", "thm1", row.mean_true, col("thm1"));
                check(row, "thm1", "triangle", col("thm1"), col("triangle"));
                check(row, "thm1", "rank_spectral", col("thm1"), col("rank_spectral"));
            }
            Study::Projection => {
                check(row, "true", "thm2", row.mean_true, col("thm2"));
                check(
                    row,
                    "thm2",
                    "projection_via_sin_theta",
                    col("thm2"),
                    col("projection_via_sin_theta"),
                );
            }
        }
    }
    checks
}
