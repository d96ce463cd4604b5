//! Randomized property suites for every theorem and lemma the crate relies on.
//!
//! Each [`Check`] counts the cases it evaluated, the failures, and the largest
//! observed excess `lhs − rhs` (negative when every case held with room to
//! spare). Reports are deterministic functions of the seed and profile.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    bound_projection_via_sin_theta, bound_refined_projection, bound_sin_theta_thm5, bound_vu_psd,
    bound_wedin_reconstruction, bound_wedin_sin_theta, bound_yu_asym, bound_yu_lei_psd, projection_error,
    thm1_constant, PerturbationInstance,
};
use crate::constructions::{
    decaying_noise, minimax_pair, tightness_constant, tightness_instance, NoiseSpectrum, TightnessParams,
};
use crate::error::{domain, Error, Result};
use crate::matrix::{
    self, orthonormal_complement, sample_gaussian_with, sample_haar_frame_with, Matrix, OrthonormalFrame, RngSeed,
};
use crate::norms::{
    dual_witness, karamata_holds, ky_fan, schatten_norm, split_projection_bound, truncated_schatten_norm,
    SchattenIndex, SingularSpectrum,
};
use crate::subspace::{
    aligned_distance, principal_angles, procrustes_align, product_singular_bounds_hold, projection_distance,
    sin_theta_distance,
};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    All,
    Norms,
    Subspace,
    Bounds,
    Constructions,
}

impl Scope {
    fn includes(self, other: Scope) -> bool {
        self == Scope::All || self == other
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Scope::All),
            "norms" => Ok(Scope::Norms),
            "subspace" => Ok(Scope::Subspace),
            "bounds" => Ok(Scope::Bounds),
            "constructions" => Ok(Scope::Constructions),
            other => Err(domain(format!(
                "unknown scope '{other}' (all, norms, subspace, bounds, constructions)"
            ))),
        }
    }
}

/// Case counts: `Full` uses the published counts, `Ci` about a fifth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Ci,
    Full,
}

impl Profile {
    fn count(self, full: usize) -> usize {
        match self {
            Profile::Full => full,
            Profile::Ci => (full / 5).max(1),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Profile::Ci),
            "full" => Ok(Profile::Full),
            other => Err(domain(format!("unknown profile '{other}' (ci or full)"))),
        }
    }
}

/// Deliberate defects for exercising the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Replaces the estimation-bound constant by 1.
    Thm1Constant,
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm1-constant" => Ok(Fault::Thm1Constant),
            other => Err(domain(format!("unknown fault '{other}' (thm1-constant)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub scope: Scope,
    pub seed: RngSeed,
    pub profile: Profile,
    pub fault: Option<Fault>,
}

impl VerifyOptions {
    pub fn new(scope: Scope, seed: RngSeed, profile: Profile) -> Self {
        VerifyOptions {
            scope,
            seed,
            profile,
            fault: None,
        }
    }

    fn thm1_constant(&self, q: SchattenIndex) -> f64 {
        match self.fault {
            Some(Fault::Thm1Constant) => 1.0,
            None => thm1_constant(q),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub max_excess: f64,
    pub first_failure: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            cases: 0,
            failures: 0,
            max_excess: f64::NEG_INFINITY,
            first_failure: None,
        }
    }

    /// Records `lhs ≤ rhs + slack·(1 + |lhs|)`.
    fn at_most(&mut self, lhs: f64, rhs: f64, slack: f64, context: impl FnOnce() -> String) {
        let ok = lhs <= rhs + slack * (1.0 + lhs.abs());
        self.record(lhs - rhs, ok, context);
    }

    /// Records `|a − b| ≤ tolerance`.
    fn close(&mut self, a: f64, b: f64, tolerance: f64, context: impl FnOnce() -> String) {
        let gap = (a - b).abs();
        self.record(gap - tolerance, gap <= tolerance, context);
    }

    fn holds(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { 1.0 }, ok, context);
    }

    fn record(&mut self, excess: f64, ok: bool, context: impl FnOnce() -> String) {
        self.cases += 1;
        if excess.is_nan() {
            self.max_excess = f64::NAN;
        } else if !self.max_excess.is_nan() {
            self.max_excess = self.max_excess.max(excess);
        }
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(context());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} cases={} failures={} max_excess={:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.max_excess
        )?;
        if let Some(first) = &self.first_failure {
            write!(f, " first_failure=[{first}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        let failed = self.failed().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

pub fn run(options: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    if options.scope.includes(Scope::Norms) {
        checks.extend(norms_suite(options)?);
    }
    if options.scope.includes(Scope::Subspace) {
        checks.extend(subspace_suite(options)?);
    }
    if options.scope.includes(Scope::Bounds) {
        checks.extend(bounds_suite(options)?);
    }
    if options.scope.includes(Scope::Constructions) {
        checks.extend(constructions_suite(options)?);
    }
    Ok(VerifyReport { checks })
}

const Q_GRID: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

fn q_grid() -> impl Iterator<Item = SchattenIndex> {
    Q_GRID
        .iter()
        .map(|&q| SchattenIndex::new(q).expect("grid exponents are >= 1"))
}

fn stream(seed: RngSeed, check: u64) -> ChaCha8Rng {
    seed.derive(&[check]).rng()
}

fn gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Result<Matrix> {
    sample_gaussian_with(rng, m, n, 1.0)
}

fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Result<Matrix> {
    Ok(sample_haar_frame_with(rng, n, n)?.into_matrix())
}

/// Random matrix of rank at most `r`.
fn low_rank(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> Result<Matrix> {
    Ok(&gaussian(rng, m, r)? * &gaussian(rng, r, n)?)
}

fn norms_suite(opt: &VerifyOptions) -> Result<Vec<Check>> {
    let p = opt.profile;
    let mut out = Vec::new();

    let mut unitary = Check::new("truncated-norm unitary invariance");
    let mut rng = stream(opt.seed, 101);
    for case in 0..p.count(200) {
        let (m, n) = (rng.random_range(3..9), rng.random_range(3..9));
        let x = gaussian(&mut rng, m, n)?;
        let rotated = &(&orthogonal(&mut rng, m)? * &x) * &orthogonal(&mut rng, n)?;
        for q in q_grid() {
            for r in 1..=3 {
                let a = truncated_schatten_norm(&x, r, q)?;
                let b = truncated_schatten_norm(&rotated, r, q)?;
                unitary.close(a, b, 1e-9 * (1.0 + a), || format!("case {case} q={q} r={r}"));
            }
        }
    }
    out.push(unitary);

    let mut triangle = Check::new("truncated-norm triangle inequality");
    let mut homogeneity = Check::new("truncated-norm homogeneity and definiteness");
    let mut rng = stream(opt.seed, 102);
    for case in 0..p.count(500) {
        let (m, n) = (rng.random_range(2..8), rng.random_range(2..8));
        let a = gaussian(&mut rng, m, n)?;
        let b = gaussian(&mut rng, m, n)?.scaled(rng.random_range(0.1..3.0));
        let r = rng.random_range(1..=m.min(n));
        let lambda: f64 = rng.random_range(-4.0..4.0);
        for q in q_grid() {
            let sum = truncated_schatten_norm(&(&a + &b), r, q)?;
            let parts = truncated_schatten_norm(&a, r, q)? + truncated_schatten_norm(&b, r, q)?;
            triangle.at_most(sum, parts, 1e-9, || format!("case {case} q={q} r={r}"));
            let base = truncated_schatten_norm(&a, r, q)?;
            let scaled = truncated_schatten_norm(&a.scaled(lambda), r, q)?;
            homogeneity.close(scaled, lambda.abs() * base, 1e-10 * (1.0 + scaled), || {
                format!("case {case} q={q} lambda={lambda}")
            });
            homogeneity.holds(base > 0.0, || format!("case {case}: nonzero matrix with zero norm"));
        }
    }
    for q in q_grid() {
        let zero = truncated_schatten_norm(&Matrix::zeros(3, 4), 2, q)?;
        homogeneity.holds(zero == 0.0, || format!("zero matrix has norm {zero} at q={q}"));
    }
    out.push(triangle);
    out.push(homogeneity);

    let mut eckart = Check::new("truncated Eckart-Young");
    let mut rng = stream(opt.seed, 103);
    let draws = p.count(1000);
    for case in 0..draws.div_ceil(100) {
        let (m, n) = (rng.random_range(4..9), rng.random_range(4..9));
        let a = gaussian(&mut rng, m, n)?;
        let factors = matrix::svd(&a)?;
        let r = rng.random_range(1..m.min(n));
        let k = rng.random_range(1..=m.min(n));
        let tail = matrix::residual(&factors, r)?;
        let best = matrix::truncate(&factors, r)?;
        for q in q_grid() {
            let floor = truncated_schatten_norm(&tail, k, q)?;
            let at_best = truncated_schatten_norm(&(&a - &best), k, q)?;
            eckart.close(at_best, floor, 1e-10 * (1.0 + floor), || {
                format!("case {case} equality q={q}")
            });
        }
        for draw in 0..100.min(draws) {
            let candidate = low_rank(&mut rng, m, n, r)?.scaled(rng.random_range(0.1..2.0));
            // Right-multiplying the optimum keeps the rank at most r and probes its neighbourhood.
            let wiggle = &Matrix::identity(n) + &gaussian(&mut rng, n, n)?.scaled(1e-3);
            let near = &best * &wiggle;
            for q in q_grid() {
                let floor = truncated_schatten_norm(&tail, k, q)?;
                for m_try in [&candidate, &near] {
                    let value = truncated_schatten_norm(&(&a - m_try), k, q)?;
                    eckart.at_most(floor, value, 1e-9, || format!("case {case} draw {draw} q={q}"));
                }
            }
        }
    }
    out.push(eckart);

    let mut witness = Check::new("dual witness attains the truncated dual norm");
    let mut sandwich = Check::new("duality sandwich");
    let mut rng = stream(opt.seed, 104);
    for case in 0..p.count(1000) {
        let (m, n) = (rng.random_range(2..8), rng.random_range(2..8));
        let r = rng.random_range(1..=m.min(n));
        let x = gaussian(&mut rng, m, n)?;
        let b = low_rank(&mut rng, m, n, r)?;
        for q in q_grid() {
            let dual_norm = truncated_schatten_norm(&x, r, q.dual())?;
            let pairing = b.inner_product(&x)?.abs();
            sandwich.at_most(pairing, schatten_norm(&b, q)? * dual_norm, 1e-9, || {
                format!("case {case} q={q} r={r}")
            });
            if !q.is_infinite() && q.q() > 1.0 && case % 5 == 0 {
                let w = dual_witness(&x, r, q)?;
                witness.close(w.inner_product(&x)?, dual_norm, 1e-9 * (1.0 + dual_norm), || {
                    format!("case {case} q={q} r={r}: pairing")
                });
                witness.close(schatten_norm(&w, q)?, 1.0, 1e-9, || {
                    format!("case {case} q={q}: unit norm")
                });
                let rank = matrix::svd(&w)?.numerical_rank();
                witness.holds(rank <= r, || format!("case {case} q={q}: witness rank {rank} > {r}"));
            }
        }
    }
    out.push(witness);
    out.push(sandwich);

    let mut karamata = Check::new("Karamata power-sum domination");
    let mut rng = stream(opt.seed, 105);
    for case in 0..p.count(1000) {
        let y = descending(&mut rng, 8);
        let x = dominated(&mut rng, &y);
        let (xs, ys) = (SingularSpectrum::new(x)?, SingularSpectrum::new(y)?);
        for power in [1.5, 2.0, 4.0] {
            let cert = karamata_holds(&xs, &ys, power)?;
            karamata.holds(cert.prefix_dominated, || {
                format!("case {case}: generator broke domination")
            });
            karamata.at_most(cert.lhs_power_sum, cert.rhs_power_sum, 1e-9, || {
                format!("case {case} p={power}")
            });
        }
    }
    out.push(karamata);

    let mut split = Check::new("projection split bound");
    let mut rng = stream(opt.seed, 106);
    for case in 0..p.count(500) {
        let (m, n) = (rng.random_range(2..9), rng.random_range(1..9));
        let width = rng.random_range(1..m);
        let frame = sample_haar_frame_with(&mut rng, m, width)?;
        let (a, b) = (
            gaussian(&mut rng, m, n)?,
            gaussian(&mut rng, m, n)?.scaled(rng.random_range(0.1..3.0)),
        );
        for q in q_grid() {
            let s = split_projection_bound(&a, &b, &frame, q)?;
            split.at_most(s.combined, s.bound, 1e-9, || {
                format!("case {case} q={q} regime {:?}", s.regime)
            });
        }
    }
    out.push(split);

    let mut ky = Check::new("Ky Fan variational characterization");
    let mut rng = stream(opt.seed, 107);
    let x = gaussian(&mut rng, 10, 7)?;
    let s = 3;
    let top = ky_fan(&x, s)?;
    let factors = matrix::svd(&x)?;
    let (u, v) = (factors.left_frame(s)?, factors.right_frame(s)?);
    ky.close(trace_pairing(&u, &x, &v), top, 1e-9, || {
        "top singular frames".to_string()
    });
    ky.close(
        top,
        truncated_schatten_norm(&x, s, SchattenIndex::one())?,
        1e-12,
        || "q = 1 identity".into(),
    );
    for case in 0..p.count(10_000) {
        let u = sample_haar_frame_with(&mut rng, 10, s)?;
        let v = sample_haar_frame_with(&mut rng, 7, s)?;
        ky.at_most(trace_pairing(&u, &x, &v), top, 1e-9, || format!("frame pair {case}"));
    }
    out.push(ky);

    let mut monotone = Check::new("Schatten norm nonincreasing in q");
    let mut rng = stream(opt.seed, 108);
    let grid: Vec<SchattenIndex> = (0..=20)
        .map(|i| SchattenIndex::new(1.0 + 0.2 * i as f64))
        .chain([Ok(SchattenIndex::infinity())])
        .collect::<Result<_>>()?;
    for case in 0..p.count(50) {
        let (m, n) = (rng.random_range(1..8), rng.random_range(1..8));
        let x = gaussian(&mut rng, m, n)?;
        for pair in grid.windows(2) {
            let (lo, hi) = (schatten_norm(&x, pair[0])?, schatten_norm(&x, pair[1])?);
            monotone.at_most(hi, lo, 1e-12, || format!("case {case} {} -> {}", pair[0], pair[1]));
        }
    }
    out.push(monotone);
    Ok(out)
}

/// `tr(Uᵀ X V)`.
fn trace_pairing(u: &OrthonormalFrame, x: &Matrix, v: &OrthonormalFrame) -> f64 {
    (&(&u.transposed() * x) * v.as_matrix()).trace()
}

fn descending(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut y: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..5.0)).collect();
    y.sort_by(|a, b| b.total_cmp(a));
    y
}

/// A sequence weakly majorized by `y`: a random doubly stochastic average of
/// `y` (mixing adjacent entries) followed by entrywise shrinkage.
fn dominated(rng: &mut ChaCha8Rng, y: &[f64]) -> Vec<f64> {
    let mut x = y.to_vec();
    for _ in 0..rng.random_range(0..6) {
        let i = rng.random_range(0..x.len() - 1);
        let j = rng.random_range(i + 1..x.len());
        let t: f64 = rng.random();
        let (a, b) = (x[i], x[j]);
        x[i] = t * a + (1.0 - t) * b;
        x[j] = (1.0 - t) * a + t * b;
    }
    if rng.random_bool(0.5) {
        for v in &mut x {
            *v *= rng.random_range(0.5..=1.0);
        }
    }
    x.sort_by(|a, b| b.total_cmp(a));
    x
}

fn subspace_suite(opt: &VerifyOptions) -> Result<Vec<Check>> {
    let p = opt.profile;
    let mut out = Vec::new();
    let frame_pair = |rng: &mut ChaCha8Rng| -> Result<(OrthonormalFrame, OrthonormalFrame)> {
        let dim = rng.random_range(2..10);
        let width = rng.random_range(1..dim);
        Ok((
            sample_haar_frame_with(rng, dim, width)?,
            sample_haar_frame_with(rng, dim, width)?,
        ))
    };

    let mut spectral = Check::new("sin-theta spectral equality");
    let mut symmetry = Check::new("sin-theta symmetry");
    let mut rng = stream(opt.seed, 201);
    for case in 0..p.count(200) {
        let (u1, u2) = frame_pair(&mut rng)?;
        let sines = principal_angles(&u1, &u2)?.sines;
        let perp = orthonormal_complement(&u1)?;
        let mut via = matrix::singular_values(&(&perp.transposed() * u2.as_matrix()))?;
        via.resize(sines.len(), 0.0);
        via.reverse();
        for (i, (s, t)) in sines.iter().zip(&via).enumerate() {
            spectral.close(*s, *t, 1e-9, || format!("case {case} index {i}"));
        }
        for q in [SchattenIndex::one(), SchattenIndex::two(), SchattenIndex::infinity()] {
            let (a, b) = (sin_theta_distance(&u1, &u2, q)?, sin_theta_distance(&u2, &u1, q)?);
            symmetry.close(a, b, 1e-9, || format!("case {case} q={q}"));
        }
    }
    out.push(spectral);
    out.push(symmetry);

    let mut triangle = Check::new("sin-theta triangle inequality");
    let mut rng = stream(opt.seed, 202);
    for case in 0..p.count(500) {
        let dim = rng.random_range(2..9);
        let width = rng.random_range(1..dim);
        let f: Vec<OrthonormalFrame> = (0..3)
            .map(|_| sample_haar_frame_with(&mut rng, dim, width))
            .collect::<Result<_>>()?;
        for q in [SchattenIndex::one(), SchattenIndex::two(), SchattenIndex::infinity()] {
            let direct = sin_theta_distance(&f[0], &f[1], q)?;
            let detour = sin_theta_distance(&f[0], &f[2], q)? + sin_theta_distance(&f[1], &f[2], q)?;
            triangle.at_most(direct, detour, 1e-9, || format!("case {case} q={q}"));
        }
    }
    out.push(triangle);

    let mut rotation = Check::new("subspace distance rotation invariance");
    let mut rng = stream(opt.seed, 203);
    for case in 0..p.count(200) {
        let (u1, u2) = frame_pair(&mut rng)?;
        let common = orthogonal(&mut rng, u1.ambient_dim())?;
        let (r1, r2) = (orthogonal(&mut rng, u1.width())?, orthogonal(&mut rng, u1.width())?);
        let (v1, v2) = (u1.rotated(&common)?, u2.rotated(&common)?);
        let (w1, w2) = (u1.reparametrized(&r1)?, u2.reparametrized(&r2)?);
        for q in q_grid() {
            let base = sin_theta_distance(&u1, &u2, q)?;
            let proj = projection_distance(&u1, &u2, q)?;
            rotation.close(sin_theta_distance(&v1, &v2, q)?, base, 1e-10, || {
                format!("case {case} q={q} left")
            });
            rotation.close(sin_theta_distance(&w1, &w2, q)?, base, 1e-10, || {
                format!("case {case} q={q} right")
            });
            rotation.close(projection_distance(&v1, &v2, q)?, proj, 1e-10, || {
                format!("case {case} q={q} proj")
            });
            rotation.close(projection_distance(&w1, &w2, q)?, proj, 1e-10, || {
                format!("case {case} q={q} proj right")
            });
        }
    }
    out.push(rotation);

    let mut procrustes = Check::new("Procrustes sandwich [1, 2]");
    let mut projection = Check::new("projection-distance sandwich [1, 4]");
    let mut optimal = Check::new("Procrustes alignment optimal in Frobenius norm");
    let mut rng = stream(opt.seed, 204);
    for case in 0..p.count(500) {
        let (u1, u2) = frame_pair(&mut rng)?;
        let o = procrustes_align(&u1, &u2)?;
        optimal.holds(matrix::orthonormality_deviation(&o) <= tol::ORTHONORMALITY, || {
            format!("case {case}: alignment not orthogonal")
        });
        for q in q_grid() {
            let s = sin_theta_distance(&u1, &u2, q)?;
            let aligned = aligned_distance(&u1, &u2, q)?;
            procrustes.at_most(s, aligned, 1e-9, || format!("case {case} q={q} lower"));
            procrustes.at_most(aligned, 2.0 * s, 1e-9, || format!("case {case} q={q} upper"));
            let d = projection_distance(&u1, &u2, q)?;
            projection.at_most(s, d, 1e-9, || format!("case {case} q={q} lower"));
            projection.at_most(d, 4.0 * s, 1e-9, || format!("case {case} q={q} upper"));
        }
        if case < p.count(10) {
            let best = aligned_distance(&u1, &u2, SchattenIndex::two())?;
            for _ in 0..100 {
                let other = orthogonal(&mut rng, u1.width())?;
                let trial = (u1.as_matrix() - &(u2.as_matrix() * &other)).norm();
                optimal.at_most(best, trial, 1e-9, || {
                    format!("case {case}: sampled rotation beats alignment")
                });
            }
        }
    }
    out.push(procrustes);
    out.push(projection);
    out.push(optimal);

    let mut product = Check::new("product singular value relations");
    let mut rng = stream(opt.seed, 205);
    for case in 0..p.count(1000) {
        let (m, n, b) = (
            rng.random_range(1..=10),
            rng.random_range(1..=8),
            rng.random_range(1..=6),
        );
        let (a, bm) = (gaussian(&mut rng, m, n)?, gaussian(&mut rng, n, b)?);
        for q in q_grid() {
            let rel = product_singular_bounds_hold(&a, &bm, q)?;
            product.holds(rel.holds(), || format!("case {case} {m}x{n}x{b} q={q}"));
        }
    }
    out.push(product);
    Ok(out)
}

/// Random instance with `m, n ≤ 60`, `r ≤ 5`, noise level `σ ≤ 0.1`.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Result<PerturbationInstance> {
    let r = rng.random_range(1..=5);
    let m = rng.random_range(r.max(2)..=60);
    let n = rng.random_range(r.max(2)..=60);
    let mut spectrum: Vec<f64> = (0..r).map(|_| 10f64.powf(rng.random_range(-1.3..0.7))).collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let u = sample_haar_frame_with(rng, m, r)?;
    let v = sample_haar_frame_with(rng, n, r)?;
    let sigma = rng.random_range(0.0..0.1);
    let z = sample_gaussian_with(rng, m, n, sigma)?;
    PerturbationInstance::from_factors(u, &spectrum, v, z)
}

/// Symmetric PSD `A` of rank `r` plus PSD noise, so that `B` is PSD too.
pub fn random_psd_instance(rng: &mut ChaCha8Rng) -> Result<PerturbationInstance> {
    let r = rng.random_range(1..=5);
    let n = rng.random_range(r + 1..=40);
    let mut spectrum: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..3.0)).collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let u = sample_haar_frame_with(rng, n, r)?;
    let sigma = rng.random_range(0.0..0.05);
    let g = sample_gaussian_with(rng, n, n, sigma)?;
    let z = &g * &g.transposed();
    PerturbationInstance::from_factors(u.clone(), &spectrum, u, z)
}

fn bounds_suite(opt: &VerifyOptions) -> Result<Vec<Check>> {
    let p = opt.profile;
    let mut thm1 = Check::new("estimation bound");
    let mut thm2 = Check::new("projection bound");
    let mut refined = Check::new("refined projection bound");
    let mut refined_dominated = Check::new("refined projection bound below projection bound");
    let mut thm5 = Check::new("sin-theta bound");
    let mut dominance = Check::new("truncated norm below the full and rank-scaled norms");
    let mut classical = Check::new("classical comparators");
    let mut rng = stream(opt.seed, 301);
    for case in 0..p.count(1000) {
        let inst = random_instance(&mut rng)?;
        let r = inst.rank();
        for q in q_grid() {
            let ctx = |what: &str| format!("instance {case} q={q} r={r}: {what}");
            let z_trunc = inst.z_truncated_norm(q);
            let err = inst.estimation_error(q)?;
            thm1.at_most(err, opt.thm1_constant(q) * z_trunc, tol::BOUND_SLACK, || ctx("thm1"));

            let (left, right) = projection_error(&inst, q)?;
            thm2.at_most(left, 2.0 * z_trunc, tol::BOUND_SLACK, || ctx("left"));
            thm2.at_most(right, 2.0 * z_trunc, tol::BOUND_SLACK, || ctx("right"));
            let (rl, rr) = bound_refined_projection(&inst, q)?;
            refined.at_most(left, rl, tol::BOUND_SLACK, || ctx("left"));
            refined.at_most(right, rr, tol::BOUND_SLACK, || ctx("right"));
            refined_dominated.at_most(rl.max(rr), 2.0 * z_trunc, tol::BOUND_SLACK, || ctx("refined"));

            let (sl, sr) = inst.sin_theta(q)?;
            if let Some(b) = bound_sin_theta_thm5(&inst, q) {
                thm5.at_most(sl.max(sr), b, tol::BOUND_SLACK, || ctx("sin-theta"));
            }

            let spectrum = inst.z_spectrum();
            dominance.at_most(z_trunc, spectrum.norm(q), 1e-12, || ctx("full norm"));
            dominance.at_most(z_trunc, q.root(r as f64) * spectrum.values()[0], 1e-12, || {
                ctx("rank-scaled")
            });

            if let Some(b) = bound_wedin_reconstruction(&inst, q) {
                classical.at_most(err, b, tol::BOUND_SLACK, || ctx("wedin reconstruction"));
            }
            classical.at_most(err, 2.0 * spectrum.norm(q), tol::BOUND_SLACK, || ctx("triangle"));
            if let Some(b) = bound_wedin_sin_theta(&inst, q)? {
                classical.at_most(sl.max(sr), b, tol::BOUND_SLACK, || ctx("wedin sin-theta"));
            }
            if let Some(b) = bound_projection_via_sin_theta(&inst, q)? {
                classical.at_most(left.max(right), b, tol::BOUND_SLACK, || ctx("projection via sin-theta"));
            }
        }
    }

    let mut psd_order = Check::new("sin-theta bound below the PSD comparator");
    let mut psd = Check::new("PSD and asymmetric comparators");
    let mut rng = stream(opt.seed, 302);
    let two = SchattenIndex::two();
    for case in 0..p.count(200) {
        let inst = random_psd_instance(&mut rng)?;
        let (spec, frob) = (inst.z_spectrum().values()[0], inst.z_spectrum().norm(two));
        let trunc = inst.z_truncated_norm(two);
        let minimum = ((inst.rank() as f64).sqrt() * spec).min(frob);
        psd_order.at_most(trunc, minimum, 1e-12, || format!("instance {case}: truncated norm"));
        if let (Some(t5), Some(yl)) = (bound_sin_theta_thm5(&inst, two), bound_yu_lei_psd(&inst)) {
            psd_order.at_most(t5, yl, 1e-12, || format!("instance {case}: bounds"));
        }
        let (sl, _) = inst.sin_theta(two)?;
        for (name, bound) in [
            ("vu", bound_vu_psd(&inst)),
            ("yu-lei", bound_yu_lei_psd(&inst)),
            ("yu asymmetric", bound_yu_asym(&inst)),
        ] {
            if let Some(b) = bound {
                psd.at_most(sl, b, tol::BOUND_SLACK, || format!("instance {case}: {name}"));
            }
        }
    }
    Ok(vec![
        thm1,
        thm2,
        refined,
        refined_dominated,
        thm5,
        dominance,
        classical,
        psd_order,
        psd,
    ])
}

fn constructions_suite(opt: &VerifyOptions) -> Result<Vec<Check>> {
    let mut tight = Check::new("tightness construction attains the constant");
    let mut never = Check::new("estimation bound on constructed instances");
    for r in 1..=3 {
        for q in [1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY] {
            let q = SchattenIndex::new(q)?;
            for eta in [1e-3, 1e-2, 0.1] {
                let params = TightnessParams::new(r, q, eta, 2 * r + 1, 2 * r)?;
                let inst = tightness_instance(&params)?;
                let ratio = inst.estimation_error(q)? / inst.z_truncated_norm(q);
                never.at_most(ratio, opt.thm1_constant(q), tol::BOUND_SLACK, || {
                    format!("r={r} q={q} eta={eta}")
                });
            }
            if q.is_infinite() || q.q() <= 2.0 {
                // For each ε, any η below ε/(c − ε) brings the ratio within ε of c.
                let c = tightness_constant(q);
                for epsilon in [0.1, 1e-2, 2e-3] {
                    let eta = 0.5 * epsilon / (c - epsilon);
                    let inst = tightness_instance(&TightnessParams::new(r, q, eta, 2 * r, 2 * r + 1)?)?;
                    let ratio = inst.estimation_error(q)? / inst.z_truncated_norm(q);
                    tight.at_most(c - epsilon, ratio, 0.0, || format!("r={r} q={q} epsilon={epsilon}"));
                }
            }
        }
    }

    let mut minimax = Check::new("minimax pair lower bound");
    for r in 1..=2 {
        for q in [SchattenIndex::one(), SchattenIndex::two(), SchattenIndex::new(3.0)?] {
            for xi in [0.5, 1.0, 2.0] {
                let pair = minimax_pair(r, q, xi, 2 * r + 1, 2 * r + 2)?;
                let ctx = || format!("r={r} q={q} xi={xi}");
                minimax.holds(pair.first.b() == pair.second.b(), ctx);
                minimax.close(pair.separation()?, q.root(2.0) * xi, 1e-10, ctx);
                let (e1, e2) = pair.estimator_errors()?;
                minimax.at_most(pair.lower_bound(), e1.max(e2), 1e-9, ctx);
                for inst in [&pair.first, &pair.second] {
                    minimax.close(inst.z_truncated_norm(q), xi, 1e-12, ctx);
                }
            }
        }
    }

    let mut example = Check::new("decaying-spectrum example");
    let mut rng = stream(opt.seed, 401);
    for (case, dims) in [(20usize, 20usize), (30, 25), (100, 100)].into_iter().enumerate() {
        for q in [1.5, 2.0, 3.0] {
            let q = SchattenIndex::new(q)?;
            let seed = RngSeed(rng.random());
            let z = decaying_noise(&NoiseSpectrum::Example1 { q }, dims.0, dims.1, seed)?;
            for r in 1..=4 {
                let harmonic: f64 = (1..=r).map(|k| 1.0 / k as f64).sum();
                let got = truncated_schatten_norm(&z, r, q)?;
                example.close(got, q.root(harmonic), 1e-9, || format!("case {case} q={q} r={r}"));
                if r == 4 && q == SchattenIndex::two() {
                    let top = matrix::singular_values(&z)?[0];
                    example.at_most(thm1_constant(q) * got, 2.0 * q.root(r as f64) * top, 0.0, || {
                        format!("case {case}: ordering against the rank-scaled baseline")
                    });
                }
            }
            let k = dims.0.min(dims.1);
            let full: f64 = (1..=k).map(|i| 1.0 / i as f64).sum();
            example.close(schatten_norm(&z, q)?, q.root(full), 1e-9, || {
                format!("case {case} q={q} full")
            });
        }
    }
    Ok(vec![tight, never, minimax, example])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scope_and_profile_parsing() {
        assert_eq!("norms".parse::<Scope>().unwrap(), Scope::Norms);
        assert!("lemmas".parse::<Scope>().is_err());
        assert_eq!("full".parse::<Profile>().unwrap(), Profile::Full);
        assert_eq!("thm1-constant".parse::<Fault>().unwrap(), Fault::Thm1Constant);
    }

    #[test]
    fn ci_suites_pass_and_repeat() {
        for scope in [Scope::Norms, Scope::Subspace, Scope::Bounds, Scope::Constructions] {
            let options = VerifyOptions::new(scope, RngSeed(9), Profile::Ci);
            let report = run(&options).unwrap();
            assert!(report.passed(), "{report}");
            assert_eq!(report, run(&options).unwrap());
        }
    }

    #[test]
    fn fault_is_reported() {
        let options = VerifyOptions {
            fault: Some(Fault::Thm1Constant),
            ..VerifyOptions::new(Scope::Constructions, RngSeed(1), Profile::Ci)
        };
        let report = run(&options).unwrap();
        assert!(!report.passed());
        let failed: Vec<&str> = report.failed().map(|c| c.name).collect();
        assert!(failed.contains(&"estimation bound on constructed instances"));
    }
}
