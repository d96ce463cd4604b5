//! Deterministic instances from the lower-bound arguments.
//!
//! All block constructions sit in the top-left corner of otherwise zero
//! `m × n` matrices.

use std::fs;
use std::path::Path;

use crate::bounds::PerturbationInstance;
use crate::error::{domain, Result};
use crate::matrix::io::{format_metadata, save_matrix, Metadata};
use crate::matrix::{sample_haar_frame_with, Matrix, RngSeed};
use crate::norms::{SchattenIndex, SingularSpectrum};

fn check_room(r: usize, m: usize, n: usize) -> Result<()> {
    if r == 0 {
        return Err(domain("rank must be at least 1"));
    }
    if m < 2 * r || n < 2 * r {
        return Err(domain(format!(
            "a rank-{r} construction needs at least {0}x{0}, got {m}x{n}",
            2 * r
        )));
    }
    Ok(())
}

fn block_diagonal(m: usize, n: usize, blocks: &[(f64, usize)]) -> Matrix {
    let diag: Vec<f64> = blocks
        .iter()
        .flat_map(|&(value, len)| std::iter::repeat_n(value, len))
        .collect();
    Matrix::from_diagonal(m, n, &diag).expect("blocks fit the corner")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TightnessParams {
    pub r: usize,
    pub q: SchattenIndex,
    pub eta: f64,
    pub m: usize,
    pub n: usize,
}

impl TightnessParams {
    pub fn new(r: usize, q: SchattenIndex, eta: f64, m: usize, n: usize) -> Result<Self> {
        check_room(r, m, n)?;
        let limit = Self::eta_limit(q);
        if !(eta > 0.0 && eta < limit) {
            return Err(domain(format!("eta must lie in (0, {limit}) for q = {q}, got {eta}")));
        }
        Ok(TightnessParams { r, q, eta, m, n })
    }

    /// Smallest admissible `2r × 2r` layout.
    pub fn square(r: usize, q: SchattenIndex, eta: f64) -> Result<Self> {
        Self::new(r, q, eta, 2 * r, 2 * r)
    }

    /// `η` must stay below `1/(c − 1)`, `c = (2^q + 1)^{1/q}`, so that the
    /// implied `ε` lies in `(0, 1)`.
    pub fn eta_limit(q: SchattenIndex) -> f64 {
        1.0 / (tightness_constant(q) - 1.0)
    }

    /// The `ε` for which this `η` is the extremal choice: `ε = cη/(1 + η)`.
    pub fn implied_epsilon(&self) -> f64 {
        tightness_constant(self.q) * self.eta / (1.0 + self.eta)
    }

    /// `‖Â − A‖_q = (2^q r + r)^{1/q}`, or 2 at `q = ∞`.
    pub fn expected_error(&self) -> f64 {
        if self.q.is_infinite() {
            2.0
        } else {
            let q = self.q.q();
            let r = self.r as f64;
            (2f64.powf(q) * r + r).powf(1.0 / q)
        }
    }

    /// `‖Z_max(r)‖_q = (1 + η) r^{1/q}`.
    pub fn expected_z_norm(&self) -> f64 {
        (1.0 + self.eta) * self.q.root(self.r as f64)
    }

    /// `(2^q + 1)^{1/q} / (1 + η)`.
    pub fn expected_ratio(&self) -> f64 {
        tightness_constant(self.q) / (1.0 + self.eta)
    }
}

/// `(2^q + 1)^{1/q}`, with limit 2 at `q = ∞`.
pub fn tightness_constant(q: SchattenIndex) -> f64 {
    if q.is_infinite() {
        2.0
    } else {
        (2f64.powf(q.q()) + 1.0).powf(1.0 / q.q())
    }
}

/// `A = diag(2I_r, 0)`, `Z = diag(−(1+η)I_r, I_r, 0)`, `B = diag((1−η)I_r, I_r, 0)`.
pub fn tightness_instance(params: &TightnessParams) -> Result<PerturbationInstance> {
    let TightnessParams { r, eta, m, n, .. } = *params;
    let a = block_diagonal(m, n, &[(2.0, r)]);
    let z = block_diagonal(m, n, &[(-(1.0 + eta), r), (1.0, r)]);
    PerturbationInstance::from_parts(a, z, r)
}

/// Two instances with the same observation whose truths are `2^{1/q} ξ` apart.
#[derive(Clone, Debug)]
pub struct MinimaxPair {
    pub first: PerturbationInstance,
    pub second: PerturbationInstance,
    pub xi: f64,
    pub q: SchattenIndex,
}

impl MinimaxPair {
    /// `‖A₁ − A₂‖_q`.
    pub fn separation(&self) -> Result<f64> {
        crate::norms::schatten_norm(&(self.first.a() - self.second.a()), self.q)
    }

    /// `2^{1/q − 1} ξ`: no estimator does better on both halves.
    pub fn lower_bound(&self) -> f64 {
        self.q.root(2.0) * self.xi / 2.0
    }

    /// Truncated-SVD errors `(‖Â − A₁‖_q, ‖Â − A₂‖_q)`.
    pub fn estimator_errors(&self) -> Result<(f64, f64)> {
        Ok((
            self.first.estimation_error(self.q)?,
            self.second.estimation_error(self.q)?,
        ))
    }
}

/// `Z₁ = diag(0, cI_r)`, `A₁ = diag(cI_r, 0)` and the mirrored second half,
/// with `c = ξ / r^{1/q}`; both observations equal `c I_{2r}`.
pub fn minimax_pair(r: usize, q: SchattenIndex, xi: f64, m: usize, n: usize) -> Result<MinimaxPair> {
    check_room(r, m, n)?;
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(domain(format!("xi must be positive and finite, got {xi}")));
    }
    let c = xi / q.root(r as f64);
    let first = PerturbationInstance::from_parts(
        block_diagonal(m, n, &[(c, r)]),
        block_diagonal(m, n, &[(0.0, r), (c, r)]),
        r,
    )?;
    let second = PerturbationInstance::from_parts(
        block_diagonal(m, n, &[(0.0, r), (c, r)]),
        block_diagonal(m, n, &[(c, r)]),
        r,
    )?;
    Ok(MinimaxPair { first, second, xi, q })
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpectrum {
    /// `σ_k = k^{−1/q}` for `k = 1, …, min(m, n)`; needs `q > 1`.
    Example1 {
        q: SchattenIndex,
    },
    Custom(Vec<f64>),
}

/// `k^{−1/q}` for `k = 1, …, len`.
pub fn example1_spectrum(len: usize, q: SchattenIndex) -> Vec<f64> {
    (1..=len).map(|k| 1.0 / q.root(k as f64)).collect()
}

impl NoiseSpectrum {
    pub fn values(&self, len: usize) -> Result<Vec<f64>> {
        match self {
            NoiseSpectrum::Example1 { q } => {
                if q.q() <= 1.0 {
                    return Err(domain("the decaying example needs q > 1"));
                }
                Ok(example1_spectrum(len, *q))
            }
            NoiseSpectrum::Custom(values) => {
                if values.len() > len {
                    return Err(domain(format!(
                        "{} singular values do not fit a rank-{len} matrix",
                        values.len()
                    )));
                }
                SingularSpectrum::new(values.clone())?;
                Ok(values.clone())
            }
        }
    }
}

/// `Z = U diag(σ) Vᵀ` with Haar `U`, `V`.
pub fn decaying_noise(kind: &NoiseSpectrum, m: usize, n: usize, seed: RngSeed) -> Result<Matrix> {
    if m == 0 || n == 0 {
        return Err(domain(format!("cannot build a {m}x{n} matrix")));
    }
    let sigma = kind.values(m.min(n))?;
    if sigma.is_empty() {
        return Ok(Matrix::zeros(m, n));
    }
    let mut rng = seed.rng();
    let u = sample_haar_frame_with(&mut rng, m, sigma.len())?;
    let v = sample_haar_frame_with(&mut rng, n, sigma.len())?;
    let mut scaled = u.as_inner().clone();
    for (j, &s) in sigma.iter().enumerate() {
        scaled.column_mut(j).scale_mut(s);
    }
    Ok(Matrix::from_inner(scaled * v.as_inner().transpose()))
}

/// Writes `A{tag}.csv`, `Z{tag}.csv` and `B{tag}.csv` into `dir`.
pub fn write_instance(dir: &Path, tag: &str, inst: &PerturbationInstance) -> Result<()> {
    fs::create_dir_all(dir)?;
    save_matrix(inst.a(), &dir.join(format!("A{tag}.csv")))?;
    save_matrix(inst.z(), &dir.join(format!("Z{tag}.csv")))?;
    save_matrix(inst.b(), &dir.join(format!("B{tag}.csv")))
}

pub fn write_metadata(dir: &Path, meta: &Metadata) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("meta.txt"), format_metadata(meta))?;
    Ok(())
}
