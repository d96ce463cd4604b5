//! Schatten-q norms and their truncated and Ky Fan variants.
//!
//! Also provides the dual witness attaining the variational form of the
//! truncated norm, majorization (Karamata) certificates, and the two-regime
//! bound for matrices split by a projector.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::matrix::{self, projector, Matrix, OrthonormalFrame};
use crate::tol;

/// A Schatten exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(q) => q,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

/// An exponent `q ∈ [1, ∞]` paired with its dual `p`, `1/p + 1/q = 1`.
///
/// Both sides are stored so that `dual` is an exact swap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchattenIndex {
    q: Exponent,
    p: Exponent,
}

impl SchattenIndex {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_nan() || q < 1.0 {
            return Err(domain(format!("Schatten exponent must satisfy q >= 1, got {q}")));
        }
        if q.is_infinite() {
            return Ok(Self::infinity());
        }
        let p = if q == 1.0 {
            Exponent::Infinite
        } else {
            Exponent::Finite(q / (q - 1.0))
        };
        Ok(SchattenIndex {
            q: Exponent::Finite(q),
            p,
        })
    }

    pub fn infinity() -> Self {
        SchattenIndex {
            q: Exponent::Infinite,
            p: Exponent::Finite(1.0),
        }
    }

    pub fn one() -> Self {
        SchattenIndex {
            q: Exponent::Finite(1.0),
            p: Exponent::Infinite,
        }
    }

    pub fn two() -> Self {
        SchattenIndex {
            q: Exponent::Finite(2.0),
            p: Exponent::Finite(2.0),
        }
    }

    pub fn exponent(self) -> Exponent {
        self.q
    }

    pub fn dual_exponent(self) -> Exponent {
        self.p
    }

    /// `q` as a float, `f64::INFINITY` for the spectral norm.
    pub fn q(self) -> f64 {
        self.q.value()
    }

    pub fn p(self) -> f64 {
        self.p.value()
    }

    pub fn dual(self) -> Self {
        SchattenIndex { q: self.p, p: self.q }
    }

    pub fn is_infinite(self) -> bool {
        self.q == Exponent::Infinite
    }

    /// `x^{1/q}`, with `x^{1/∞} = 1`.
    pub fn root(self, x: f64) -> f64 {
        match self.q {
            Exponent::Finite(q) => x.powf(1.0 / q),
            Exponent::Infinite => 1.0,
        }
    }
}

impl fmt::Display for SchattenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for SchattenIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Self::infinity());
        }
        let q: f64 = s
            .parse()
            .map_err(|_| domain(format!("'{s}' is neither a number nor 'inf'")))?;
        SchattenIndex::new(q)
    }
}

/// Singular values in descending order, all finite and nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum(Vec<f64>);

impl SingularSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(domain(format!("spectrum entries must be finite and >= 0, got {bad}")));
        }
        if let Some(i) = values.windows(2).position(|w| w[0] < w[1]) {
            return Err(domain(format!(
                "spectrum must be descending, entry {} ({}) < entry {} ({})",
                i,
                values[i],
                i + 1,
                values[i + 1]
            )));
        }
        Ok(SingularSpectrum(values))
    }

    pub fn of(m: &Matrix) -> Result<Self> {
        matrix::singular_values(m).map(SingularSpectrum)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self, q: SchattenIndex) -> f64 {
        vector_norm(&self.0, q)
    }

    pub fn truncated_norm(&self, r: usize, q: SchattenIndex) -> Result<f64> {
        check_count(r, self.0.len(), "rank")?;
        Ok(vector_norm(&self.0[..r], q))
    }

    pub fn ky_fan(&self, s: usize) -> Result<f64> {
        check_count(s, self.0.len(), "Ky Fan index")?;
        Ok(self.0[..s].iter().sum())
    }
}

fn check_count(r: usize, len: usize, what: &str) -> Result<()> {
    if r == 0 || r > len {
        return Err(domain(format!("{what} {r} outside 1..={len}")));
    }
    Ok(())
}

/// `ℓ_q` norm of a nonnegative vector.
///
/// Scaled by the largest entry to avoid overflow; entries below
/// `SPECTRUM_CLAMP` times the largest are dropped.
pub fn vector_norm(values: &[f64], q: SchattenIndex) -> f64 {
    let top = values.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()));
    if top == 0.0 {
        return 0.0;
    }
    match q.exponent() {
        Exponent::Infinite => top,
        Exponent::Finite(q) => {
            let cutoff = tol::SPECTRUM_CLAMP * top;
            let sum: f64 = values
                .iter()
                .map(|v| v.abs())
                .filter(|&v| v > cutoff)
                .map(|v| (v / top).powf(q))
                .sum();
            top * sum.powf(1.0 / q)
        }
    }
}

/// `‖M‖_q = (Σ σ_i^q)^{1/q}`, the largest singular value for `q = ∞`.
pub fn schatten_norm(m: &Matrix, q: SchattenIndex) -> Result<f64> {
    Ok(SingularSpectrum::of(m)?.norm(q))
}

/// `‖M_max(r)‖_q`, the Schatten-q norm of the top `r` singular values.
pub fn truncated_schatten_norm(m: &Matrix, r: usize, q: SchattenIndex) -> Result<f64> {
    check_count(r, m.min_dim(), "rank")?;
    SingularSpectrum::of(m)?.truncated_norm(r, q)
}

/// Ky Fan `s`-norm: the sum of the `s` largest singular values.
pub fn ky_fan(m: &Matrix, s: usize) -> Result<f64> {
    check_count(s, m.min_dim(), "Ky Fan index")?;
    SingularSpectrum::of(m)?.ky_fan(s)
}

/// The rank-≤`r` matrix `B` with `‖B‖_q = 1` maximizing `⟨B, X⟩`.
///
/// Built on the top `r' = min(r, rank X)` singular pairs of `X` with weights
/// `Σ_ii ∝ λ_i^{p−1}`, so `Σ_ii^q / λ_i^p` is constant and
/// `⟨B, X⟩ = ‖X_max(r)‖_p` where `p` is the dual of `q`. Only `1 < q < ∞`
/// has a closed form here.
pub fn dual_witness(x: &Matrix, r: usize, q: SchattenIndex) -> Result<Matrix> {
    let q_value = match q.exponent() {
        Exponent::Finite(v) if v > 1.0 => v,
        _ => {
            return Err(Error::UnsupportedExponent(format!(
                "{q}: a closed-form dual witness needs 1 < q < inf"
            )))
        }
    };
    check_count(r, x.min_dim(), "rank")?;
    if x.is_zero() {
        return Err(domain("the dual witness of the zero matrix is undefined"));
    }
    let factors = matrix::svd(x)?;
    let r_eff = r.min(factors.numerical_rank());
    let top = factors.sigma(1);
    // p − 1 = 1/(q − 1)
    let weight_exponent = 1.0 / (q_value - 1.0);
    let mut weights: Vec<f64> = factors.values()[..r_eff]
        .iter()
        .map(|&lambda| (lambda / top).powf(weight_exponent))
        .collect();
    let scale = weights.iter().map(|w| w.powf(q_value)).sum::<f64>().powf(1.0 / q_value);
    for w in &mut weights {
        *w /= scale;
    }
    let mut left = factors.left().columns(0, r_eff).into_owned();
    for (j, &w) in weights.iter().enumerate() {
        left.column_mut(j).scale_mut(w);
    }
    Ok(Matrix::from_inner(left * factors.right().columns(0, r_eff).transpose()))
}

/// Outcome of a majorization check between two descending sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct KaramataCertificate {
    /// `Σ_{i≤j} x_i ≤ Σ_{i≤j} y_i` for every `j`.
    pub prefix_dominated: bool,
    /// First prefix length (1-based) at which domination fails.
    pub first_violation: Option<usize>,
    pub lhs_power_sum: f64,
    pub rhs_power_sum: f64,
    pub sequences_equal: bool,
}

impl KaramataCertificate {
    /// `Some(Σ x^p ≤ Σ y^p)` when the hypothesis holds, `None` otherwise.
    pub fn conclusion(&self) -> Option<bool> {
        self.prefix_dominated
            .then_some(self.lhs_power_sum <= self.rhs_power_sum + tol::BOUND_SLACK * (1.0 + self.rhs_power_sum))
    }
}

/// Checks prefix-sum domination of `x` by `y` and, when it holds, the
/// power-sum inequality `Σ x_i^p ≤ Σ y_i^p`.
pub fn karamata_holds(x: &SingularSpectrum, y: &SingularSpectrum, p: f64) -> Result<KaramataCertificate> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "sequences of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("power must be finite and >= 1, got {p}")));
    }
    let mut first_violation = None;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (j, (a, b)) in x.values().iter().zip(y.values()).enumerate() {
        sx += a;
        sy += b;
        if sx > sy + 1e-12 * (1.0 + sy) {
            first_violation = Some(j + 1);
            break;
        }
    }
    Ok(KaramataCertificate {
        prefix_dominated: first_violation.is_none(),
        first_violation,
        lhs_power_sum: x.values().iter().map(|v| v.powf(p)).sum(),
        rhs_power_sum: y.values().iter().map(|v| v.powf(p)).sum(),
        sequences_equal: x == y,
    })
}

/// Which of the two projection-split regimes applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitRegime {
    /// `1 ≤ q ≤ 2`: `(‖·‖_q^q + ‖·‖_q^q)^{1/q}`.
    Power,
    /// `2 ≤ q ≤ ∞`: `(‖·‖_q² + ‖·‖_q²)^{1/2}`.
    Quadratic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitBound {
    pub regime: SplitRegime,
    /// `‖P_U A + P_{U⊥} B‖_q`.
    pub combined: f64,
    pub bound: f64,
}

impl SplitBound {
    pub fn holds(&self) -> bool {
        tol::within_bound(self.combined, self.bound)
    }
}

/// Evaluates `‖P_U A + P_{U⊥} B‖_q` against its two-regime upper bound.
pub fn split_projection_bound(
    a: &Matrix,
    b: &Matrix,
    frame: &OrthonormalFrame,
    q: SchattenIndex,
) -> Result<SplitBound> {
    matrix::ensure_same_shape(a, b, "split projection")?;
    if frame.ambient_dim() != a.nrows() {
        return Err(Error::Shape(format!(
            "frame lives in R^{} but matrices have {} rows",
            frame.ambient_dim(),
            a.nrows()
        )));
    }
    let p_u = projector(frame);
    let p_perp = &Matrix::identity(a.nrows()) - &p_u;
    let inside = &p_u * a;
    let outside = &p_perp * b;
    let combined = schatten_norm(&(&inside + &outside), q)?;
    let (x, y) = (schatten_norm(&inside, q)?, schatten_norm(&outside, q)?);
    let (regime, bound) = match q.exponent() {
        Exponent::Finite(v) if v <= 2.0 => (SplitRegime::Power, vector_norm(&[x, y], q)),
        _ => (SplitRegime::Quadratic, x.hypot(y)),
    };
    Ok(SplitBound {
        regime,
        combined,
        bound,
    })
}
