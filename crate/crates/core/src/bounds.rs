//! The truncated-SVD estimator and every bound evaluated against it.
//!
//! Bounds that divide by a singular value return `None` when that value is
//! numerically zero; a [`BoundReport`] records them as inapplicable rather
//! than failing.

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::matrix::{self, ensure_same_shape, Matrix, OrthonormalFrame, SvdFactors};
use crate::norms::{schatten_norm, truncated_schatten_norm, vector_norm, SchattenIndex, SingularSpectrum};
use crate::subspace::sin_theta_distance;
use crate::tol;

/// Top-`r` singular structure of the observation.
#[derive(Clone, Debug)]
pub struct LowRankEstimate {
    pub a_hat: Matrix,
    pub left: OrthonormalFrame,
    pub right: OrthonormalFrame,
    /// Every singular value of `B`, descending.
    pub spectrum: Vec<f64>,
}

impl LowRankEstimate {
    pub fn rank(&self) -> usize {
        self.left.width()
    }

    /// `σ_i(B)`, one-based.
    pub fn sigma(&self, i: usize) -> f64 {
        self.spectrum.get(i - 1).copied().unwrap_or(0.0)
    }
}

fn check_rank(r: usize, m: &Matrix) -> Result<()> {
    if r == 0 || r > m.min_dim() {
        return Err(domain(format!(
            "rank {r} outside 1..={} for a {}x{} matrix",
            m.min_dim(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn estimate_from_factors(factors: &SvdFactors, r: usize) -> Result<LowRankEstimate> {
    Ok(LowRankEstimate {
        a_hat: matrix::truncate(factors, r)?,
        left: factors.left_frame(r)?,
        right: factors.right_frame(r)?,
        spectrum: factors.values().to_vec(),
    })
}

/// `Â = B_max(r)` together with its frames.
pub fn estimate_low_rank(b: &Matrix, r: usize) -> Result<LowRankEstimate> {
    check_rank(r, b)?;
    estimate_from_factors(&matrix::svd(b)?, r)
}

/// `B = A + Z` with `rank(A) ≤ r`.
///
/// Construction computes the estimate and the top-`r` frames of `A` once; all
/// evaluators below reuse them.
#[derive(Clone, Debug)]
pub struct PerturbationInstance {
    a: Matrix,
    z: Matrix,
    b: Matrix,
    r: usize,
    truth_left: OrthonormalFrame,
    truth_right: OrthonormalFrame,
    truth_spectrum: Vec<f64>,
    z_spectrum: SingularSpectrum,
    estimate: LowRankEstimate,
}

impl PerturbationInstance {
    pub fn new(a: Matrix, z: Matrix, b: Matrix, r: usize) -> Result<Self> {
        ensure_same_shape(&a, &z, "A and Z")?;
        ensure_same_shape(&a, &b, "A and B")?;
        check_rank(r, &a)?;
        let gap = (&(&a + &z) - &b).amax();
        if gap > tol::INSTANCE_SUM {
            return Err(domain(format!("B differs from A + Z by {gap:e}")));
        }
        let factors = matrix::svd(&a)?;
        let (top, next) = (factors.sigma(1), factors.sigma(r + 1));
        if next >= tol::NUMERICAL_RANK * top && top > 0.0 {
            return Err(domain(format!(
                "A is not rank {r}: sigma_{} = {next:e} against sigma_1 = {top:e}",
                r + 1
            )));
        }
        Self::assemble(
            a,
            z,
            b,
            r,
            factors.left_frame(r)?,
            factors.right_frame(r)?,
            factors.values()[..r].to_vec(),
        )
    }

    /// `B` is formed as `A + Z`.
    pub fn from_parts(a: Matrix, z: Matrix, r: usize) -> Result<Self> {
        ensure_same_shape(&a, &z, "A and Z")?;
        let b = &a + &z;
        Self::new(a, z, b, r)
    }

    /// `A = U diag(σ) Vᵀ` from known factors, skipping a decomposition of `A`.
    pub fn from_factors(u: OrthonormalFrame, sigma: &[f64], v: OrthonormalFrame, z: Matrix) -> Result<Self> {
        let r = u.width();
        if v.width() != r || sigma.len() != r {
            return Err(Error::Shape(format!(
                "factor widths {}, {} and {} spectrum values disagree",
                r,
                v.width(),
                sigma.len()
            )));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) || sigma.iter().any(|s| s.is_nan() || *s < 0.0) {
            return Err(domain("factor spectrum must be non-negative and descending"));
        }
        let mut scaled = u.as_inner().clone();
        for (j, &s) in sigma.iter().enumerate() {
            scaled.column_mut(j).scale_mut(s);
        }
        let a = Matrix::from_inner(scaled * v.as_inner().transpose());
        ensure_same_shape(&a, &z, "A and Z")?;
        let b = &a + &z;
        Self::assemble(a, z, b, r, u, v, sigma.to_vec())
    }

    fn assemble(
        a: Matrix,
        z: Matrix,
        b: Matrix,
        r: usize,
        truth_left: OrthonormalFrame,
        truth_right: OrthonormalFrame,
        truth_spectrum: Vec<f64>,
    ) -> Result<Self> {
        let z_spectrum = SingularSpectrum::of(&z)?;
        let estimate = estimate_low_rank(&b, r)?;
        Ok(PerturbationInstance {
            a,
            z,
            b,
            r,
            truth_left,
            truth_right,
            truth_spectrum,
            z_spectrum,
            estimate,
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn truth_left(&self) -> &OrthonormalFrame {
        &self.truth_left
    }

    pub fn truth_right(&self) -> &OrthonormalFrame {
        &self.truth_right
    }

    /// `σ_1(A) ≥ … ≥ σ_r(A)`.
    pub fn truth_spectrum(&self) -> &[f64] {
        &self.truth_spectrum
    }

    pub fn z_spectrum(&self) -> &SingularSpectrum {
        &self.z_spectrum
    }

    pub fn estimate(&self) -> &LowRankEstimate {
        &self.estimate
    }

    /// `‖Z_max(r)‖_q`.
    pub fn z_truncated_norm(&self, q: SchattenIndex) -> f64 {
        vector_norm(&self.z_spectrum.values()[..self.r], q)
    }

    /// `‖Â − A‖_q`.
    pub fn estimation_error(&self, q: SchattenIndex) -> Result<f64> {
        schatten_norm(&(&self.estimate.a_hat - &self.a), q)
    }

    /// `(‖sin Θ(Û, U)‖_q, ‖sin Θ(V̂, V)‖_q)`.
    pub fn sin_theta(&self, q: SchattenIndex) -> Result<(f64, f64)> {
        Ok((
            sin_theta_distance(&self.estimate.left, &self.truth_left, q)?,
            sin_theta_distance(&self.estimate.right, &self.truth_right, q)?,
        ))
    }

    fn sigma_r_a(&self) -> Option<f64> {
        let top = self.truth_spectrum[0];
        let low = self.truth_spectrum[self.r - 1];
        (low > tol::SINGULAR_GAP * top).then_some(low)
    }

    fn sigma_r_b(&self) -> Option<f64> {
        let top = self.estimate.sigma(1);
        let low = self.estimate.sigma(self.r);
        (low > tol::SINGULAR_GAP * top).then_some(low)
    }
}

/// `(I − FFᵀ) M`.
fn project_rows_out(frame: &OrthonormalFrame, m: &Matrix) -> Matrix {
    m - &(frame.as_matrix() * &(&frame.transposed() * m))
}

/// `M (I − FFᵀ)`.
fn project_cols_out(m: &Matrix, frame: &OrthonormalFrame) -> Matrix {
    m - &(&(m * frame.as_matrix()) * &frame.transposed())
}

/// Theorem constant for the estimation bound:
/// `(2^q + 1)^{1/q}` for `q ≤ 2`, `√5` for `2 ≤ q < ∞`, `2` at `q = ∞`.
pub fn thm1_constant(q: SchattenIndex) -> f64 {
    if q.is_infinite() {
        2.0
    } else if q.q() <= 2.0 {
        (2f64.powf(q.q()) + 1.0).powf(1.0 / q.q())
    } else {
        5f64.sqrt()
    }
}

/// `C_q ‖Z_max(r)‖_q`.
pub fn bound_thm1(z: &Matrix, r: usize, q: SchattenIndex) -> Result<f64> {
    Ok(thm1_constant(q) * truncated_schatten_norm(z, r, q)?)
}

/// `‖Z‖_q (3 + ‖B − Â‖_q / σ_r(B))`.
pub fn bound_wedin_reconstruction(inst: &PerturbationInstance, q: SchattenIndex) -> Option<f64> {
    let sigma_r = inst.sigma_r_b()?;
    let tail = vector_norm(&inst.estimate.spectrum[inst.r..], q);
    Some(inst.z_spectrum.norm(q) * (3.0 + tail / sigma_r))
}

/// `2‖Z‖_q`.
pub fn bound_triangle(z: &Matrix, q: SchattenIndex) -> Result<f64> {
    Ok(2.0 * schatten_norm(z, q)?)
}

/// `2 r^{1/q} ‖Z‖`.
pub fn bound_rank_spectral(z: &Matrix, r: usize, q: SchattenIndex) -> Result<f64> {
    check_rank(r, z)?;
    let top = matrix::singular_values(z)?[0];
    Ok(2.0 * q.root(r as f64) * top)
}

/// `(‖P_{Û⊥} A‖_q, ‖A P_{V̂⊥}‖_q)`.
pub fn projection_error(inst: &PerturbationInstance, q: SchattenIndex) -> Result<(f64, f64)> {
    let est = &inst.estimate;
    Ok((
        schatten_norm(&project_rows_out(&est.left, &inst.a), q)?,
        schatten_norm(&project_cols_out(&inst.a, &est.right), q)?,
    ))
}

/// `2‖Z_max(r)‖_q`.
pub fn bound_thm2(z: &Matrix, r: usize, q: SchattenIndex) -> Result<f64> {
    Ok(2.0 * truncated_schatten_norm(z, r, q)?)
}

/// `‖(P_{Û⊥}Z)_max(r)‖_q + ‖(P_{U⊥}Z)_max(r)‖_q` and its right-hand analogue,
/// with `U`, `V` the true frames of `A`.
pub fn bound_refined_projection(inst: &PerturbationInstance, q: SchattenIndex) -> Result<(f64, f64)> {
    let (z, r, est) = (&inst.z, inst.r, &inst.estimate);
    let left = truncated_schatten_norm(&project_rows_out(&est.left, z), r, q)?
        + truncated_schatten_norm(&project_rows_out(&inst.truth_left, z), r, q)?;
    let right = truncated_schatten_norm(&project_cols_out(z, &est.right), r, q)?
        + truncated_schatten_norm(&project_cols_out(z, &inst.truth_right), r, q)?;
    Ok((left, right))
}

/// `2‖Z_max(r)‖_q / σ_r(A)`, bounding both sin-Θ distances.
pub fn bound_sin_theta_thm5(inst: &PerturbationInstance, q: SchattenIndex) -> Option<f64> {
    inst.sigma_r_a().map(|s| 2.0 * inst.z_truncated_norm(q) / s)
}

fn wedin_residual(inst: &PerturbationInstance, q: SchattenIndex) -> Result<f64> {
    let est = &inst.estimate;
    let zv = schatten_norm(&(&inst.z * est.right.as_matrix()), q)?;
    let uz = schatten_norm(&(&est.left.transposed() * &inst.z), q)?;
    Ok(zv.max(uz))
}

/// `max{‖Z V̂‖_q, ‖Ûᵀ Z‖_q} / σ_r(B)`.
pub fn bound_wedin_sin_theta(inst: &PerturbationInstance, q: SchattenIndex) -> Result<Option<f64>> {
    match inst.sigma_r_b() {
        Some(s) => Ok(Some(wedin_residual(inst, q)? / s)),
        None => Ok(None),
    }
}

/// The sin-Θ route to the projection error: Wedin's bound times `σ₁(A)`.
pub fn bound_projection_via_sin_theta(inst: &PerturbationInstance, q: SchattenIndex) -> Result<Option<f64>> {
    Ok(bound_wedin_sin_theta(inst, q)?.map(|w| w * inst.truth_spectrum[0]))
}

fn spectral_and_frobenius(z: &SingularSpectrum) -> (f64, f64) {
    (z.values()[0], z.norm(SchattenIndex::two()))
}

/// `√2 ‖Z‖_F / σ_r(A)`.
pub fn bound_vu_psd(inst: &PerturbationInstance) -> Option<f64> {
    let (_, frob) = spectral_and_frobenius(&inst.z_spectrum);
    inst.sigma_r_a().map(|s| 2f64.sqrt() * frob / s)
}

fn yu_min(inst: &PerturbationInstance) -> f64 {
    let (spec, frob) = spectral_and_frobenius(&inst.z_spectrum);
    ((inst.r as f64).sqrt() * spec).min(frob)
}

/// `2 min{√r ‖Z‖, ‖Z‖_F} / σ_r(A)`.
pub fn bound_yu_lei_psd(inst: &PerturbationInstance) -> Option<f64> {
    inst.sigma_r_a().map(|s| 2.0 * yu_min(inst) / s)
}

/// `2(2‖A‖ + ‖Z‖) min{√r ‖Z‖, ‖Z‖_F} / σ_r(A)²`.
pub fn bound_yu_asym(inst: &PerturbationInstance) -> Option<f64> {
    let spec_z = inst.z_spectrum.values()[0];
    let spec_a = inst.truth_spectrum[0];
    inst.sigma_r_a()
        .map(|s| 2.0 * (2.0 * spec_a + spec_z) * yu_min(inst) / (s * s))
}

/// Both `A` and `B` symmetric positive semidefinite.
pub fn is_psd_instance(inst: &PerturbationInstance) -> bool {
    inst.a.is_positive_semidefinite() && inst.b.is_positive_semidefinite()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundName {
    Thm1,
    WedinReconstruction,
    Triangle,
    RankSpectral,
    Thm2,
    RefinedProjectionLeft,
    RefinedProjectionRight,
    Thm5,
    WedinSinTheta,
    ProjectionViaSinTheta,
    VuPsd,
    YuLeiPsd,
    YuAsym,
}

impl BoundName {
    pub const ALL: [BoundName; 13] = [
        BoundName::Thm1,
        BoundName::WedinReconstruction,
        BoundName::Triangle,
        BoundName::RankSpectral,
        BoundName::Thm2,
        BoundName::RefinedProjectionLeft,
        BoundName::RefinedProjectionRight,
        BoundName::Thm5,
        BoundName::WedinSinTheta,
        BoundName::ProjectionViaSinTheta,
        BoundName::VuPsd,
        BoundName::YuLeiPsd,
        BoundName::YuAsym,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::Thm1 => "thm1",
            BoundName::WedinReconstruction => "wedin_reconstruction",
            BoundName::Triangle => "triangle",
            BoundName::RankSpectral => "rank_spectral",
            BoundName::Thm2 => "thm2",
            BoundName::RefinedProjectionLeft => "refined_projection_left",
            BoundName::RefinedProjectionRight => "refined_projection_right",
            BoundName::Thm5 => "thm5",
            BoundName::WedinSinTheta => "wedin_sin_theta",
            BoundName::ProjectionViaSinTheta => "projection_via_sin_theta",
            BoundName::VuPsd => "vu_psd",
            BoundName::YuLeiPsd => "yu_lei_psd",
            BoundName::YuAsym => "yu_asym",
        }
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated bound and the quantity it is supposed to dominate.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundEntry {
    pub name: BoundName,
    /// `None` when the bound's hypotheses fail on this instance.
    pub value: Option<f64>,
    pub target: f64,
}

impl BoundEntry {
    pub fn violated(&self) -> bool {
        self.value.is_some_and(|v| !tol::within_bound(self.target, v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub q: SchattenIndex,
    pub estimation_error: f64,
    pub projection_errors: (f64, f64),
    pub sin_theta: (f64, f64),
    pub z_truncated_norm: f64,
    pub entries: Vec<BoundEntry>,
    pub violations: Vec<BoundName>,
}

impl BoundReport {
    pub fn entry(&self, name: BoundName) -> &BoundEntry {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .expect("every bound has an entry")
    }

    pub fn value(&self, name: BoundName) -> Option<f64> {
        self.entry(name).value
    }

    /// `‖Â − A‖_q / ‖Z_max(r)‖_q`; `None` when `Z_max(r) = 0`.
    pub fn ratio(&self) -> Option<f64> {
        (self.z_truncated_norm > 0.0).then(|| self.estimation_error / self.z_truncated_norm)
    }

    pub fn csv_header() -> String {
        let mut cols: Vec<String> = [
            "instance_id",
            "q",
            "estimation_error",
            "projection_left",
            "projection_right",
            "sin_theta_left",
            "sin_theta_right",
            "z_trunc_norm",
            "ratio",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for name in BoundName::ALL {
            cols.push(name.as_str().to_string());
            cols.push(format!("{name}_applicable"));
        }
        cols.push("violations".to_string());
        cols.join(",")
    }

    /// One CSV row; inapplicable bounds leave their value field empty and
    /// violations are `;`-separated.
    pub fn csv_row(&self, instance_id: &str) -> String {
        let mut cols = vec![
            instance_id.to_string(),
            self.q.to_string(),
            format_float(self.estimation_error),
            format_float(self.projection_errors.0),
            format_float(self.projection_errors.1),
            format_float(self.sin_theta.0),
            format_float(self.sin_theta.1),
            format_float(self.z_truncated_norm),
            self.ratio().map(format_float).unwrap_or_default(),
        ];
        for entry in &self.entries {
            cols.push(entry.value.map(format_float).unwrap_or_default());
            cols.push(u8::from(entry.value.is_some()).to_string());
        }
        let names: Vec<&str> = self.violations.iter().map(|n| n.as_str()).collect();
        cols.push(names.join(";"));
        cols.join(",")
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

/// Evaluates every left-hand quantity and every bound on one instance.
pub fn bound_report(inst: &PerturbationInstance, q: SchattenIndex) -> Result<BoundReport> {
    let estimation_error = inst.estimation_error(q)?;
    let projection = projection_error(inst, q)?;
    let sin_theta = inst.sin_theta(q)?;
    let z_trunc = inst.z_truncated_norm(q);
    let projection_max = projection.0.max(projection.1);
    let sin_max = sin_theta.0.max(sin_theta.1);
    let refined = bound_refined_projection(inst, q)?;
    let frobenius = q == SchattenIndex::two();
    let psd = frobenius && is_psd_instance(inst);

    let mut entries = Vec::with_capacity(BoundName::ALL.len());
    let mut push = |name, value, target| entries.push(BoundEntry { name, value, target });
    push(BoundName::Thm1, Some(thm1_constant(q) * z_trunc), estimation_error);
    push(
        BoundName::WedinReconstruction,
        bound_wedin_reconstruction(inst, q),
        estimation_error,
    );
    push(
        BoundName::Triangle,
        Some(2.0 * inst.z_spectrum.norm(q)),
        estimation_error,
    );
    push(
        BoundName::RankSpectral,
        Some(2.0 * q.root(inst.r as f64) * inst.z_spectrum.values()[0]),
        estimation_error,
    );
    push(BoundName::Thm2, Some(2.0 * z_trunc), projection_max);
    push(BoundName::RefinedProjectionLeft, Some(refined.0), projection.0);
    push(BoundName::RefinedProjectionRight, Some(refined.1), projection.1);
    push(BoundName::Thm5, bound_sin_theta_thm5(inst, q), sin_max);
    push(BoundName::WedinSinTheta, bound_wedin_sin_theta(inst, q)?, sin_max);
    push(
        BoundName::ProjectionViaSinTheta,
        bound_projection_via_sin_theta(inst, q)?,
        projection_max,
    );
    push(BoundName::VuPsd, bound_vu_psd(inst).filter(|_| psd), sin_theta.0);
    push(BoundName::YuLeiPsd, bound_yu_lei_psd(inst).filter(|_| psd), sin_theta.0);
    push(
        BoundName::YuAsym,
        bound_yu_asym(inst).filter(|_| frobenius),
        sin_theta.0,
    );

    let violations = entries.iter().filter(|e| e.violated()).map(|e| e.name).collect();
    Ok(BoundReport {
        q,
        estimation_error,
        projection_errors: projection,
        sin_theta,
        z_truncated_norm: z_trunc,
        entries,
        violations,
    })
}
