//! Distances between subspaces spanned by orthonormal frames.

use crate::error::{Error, Result};
use crate::matrix::{self, projector, Matrix, OrthonormalFrame};
use crate::norms::{schatten_norm, vector_norm, SchattenIndex};
use crate::tol;

/// Principal angles between two frames of equal width.
///
/// `cosines` are the singular values of `U₁ᵀU₂` (descending). `sines` are the
/// singular values of `(I − U₁U₁ᵀ)U₂` (ascending), which equal `√(1 − cos²)`
/// but stay accurate for small angles. `angles[i] = atan2(sines[i], cosines[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalAngles {
    pub cosines: Vec<f64>,
    pub sines: Vec<f64>,
    pub angles: Vec<f64>,
}

fn check_pair(u1: &OrthonormalFrame, u2: &OrthonormalFrame) -> Result<()> {
    if u1.shape() != u2.shape() {
        return Err(Error::Shape(format!(
            "frames have shapes {:?} and {:?}",
            u1.shape(),
            u2.shape()
        )));
    }
    Ok(())
}

pub fn principal_angles(u1: &OrthonormalFrame, u2: &OrthonormalFrame) -> Result<PrincipalAngles> {
    check_pair(u1, u2)?;
    let cross = &u1.transposed() * u2.as_matrix();
    let cosines: Vec<f64> = matrix::singular_values(&cross)?
        .into_iter()
        .map(|c| {
            debug_assert!(c <= 1.0 + tol::COSINE_CLAMP, "cosine {c} overshoots 1");
            c.clamp(0.0, 1.0)
        })
        .collect();
    let leftover = u2.as_matrix() - &(u1.as_matrix() * &cross);
    let mut sines: Vec<f64> = matrix::singular_values(&leftover)?
        .into_iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect();
    sines.reverse();
    let angles = cosines.iter().zip(&sines).map(|(c, s)| s.atan2(*c)).collect();
    Ok(PrincipalAngles { cosines, sines, angles })
}

/// `‖sin Θ(U₁, U₂)‖_q`.
pub fn sin_theta_distance(u1: &OrthonormalFrame, u2: &OrthonormalFrame, q: SchattenIndex) -> Result<f64> {
    Ok(vector_norm(&principal_angles(u1, u2)?.sines, q))
}

/// The alignment `O = W Vᵀ` from the SVD `U₂ᵀU₁ = W Λ Vᵀ`.
///
/// It minimizes `‖U₁ − U₂ O‖_F` over orthogonal `O`; for other `q` it
/// satisfies `‖sin Θ‖_q ≤ ‖U₁ − U₂ O‖_q ≤ 2‖sin Θ‖_q`.
pub fn procrustes_align(u1: &OrthonormalFrame, u2: &OrthonormalFrame) -> Result<Matrix> {
    check_pair(u1, u2)?;
    let cross = &u2.transposed() * u1.as_matrix();
    let factors = matrix::svd(&cross)?;
    Ok(Matrix::from_inner(factors.left() * factors.right().transpose()))
}

/// `‖U₁ − U₂ O‖_q` for the Procrustes alignment `O`.
pub fn aligned_distance(u1: &OrthonormalFrame, u2: &OrthonormalFrame, q: SchattenIndex) -> Result<f64> {
    let o = procrustes_align(u1, u2)?;
    schatten_norm(&(u1.as_matrix() - &(u2.as_matrix() * &o)), q)
}

/// `‖U₁U₁ᵀ − U₂U₂ᵀ‖_q`.
pub fn projection_distance(u1: &OrthonormalFrame, u2: &OrthonormalFrame, q: SchattenIndex) -> Result<f64> {
    check_pair(u1, u2)?;
    schatten_norm(&(&projector(u1) - &projector(u2)), q)
}

/// One index of the singular-value product relations.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexRelation {
    /// One-based index.
    pub index: usize,
    pub product: f64,
    /// `σ_i(A)·‖B‖`.
    pub upper: f64,
    /// `σ_i(A)·σ_n(B)`.
    pub lower: f64,
}

/// The four product relations for `A ∈ ℝ^{m×n}`, `B ∈ ℝ^{n×b}`:
/// `σ_i(A)σ_n(B) ≤ σ_i(AB) ≤ σ_i(A)‖B‖` and the same sandwich for `‖AB‖_q`.
///
/// `σ_n(B)` is the `n`-th singular value of `B`, taken as zero when `b < n`
/// (then `B` has fewer than `n` singular values and the lower relations are
/// trivial).
#[derive(Clone, Debug, PartialEq)]
pub struct ProductRelations {
    pub per_index: Vec<IndexRelation>,
    pub norm_product: f64,
    pub norm_upper: f64,
    pub norm_lower: f64,
}

impl ProductRelations {
    pub fn holds(&self) -> bool {
        let slack = |x: f64| tol::BOUND_SLACK * (1.0 + x);
        self.per_index
            .iter()
            .all(|r| r.product <= r.upper + slack(r.product) && r.product + slack(r.product) >= r.lower)
            && self.norm_product <= self.norm_upper + slack(self.norm_product)
            && self.norm_product + slack(self.norm_product) >= self.norm_lower
    }
}

pub fn product_singular_bounds_hold(a: &Matrix, b: &Matrix, q: SchattenIndex) -> Result<ProductRelations> {
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "cannot multiply {:?} by {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let n = b.nrows();
    let sa = matrix::singular_values(a)?;
    let sb = matrix::singular_values(b)?;
    let sab = matrix::singular_values(&(a * b))?;
    let spectral_b = sb[0];
    let floor_b = sb.get(n - 1).copied().unwrap_or(0.0);
    let per_index = sa
        .iter()
        .enumerate()
        .map(|(i, &s)| IndexRelation {
            index: i + 1,
            product: sab.get(i).copied().unwrap_or(0.0),
            upper: s * spectral_b,
            lower: s * floor_b,
        })
        .collect();
    let norm_a = vector_norm(&sa, q);
    Ok(ProductRelations {
        per_index,
        norm_product: vector_norm(&sab, q),
        norm_upper: norm_a * spectral_b,
        norm_lower: norm_a * floor_b,
    })
}
