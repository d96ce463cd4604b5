//! Numerical tolerances shared by every module.
//!
//! All comparisons in the crate and its test suites draw from this list so
//! that modules agree on what "orthonormal", "rank r" or "violated" means.

/// Spectral norm of `FᵀF − I` tolerated for an orthonormal frame.
pub const ORTHONORMALITY: f64 = 1e-10;

/// Relative Frobenius error tolerated when reconstructing a matrix from its
/// singular value decomposition.
pub const RECONSTRUCTION: f64 = 1e-10;

/// Entrywise tolerance for `B = A + Z` in a perturbation instance.
pub const INSTANCE_SUM: f64 = 1e-12;

/// Singular values below `NUMERICAL_RANK · σ₁` do not count towards rank.
pub const NUMERICAL_RANK: f64 = 1e-10;

/// Bounds dividing by `σ_r` are inapplicable when `σ_r < SINGULAR_GAP · σ₁`.
pub const SINGULAR_GAP: f64 = 1e-12;

/// Singular values below `SPECTRUM_CLAMP · σ₁` are zeroed before
/// exponentiation.
pub const SPECTRUM_CLAMP: f64 = 1e-14;

/// Cosines of principal angles are clamped into `[0, 1]` from this far
/// outside it.
pub const COSINE_CLAMP: f64 = 1e-12;

/// Relative slack applied to every bound check: `lhs ≤ bound + BOUND_SLACK·(1 + lhs)`.
pub const BOUND_SLACK: f64 = 1e-9;

/// Relative tolerance for symmetry checks on square matrices.
pub const SYMMETRY: f64 = 1e-12;

/// Slack applied to `x ≤ y` comparisons with relative scale.
pub fn within_bound(lhs: f64, bound: f64) -> bool {
    lhs <= bound + BOUND_SLACK * (1.0 + lhs.abs())
}
