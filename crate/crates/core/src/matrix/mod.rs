//! Dense real matrices, singular value decompositions, orthonormal frames and
//! the projector algebra built on them.
//!
//! Every matrix handled by the crate is a [`Matrix`]: a non-empty,
//! finite-valued `nalgebra::DMatrix<f64>`. Read access goes through `Deref`,
//! so all of nalgebra's non-mutating API is available on it.

pub mod io;
pub mod random;

use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::tol;

pub use random::{sample_gaussian, sample_gaussian_with, sample_haar_frame, sample_haar_frame_with, RngSeed};

/// A finite, non-empty dense real matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    /// Wraps `inner`, rejecting empty shapes and non-finite entries.
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::Shape(format!(
                "matrices need at least one row and one column, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                if !inner[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Matrix(inner))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Matrix::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|row| row.len() != cols) {
            return Err(Error::Shape(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Matrix::from_row_slice(rows.len(), cols, &flat)
    }

    /// An `rows × cols` matrix with `diag` on its main diagonal.
    pub fn from_diagonal(rows: usize, cols: usize, diag: &[f64]) -> Result<Self> {
        if diag.len() > rows.min(cols) {
            return Err(Error::Shape(format!(
                "diagonal of length {} does not fit a {rows}x{cols} matrix",
                diag.len()
            )));
        }
        let mut inner = DMatrix::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate() {
            inner[(i, i)] = d;
        }
        Matrix::new(inner)
    }

    /// Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrices need a positive shape");
        Matrix(DMatrix::zeros(rows, cols))
    }

    /// Panics if `n` is zero.
    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "matrices need a positive shape");
        Matrix(DMatrix::identity(n, n))
    }

    /// Wraps the result of arithmetic on finite matrices.
    pub(crate) fn from_inner(inner: DMatrix<f64>) -> Self {
        debug_assert!(inner.nrows() > 0 && inner.ncols() > 0);
        Matrix(inner)
    }

    pub fn as_inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn min_dim(&self) -> usize {
        self.0.nrows().min(self.0.ncols())
    }

    pub fn transposed(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix(&self.0 * factor)
    }

    /// Frobenius inner product `⟨self, other⟩ = tr(selfᵀ other)`.
    pub fn inner_product(&self, other: &Matrix) -> Result<f64> {
        ensure_same_shape(self, other, "inner product")?;
        Ok(self.0.dot(&other.0))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// `true` when the matrix is square and `‖M − Mᵀ‖_F ≤ tol·(1 + ‖M‖_F)`.
    pub fn is_symmetric(&self) -> bool {
        self.0.is_square() && (&self.0 - self.0.transpose()).norm() <= tol::SYMMETRY * (1.0 + self.0.norm())
    }

    /// Smallest eigenvalue of the symmetric part, for square matrices.
    pub fn min_symmetric_eigenvalue(&self) -> Option<f64> {
        if !self.0.is_square() {
            return None;
        }
        let sym = (&self.0 + self.0.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().copied().reduce(f64::min)
    }

    /// Symmetric with no eigenvalue below `−NUMERICAL_RANK · ‖M‖_F`.
    pub fn is_positive_semidefinite(&self) -> bool {
        self.is_symmetric()
            && self
                .min_symmetric_eigenvalue()
                .is_some_and(|lambda| lambda >= -tol::NUMERICAL_RANK * self.0.norm())
    }
}

impl Deref for Matrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{:?}", self.0.shape())?;
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<DMatrix<f64>> for Matrix {
    type Error = Error;

    fn try_from(inner: DMatrix<f64>) -> Result<Self> {
        Matrix::new(inner)
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        Matrix(&self.0 + &rhs.0)
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        Matrix(&self.0 - &rhs.0)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        Matrix(&self.0 * &rhs.0)
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        Matrix(-&self.0)
    }
}

pub(crate) fn ensure_same_shape(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{what}: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// A `p × r` matrix with orthonormal columns, an element of the Stiefel set.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalFrame(Matrix);

impl OrthonormalFrame {
    /// Checks `‖FᵀF − I‖ ≤ ORTHONORMALITY` and `r ≤ p`.
    pub fn new(frame: Matrix) -> Result<Self> {
        if frame.ncols() > frame.nrows() {
            return Err(domain(format!(
                "a frame of width {} cannot live in dimension {}",
                frame.ncols(),
                frame.nrows()
            )));
        }
        let deviation = orthonormality_deviation(&frame);
        if deviation > tol::ORTHONORMALITY {
            return Err(Error::NotOrthonormal {
                deviation,
                tolerance: tol::ORTHONORMALITY,
            });
        }
        Ok(OrthonormalFrame(frame))
    }

    /// The first `width` standard basis vectors of `ℝ^dim`.
    pub fn standard(dim: usize, width: usize) -> Result<Self> {
        if width == 0 || width > dim {
            return Err(domain(format!("cannot take {width} basis vectors of R^{dim}")));
        }
        Ok(OrthonormalFrame(Matrix(DMatrix::identity(dim, width))))
    }

    pub(crate) fn from_trusted(inner: DMatrix<f64>) -> Self {
        debug_assert!(orthonormality_deviation(&Matrix(inner.clone())) <= 1e-8);
        OrthonormalFrame(Matrix(inner))
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn width(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `Q·F` for an orthogonal `Q` of matching size.
    pub fn rotated(&self, q: &Matrix) -> Result<Self> {
        if q.shape() != (self.ambient_dim(), self.ambient_dim()) {
            return Err(Error::Shape("rotation must be square in the ambient dimension".into()));
        }
        OrthonormalFrame::new(q * &self.0)
    }

    /// `F·R` for an orthogonal `R` of size `width × width`.
    pub fn reparametrized(&self, r: &Matrix) -> Result<Self> {
        if r.shape() != (self.width(), self.width()) {
            return Err(Error::Shape(
                "reparametrization must be square in the frame width".into(),
            ));
        }
        OrthonormalFrame::new(&self.0 * r)
    }
}

impl Deref for OrthonormalFrame {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// Spectral norm of `FᵀF − I`.
pub fn orthonormality_deviation(frame: &Matrix) -> f64 {
    let gram = frame.0.transpose() * &frame.0;
    let deviation = gram - DMatrix::<f64>::identity(frame.ncols(), frame.ncols());
    let frobenius = deviation.norm();
    if frobenius <= tol::ORTHONORMALITY || frobenius == 0.0 {
        return frobenius;
    }
    // The deviation is symmetric, so its spectral norm is its largest |eigenvalue|.
    deviation
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// Thin singular value decomposition `M = left · diag(values) · rightᵀ`.
///
/// `values` has `k = min(m, n)` entries in descending order. Each left singular
/// vector is signed so that its entry of largest magnitude (lowest row index on
/// ties) is positive, and the matching right vector follows.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    left: DMatrix<f64>,
    values: Vec<f64>,
    right: DMatrix<f64>,
}

impl SvdFactors {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The full `m × k` left basis.
    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    /// The full `n × k` right basis.
    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.nrows(), self.right.nrows())
    }

    pub fn min_dim(&self) -> usize {
        self.values.len()
    }

    /// Leading `r` left singular vectors.
    pub fn left_frame(&self, r: usize) -> Result<OrthonormalFrame> {
        self.check_width(r)?;
        Ok(OrthonormalFrame::from_trusted(self.left.columns(0, r).into_owned()))
    }

    /// Leading `r` right singular vectors.
    pub fn right_frame(&self, r: usize) -> Result<OrthonormalFrame> {
        self.check_width(r)?;
        Ok(OrthonormalFrame::from_trusted(self.right.columns(0, r).into_owned()))
    }

    /// `σ_i` with the usual one-based index; zero beyond `min(m, n)`.
    pub fn sigma(&self, i: usize) -> f64 {
        assert!(i >= 1, "singular values are indexed from 1");
        self.values.get(i - 1).copied().unwrap_or(0.0)
    }

    /// Number of singular values above `NUMERICAL_RANK · σ₁`.
    pub fn numerical_rank(&self) -> usize {
        let top = self.sigma(1);
        self.values.iter().filter(|&&s| s > tol::NUMERICAL_RANK * top).count()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.partial_sum(0, self.values.len())
    }

    fn partial_sum(&self, start: usize, end: usize) -> Matrix {
        let (m, n) = self.shape();
        let width = end - start;
        if width == 0 {
            return Matrix::zeros(m, n);
        }
        let mut scaled = self.left.columns(start, width).into_owned();
        for (j, &s) in self.values[start..end].iter().enumerate() {
            scaled.column_mut(j).scale_mut(s);
        }
        Matrix(scaled * self.right.columns(start, width).transpose())
    }

    fn check_width(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.values.len() {
            return Err(domain(format!("frame width {r} outside 1..={}", self.values.len())));
        }
        Ok(())
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if r > self.values.len() {
            return Err(domain(format!("rank {r} exceeds min(m, n) = {}", self.values.len())));
        }
        Ok(())
    }
}

fn svd_iteration_cap(k: usize) -> usize {
    // nalgebra treats 0 as "iterate forever"; keep a finite cap so failure is reported.
    1000 * (k + 1)
}

/// Full thin SVD with the crate's sign convention.
pub fn svd(m: &Matrix) -> Result<SvdFactors> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let decomposition = nalgebra::SVD::try_new(m.0.clone(), true, true, f64::EPSILON, svd_iteration_cap(k))
        .ok_or(Error::NoConvergence { rows, cols })?;
    let mut left = decomposition.u.ok_or(Error::NoConvergence { rows, cols })?;
    let v_t = decomposition.v_t.ok_or(Error::NoConvergence { rows, cols })?;
    let mut right = v_t.transpose();
    let values: Vec<f64> = decomposition.singular_values.iter().map(|&s| s.max(0.0)).collect();

    for j in 0..k {
        let mut pivot = 0;
        let mut largest = -1.0;
        for i in 0..rows {
            let magnitude = left[(i, j)].abs();
            if magnitude > largest {
                largest = magnitude;
                pivot = i;
            }
        }
        if left[(pivot, j)] < 0.0 {
            left.column_mut(j).neg_mut();
            right.column_mut(j).neg_mut();
        }
    }
    Ok(SvdFactors { left, values, right })
}

/// Singular values only, in descending order.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let decomposition = nalgebra::SVD::try_new(m.0.clone(), false, false, f64::EPSILON, svd_iteration_cap(k))
        .ok_or(Error::NoConvergence { rows, cols })?;
    Ok(decomposition.singular_values.iter().map(|&s| s.max(0.0)).collect())
}

/// Best rank-`r` approximation `Σ_{i≤r} σ_i u_i v_iᵀ`; `r = 0` gives zero.
pub fn truncate(factors: &SvdFactors, r: usize) -> Result<Matrix> {
    factors.check_rank(r)?;
    Ok(factors.partial_sum(0, r))
}

/// Remainder `Σ_{i>r} σ_i u_i v_iᵀ`, so that `truncate + residual` rebuilds the source.
pub fn residual(factors: &SvdFactors, r: usize) -> Result<Matrix> {
    factors.check_rank(r)?;
    Ok(factors.partial_sum(r, factors.values.len()))
}

/// Orthogonal projector `U Uᵀ` onto the span of a frame.
pub fn projector(frame: &OrthonormalFrame) -> Matrix {
    Matrix(&frame.0 .0 * frame.0 .0.transpose())
}

/// An orthonormal basis of the orthogonal complement of `span(U)`.
///
/// Taken from the trailing columns of the Householder factor of `[U | I]`, so
/// `[U U⊥]` is orthogonal to working precision.
pub fn orthonormal_complement(frame: &OrthonormalFrame) -> Result<OrthonormalFrame> {
    let p = frame.ambient_dim();
    let r = frame.width();
    if r >= p {
        return Err(domain(format!("a width-{r} frame in R^{p} has an empty complement")));
    }
    let mut augmented = DMatrix::zeros(p, r + p);
    augmented.columns_mut(0, r).copy_from(&frame.0 .0);
    augmented.columns_mut(r, p).fill_with_identity();
    let q = augmented.qr().q();
    Ok(OrthonormalFrame::from_trusted(q.columns(r, p - r).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn diag(rows: usize, cols: usize, d: &[f64]) -> Matrix {
        Matrix::from_diagonal(rows, cols, d).unwrap()
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    fn gaussian(m: usize, n: usize, seed: u64) -> Matrix {
        sample_gaussian(m, n, 1.0, RngSeed(seed)).unwrap()
    }

    #[test]
    fn construction_rejects_nan_and_empty() {
        assert!(matches!(
            Matrix::from_row_slice(1, 2, &[1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(Matrix::new(DMatrix::zeros(0, 3)).is_err());
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn svd_of_diagonal_sorts_values() {
        let f = svd(&diag(3, 3, &[3.0, 4.0, 0.0])).unwrap();
        assert_eq!(f.values(), &[4.0, 3.0, 0.0]);
    }

    #[test]
    fn svd_of_zero_matrix() {
        let f = svd(&Matrix::zeros(2, 3)).unwrap();
        assert_eq!(f.values(), &[0.0, 0.0]);
        assert!(truncate(&f, 2).unwrap().is_zero());
    }

    #[test]
    fn svd_reconstructs_gaussian() {
        let m = gaussian(5, 4, 1);
        let f = svd(&m).unwrap();
        // reconstruction oracle: entrywise product of the three factors
        let mut rebuilt = DMatrix::zeros(5, 4);
        for i in 0..5 {
            for j in 0..4 {
                rebuilt[(i, j)] = (0..4)
                    .map(|k| f.left()[(i, k)] * f.values()[k] * f.right()[(j, k)])
                    .sum();
            }
        }
        assert!(max_abs_diff(&rebuilt, &m) < 1e-10);
        assert!(orthonormality_deviation(&Matrix(f.left().clone())) < 1e-10);
        assert!(orthonormality_deviation(&Matrix(f.right().clone())) < 1e-10);
    }

    #[test]
    fn svd_sign_convention() {
        let m = gaussian(6, 3, 2);
        let f = svd(&m).unwrap();
        for j in 0..3 {
            let col = f.left().column(j);
            let pivot = col.iamax();
            assert!(col[pivot] > 0.0);
        }
        // deterministic for a fixed input
        let g = svd(&m).unwrap();
        assert_eq!(f.left(), g.left());
        assert_eq!(f.values(), g.values());
    }

    #[test]
    fn wide_matrices_decompose() {
        let m = gaussian(3, 7, 3);
        let f = svd(&m).unwrap();
        assert_eq!(f.left().shape(), (3, 3));
        assert_eq!(f.right().shape(), (7, 3));
        assert!((f.reconstruct().into_inner() - m.into_inner()).norm() < 1e-10);
    }

    #[test]
    fn truncate_examples() {
        let f = svd(&diag(2, 2, &[3.0, 1.0])).unwrap();
        assert!(max_abs_diff(&truncate(&f, 1).unwrap(), &diag(2, 2, &[3.0, 0.0])) < 1e-15);
        assert!(max_abs_diff(&residual(&f, 1).unwrap(), &diag(2, 2, &[0.0, 1.0])) < 1e-15);
        assert!(max_abs_diff(&residual(&f, 0).unwrap(), &diag(2, 2, &[3.0, 1.0])) < 1e-15);
        assert!(truncate(&f, 0).unwrap().is_zero());
        assert!(matches!(truncate(&f, 3), Err(Error::Domain(_))));

        let b = svd(&diag(2, 2, &[0.9, 1.0])).unwrap();
        assert!(max_abs_diff(&truncate(&b, 1).unwrap(), &diag(2, 2, &[0.0, 1.0])) < 1e-15);

        let m = gaussian(4, 6, 4);
        let fm = svd(&m).unwrap();
        assert!(max_abs_diff(&truncate(&fm, 4).unwrap(), &m) < 1e-10);
    }

    #[test]
    fn residual_top_singular_value() {
        let m = gaussian(6, 5, 5);
        let f = svd(&m).unwrap();
        let rest = residual(&f, 2).unwrap();
        let top = singular_values(&rest).unwrap()[0];
        assert!((top - f.values()[2]).abs() < 1e-10);
        let sum = &truncate(&f, 2).unwrap() + &rest;
        assert!((sum.into_inner() - m.into_inner()).norm() < 1e-10);
    }

    #[test]
    fn projector_examples() {
        let e1 = OrthonormalFrame::standard(2, 1).unwrap();
        assert_eq!(projector(&e1), diag(2, 2, &[1.0, 0.0]));
        let full = OrthonormalFrame::standard(3, 3).unwrap();
        assert_eq!(projector(&full), Matrix::identity(3));

        let u = sample_haar_frame(5, 2, RngSeed(9)).unwrap();
        let p = projector(&u);
        let mut eig: Vec<f64> = p.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in eig.iter().zip([1.0, 1.0, 0.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        assert!((p.trace() - 2.0).abs() < 1e-8);
        assert!((&(&p * &p) - &p).norm() < 1e-10);
    }

    #[test]
    fn complement_examples() {
        let e1 = OrthonormalFrame::standard(2, 1).unwrap();
        let c = orthonormal_complement(&e1).unwrap();
        assert!(c[(0, 0)].abs() < 1e-15 && (c[(1, 0)].abs() - 1.0).abs() < 1e-15);

        let u = sample_haar_frame(6, 2, RngSeed(10)).unwrap();
        let c = orthonormal_complement(&u).unwrap();
        assert_eq!(c.width(), 4);
        assert!((&c.transposed() * u.as_matrix()).amax() < 1e-10);
        let mut joined = DMatrix::zeros(6, 6);
        joined.columns_mut(0, 2).copy_from(u.as_inner());
        joined.columns_mut(2, 4).copy_from(c.as_inner());
        assert!(orthonormality_deviation(&Matrix(joined)) < 1e-10);
        let sum = &projector(&u) + &projector(&c);
        assert!(max_abs_diff(&sum, &DMatrix::identity(6, 6)) < 1e-10);

        let full = OrthonormalFrame::standard(3, 3).unwrap();
        assert!(matches!(orthonormal_complement(&full), Err(Error::Domain(_))));
    }

    #[test]
    fn frame_validation() {
        let not_unit = Matrix::from_row_slice(2, 1, &[1.0, 1.0]).unwrap();
        assert!(matches!(
            OrthonormalFrame::new(not_unit),
            Err(Error::NotOrthonormal { .. })
        ));
        let mut rng = RngSeed(3).rng();
        let tilt: f64 = rng.random_range(0.0..1.0);
        let unit = Matrix::from_row_slice(2, 1, &[tilt.cos(), tilt.sin()]).unwrap();
        assert!(OrthonormalFrame::new(unit).is_ok());
    }

    #[test]
    fn symmetric_and_psd_checks() {
        let a = diag(3, 3, &[2.0, 1.0, 0.0]);
        assert!(a.is_symmetric() && a.is_positive_semidefinite());
        let b = diag(2, 2, &[1.0, -1.0]);
        assert!(b.is_symmetric() && !b.is_positive_semidefinite());
        let c = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(!c.is_symmetric());
    }
}
