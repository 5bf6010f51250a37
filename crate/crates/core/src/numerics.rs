//! Dense linear-algebra kernels shared by every learner.
//!
//! The SVD itself is delegated to `nalgebra`; this module fixes the
//! conventions on top of it (descending singular values, a deterministic sign
//! for each singular pair, relative rank tolerances) and derives null-space
//! bases, range bases, minimum-norm least-squares solves and principal angles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default rank tolerance, relative to the largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Components with magnitude below this are skipped when choosing the sign of
/// a right singular vector.
const SIGN_EPS: f64 = 1e-12;

pub fn ensure_finite(a: &Matrix) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix)
    }
}

pub fn ensure_finite_vec(v: &Vector) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix)
    }
}

/// Thin singular value decomposition `a = u * diag(singular_values) * vt`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub vt: Matrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * &self.vt
    }

    pub fn rank(&self, tol_rel: f64) -> Result<usize> {
        numerical_rank(&self.singular_values, tol_rel)
    }
}

/// Thin SVD with singular values sorted non-increasing and each right
/// singular vector's first non-negligible component made positive.
pub fn svd_thin(a: &Matrix) -> Result<SvdFactors> {
    ensure_finite(a)?;
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(SvdFactors {
            u: Matrix::zeros(m, 0),
            singular_values: Vec::new(),
            vt: Matrix::zeros(0, n),
        });
    }

    let svd = a.clone().svd(true, true);
    let u_raw = svd.u.expect("u requested");
    let vt_raw = svd.v_t.expect("v_t requested");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));

    let mut u = Matrix::zeros(m, k);
    let mut vt = Matrix::zeros(k, n);
    let mut singular_values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut ucol = u_raw.column(src).clone_owned();
        let mut vrow = vt_raw.row(src).clone_owned();
        if let Some(first) = vrow.iter().find(|x| x.abs() > SIGN_EPS) {
            if *first < 0.0 {
                ucol.neg_mut();
                vrow.neg_mut();
            }
        }
        u.set_column(dst, &ucol);
        vt.set_row(dst, &vrow);
        singular_values.push(sv[src].max(0.0));
    }

    Ok(SvdFactors {
        u,
        singular_values,
        vt,
    })
}

/// Number of singular values strictly above `tol_rel * sigma_1`.
pub fn numerical_rank(singular_values: &[f64], tol_rel: f64) -> Result<usize> {
    numerical_rank_scaled(singular_values, tol_rel, 0.0)
}

/// Number of singular values strictly above `tol_rel * max(sigma_1, reference)`.
///
/// A positive `reference` (typically the norm of the matrix a product was
/// formed from) keeps pure rounding noise from counting as rank.
pub fn numerical_rank_scaled(
    singular_values: &[f64],
    tol_rel: f64,
    reference: f64,
) -> Result<usize> {
    if !(reference >= 0.0 && reference.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "rank reference must be finite and non-negative, got {reference}"
        )));
    }
    if !(tol_rel > 0.0 && tol_rel.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "rank tolerance must be positive and finite, got {tol_rel}"
        )));
    }
    if singular_values.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidInput(
            "singular values must be finite and non-negative".into(),
        ));
    }
    if singular_values.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput(
            "singular values must be sorted non-increasing".into(),
        ));
    }
    let Some(&top) = singular_values.first() else {
        return Ok(0);
    };
    if top == 0.0 {
        return Ok(0);
    }
    let cutoff = tol_rel * top.max(reference);
    Ok(singular_values.iter().take_while(|&&s| s > cutoff).count())
}

/// Matrix with orthonormal columns spanning a subspace of `R^ambient_dim`.
///
/// A zero-column matrix is the trivial subspace `{0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis {
    matrix: Matrix,
    tol: f64,
}

impl OrthonormalBasis {
    /// Wraps `matrix` after checking `matrix^T matrix = I` within `1e-10`.
    pub fn new(matrix: Matrix, tol: f64) -> Result<Self> {
        ensure_finite(&matrix)?;
        let basis = Self { matrix, tol };
        let err = basis.orthogonality_error();
        if err > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "columns are not orthonormal (error {err:.3e})"
            )));
        }
        Ok(basis)
    }

    /// Callers guarantee orthonormal columns.
    pub(crate) fn from_orthonormal(matrix: Matrix, tol: f64) -> Self {
        Self { matrix, tol }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_orthonormal(Matrix::identity(n, n), DEFAULT_RANK_TOL)
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_orthonormal(Matrix::zeros(n, 0), DEFAULT_RANK_TOL)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Orthogonal projector `M M^T`.
    pub fn projector(&self) -> Matrix {
        &self.matrix * self.matrix.transpose()
    }

    /// `M M^T v` without forming the projector.
    pub fn project(&self, v: &Vector) -> Vector {
        &self.matrix * (self.matrix.transpose() * v)
    }

    /// Frobenius norm of `M^T M - I`.
    pub fn orthogonality_error(&self) -> f64 {
        let r = self.rank();
        (self.matrix.transpose() * &self.matrix - Matrix::identity(r, r)).norm()
    }

    /// Basis of the orthogonal complement in the ambient space.
    pub fn complement(&self) -> Result<Self> {
        let n = self.ambient_dim();
        if self.rank() == 0 {
            return Ok(Self::from_orthonormal(Matrix::identity(n, n), self.tol));
        }
        nullspace_basis(&self.matrix.transpose(), self.tol)
    }

    /// `self * inner`: the subspace of `span(self)` with coordinates `inner`.
    pub fn compose(&self, inner: &OrthonormalBasis) -> Result<Self> {
        if inner.ambient_dim() != self.rank() {
            return Err(shape_err(format!(
                "cannot compose rank-{} basis with coordinates in R^{}",
                self.rank(),
                inner.ambient_dim()
            )));
        }
        Ok(Self::from_orthonormal(
            &self.matrix * &inner.matrix,
            inner.tol,
        ))
    }

    /// Appends orthonormal columns that are orthogonal to `self`.
    pub fn extend(&self, extra: &OrthonormalBasis) -> Result<Self> {
        if extra.ambient_dim() != self.ambient_dim() {
            return Err(shape_err("ambient dimensions differ"));
        }
        let n = self.ambient_dim();
        let (r1, r2) = (self.rank(), extra.rank());
        let mut m = Matrix::zeros(n, r1 + r2);
        m.columns_mut(0, r1).copy_from(&self.matrix);
        m.columns_mut(r1, r2).copy_from(&extra.matrix);
        Ok(Self::from_orthonormal(m, self.tol))
    }

    pub fn to_record(&self) -> MatrixRecord {
        MatrixRecord::from_matrix(&self.matrix)
    }
}

/// Row-major matrix shape used by every JSON snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &Matrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: to_row_major(m),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        from_row_major(self.rows, self.cols, &self.data)
    }
}

pub fn to_row_major(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        out.extend(m.row(i).iter().copied());
    }
    out
}

pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Matrix> {
    if data.len() != rows * cols {
        return Err(shape_err(format!(
            "{} entries cannot fill a {rows}x{cols} matrix",
            data.len()
        )));
    }
    let m = Matrix::from_row_slice(rows, cols, data);
    ensure_finite(&m)?;
    Ok(m)
}

/// Singular values (padded with zeros to length `cols`) and the full
/// `cols x cols` right factor.
fn full_right_factors(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let (m, n) = a.shape();
    let f = if m >= n {
        svd_thin(a)?
    } else {
        let mut padded = Matrix::zeros(n, n);
        padded.rows_mut(0, m).copy_from(a);
        svd_thin(&padded)?
    };
    Ok((f.singular_values, f.vt))
}

/// Orthonormal basis of `null(a)` from the right singular vectors belonging to
/// (numerically) zero singular values.
pub fn nullspace_basis(a: &Matrix, tol_rel: f64) -> Result<OrthonormalBasis> {
    nullspace_basis_scaled(a, tol_rel, 0.0)
}

/// [`nullspace_basis`] with the rank cutoff of [`numerical_rank_scaled`].
pub fn nullspace_basis_scaled(
    a: &Matrix,
    tol_rel: f64,
    reference: f64,
) -> Result<OrthonormalBasis> {
    let n = a.ncols();
    if n == 0 {
        return Err(Error::InvalidInput(
            "null space of a matrix with no columns".into(),
        ));
    }
    let (sv, vt) = full_right_factors(a)?;
    let r = numerical_rank_scaled(&sv, tol_rel, reference)?;
    let basis = vt.rows(r, n - r).transpose();
    Ok(OrthonormalBasis::from_orthonormal(basis, tol_rel))
}

/// Orthonormal basis of `range(a)` from the left singular vectors belonging to
/// non-zero singular values.
pub fn range_basis(a: &Matrix, tol_rel: f64) -> Result<OrthonormalBasis> {
    range_basis_scaled(a, tol_rel, 0.0)
}

/// [`range_basis`] with the rank cutoff of [`numerical_rank_scaled`].
pub fn range_basis_scaled(a: &Matrix, tol_rel: f64, reference: f64) -> Result<OrthonormalBasis> {
    let f = svd_thin(a)?;
    let r = numerical_rank_scaled(&f.singular_values, tol_rel, reference)?;
    Ok(OrthonormalBasis::from_orthonormal(
        f.u.columns(0, r).clone_owned(),
        tol_rel,
    ))
}

/// Minimum-norm least-squares solution `a^+ b` at the default tolerance.
pub fn pinv_solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    pinv_solve_tol(a, b, DEFAULT_RANK_TOL)
}

pub fn pinv_solve_tol(a: &Matrix, b: &Vector, tol_rel: f64) -> Result<Vector> {
    pinv_solve_scaled(a, b, tol_rel, 0.0)
}

/// [`pinv_solve_tol`] with the rank cutoff of [`numerical_rank_scaled`].
pub fn pinv_solve_scaled(a: &Matrix, b: &Vector, tol_rel: f64, reference: f64) -> Result<Vector> {
    if b.len() != a.nrows() {
        return Err(shape_err(format!(
            "rhs has length {} but matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    ensure_finite_vec(b)?;
    let f = svd_thin(a)?;
    let r = numerical_rank_scaled(&f.singular_values, tol_rel, reference)?;
    let mut coeffs = f.u.columns(0, r).transpose() * b;
    for (c, s) in coeffs.iter_mut().zip(&f.singular_values) {
        *c /= s;
    }
    Ok(f.vt.rows(0, r).transpose() * coeffs)
}

/// Principal angles (ascending, radians) between two subspaces.
pub fn principal_angles(b1: &OrthonormalBasis, b2: &OrthonormalBasis) -> Result<Vec<f64>> {
    if b1.ambient_dim() != b2.ambient_dim() {
        return Err(shape_err(format!(
            "ambient dimensions {} and {} differ",
            b1.ambient_dim(),
            b2.ambient_dim()
        )));
    }
    let cross = b1.matrix().transpose() * b2.matrix();
    let f = svd_thin(&cross)?;
    Ok(f.singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0).acos())
        .collect())
}

/// Equal ranks and every principal angle at most `angle_tol`.
pub fn same_subspace(b1: &OrthonormalBasis, b2: &OrthonormalBasis, angle_tol: f64) -> Result<bool> {
    if b1.rank() != b2.rank() {
        return Ok(false);
    }
    Ok(principal_angles(b1, b2)?.iter().all(|a| *a <= angle_tol))
}

/// Householder QR with the sign of each column chosen so `R` has a
/// non-negative diagonal; returns the `Q` factor.
pub fn orthonormalize_qr(a: &Matrix) -> Result<Matrix> {
    ensure_finite(a)?;
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// Largest absolute entry; zero for an empty matrix.
pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Stacks matrices vertically. All inputs must share a column count.
pub fn vstack(blocks: &[&Matrix]) -> Result<Matrix> {
    let Some(first) = blocks.first() else {
        return Err(Error::InvalidInput("nothing to stack".into()));
    };
    let cols = first.ncols();
    if blocks.iter().any(|b| b.ncols() != cols) {
        return Err(shape_err("stacked blocks have different column counts"));
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.rows_mut(at, b.nrows()).copy_from(*b);
        at += b.nrows();
    }
    Ok(out)
}

/// Concatenates matrices horizontally. All inputs must share a row count.
pub fn hstack(blocks: &[&Matrix]) -> Result<Matrix> {
    let Some(first) = blocks.first() else {
        return Err(Error::InvalidInput("nothing to concatenate".into()));
    };
    let rows = first.nrows();
    if blocks.iter().any(|b| b.nrows() != rows) {
        return Err(shape_err("concatenated blocks have different row counts"));
    }
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(*b);
        at += b.ncols();
    }
    Ok(out)
}

pub fn vconcat(parts: &[&Vector]) -> Vector {
    let len: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = Vector::zeros(len);
    let mut at = 0;
    for p in parts {
        out.rows_mut(at, p.len()).copy_from(*p);
        at += p.len();
    }
    out
}
