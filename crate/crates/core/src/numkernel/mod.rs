//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; the helpers here add the
//! handful of operations the PT machinery needs on top of nalgebra:
//! a general complex eigensolver with defectiveness detection, the matrix
//! exponential, the principal square root of a PSD matrix, the Hermitian
//! solution space of `H^dag X = X H`, and orthonormal basis completion.

mod eig;
mod expm;
pub mod json;
mod ortho;
mod sqrt;
mod sylvester;

pub use eig::{eig, EigenDecomposition};
pub use expm::matrix_exp;
pub use ortho::orthonormal_extension;
pub use sqrt::{hermitian_eigen, principal_sqrt_psd, HermitianEigen};
pub use sylvester::{hermitian_linearization, sylvester_hermitian_nullspace};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

use crate::error::{PtError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Residual equalities such as `H PT = PT conj(H)`.
    pub eq_tol: f64,
    /// Relative threshold for treating an eigenvalue as real.
    pub real_tol: f64,
    /// Eigenvector-matrix condition number above which H counts as defective.
    pub defect_cond: f64,
    /// Nonnegativity threshold for eigenvalues of PSD matrices.
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eq_tol: 1e-10,
            real_tol: 1e-9,
            defect_cond: 1e12,
            psd_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.eq_tol, self.real_tol, self.defect_cond, self.psd_tol];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(PtError::InvalidParameter(
                "tolerances must be finite and strictly positive".into(),
            ))
        }
    }

    /// `|Im z| <= real_tol * max(1, |z|)`.
    pub fn is_real(&self, z: Complex64) -> bool {
        z.im.abs() <= self.real_tol * z.norm().max(1.0)
    }
}

pub fn ensure_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(PtError::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub fn ensure_same_order(a: &ComplexMatrix, n: usize) -> Result<()> {
    let m = ensure_square(a)?;
    if m != n {
        return Err(PtError::DimensionMismatch {
            expected: n,
            found: m,
        });
    }
    Ok(())
}

pub fn ensure_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(PtError::NonFinite)
    }
}

pub fn fro(a: &ComplexMatrix) -> f64 {
    a.norm()
}

pub fn conj(a: &ComplexMatrix) -> ComplexMatrix {
    a.map(|z| z.conj())
}

pub fn conj_vec(v: &ComplexVector) -> ComplexVector {
    v.map(|z| z.conj())
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `||A - A^dag||_F`.
pub fn hermiticity_residual(a: &ComplexMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn is_hermitian(a: &ComplexMatrix, tol: &Tolerances) -> bool {
    a.is_square() && hermiticity_residual(a) <= tol.eq_tol * fro(a).max(1.0)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(a)?;
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| PtError::NumericalFailure("matrix is singular".into()))?;
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(PtError::NumericalFailure("matrix is singular".into()));
    }
    Ok(inv)
}

/// Frobenius condition number `||A||_F ||A^-1||_F` (infinite when singular).
pub fn condition_fro(a: &ComplexMatrix) -> f64 {
    match inverse(a) {
        Ok(inv) => fro(a) * fro(&inv),
        Err(_) => f64::INFINITY,
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn diag(values: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(values))
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            re(values[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Build a matrix from rows of complex entries.
pub fn from_rows(rows: &[&[Complex64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |i, j| rows[i][j])
}

/// Build a real-valued matrix from rows.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |i, j| re(rows[i][j]))
}

pub fn pauli_x() -> ComplexMatrix {
    from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    from_rows(&[&[re(0.0), -I], &[I, re(0.0)]])
}

pub fn pauli_z() -> ComplexMatrix {
    from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// Stack two vectors as `(top; bottom)`.
pub fn stack(top: &ComplexVector, bottom: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(top.len() + bottom.len());
    out.rows_mut(0, top.len()).copy_from(top);
    out.rows_mut(top.len(), bottom.len()).copy_from(bottom);
    out
}

/// Assemble `[[a, b], [c, d]]` from conforming blocks (`a` and `d` square).
pub fn block2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> ComplexMatrix {
    let (n, m) = (a.nrows(), d.nrows());
    let mut out = ComplexMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, m)).copy_from(b);
    out.view_mut((n, 0), (m, n)).copy_from(c);
    out.view_mut((n, n), (m, m)).copy_from(d);
    out
}

/// Columns of `m` as owned vectors.
pub fn columns(m: &ComplexMatrix) -> Vec<ComplexVector> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

pub fn from_columns(cols: &[ComplexVector]) -> ComplexMatrix {
    ComplexMatrix::from_columns(cols)
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
