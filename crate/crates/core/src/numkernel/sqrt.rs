use nalgebra::SymmetricEigen;

use super::{ensure_square, fro, hermitian_part, hermiticity_residual, ComplexMatrix, Tolerances};
use crate::error::{PtError, Result};
use num_complex::Complex64;

/// Unitary eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// `V diag(f(lambda)) V^dag`.
    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: F) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Eigendecomposition of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = ensure_square(a)?;
    let se = SymmetricEigen::try_new(hermitian_part(a), f64::EPSILON, 0).ok_or_else(|| {
        PtError::NumericalFailure("Hermitian eigensolver did not converge".into())
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Principal square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-psd_tol * max(1, lambda_max), 0)` are clamped to zero.
pub fn principal_sqrt_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    ensure_square(a)?;
    let residual = hermiticity_residual(a);
    if residual > tol.eq_tol * fro(a).max(1.0) {
        return Err(PtError::NotHermitian { residual });
    }
    let he = hermitian_eigen(a)?;
    let floor = -tol.psd_tol * he.max().abs().max(1.0);
    if he.min() < floor {
        return Err(PtError::NotPsd {
            min_eigenvalue: he.min(),
        });
    }
    Ok(hermitian_part(&he.apply(|lambda| {
        Complex64::new(lambda.max(0.0).sqrt(), 0.0)
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{diag_real, from_rows, identity, max_abs_diff, re, I};

    #[test]
    fn identity_root() {
        let s = principal_sqrt_psd(&identity(4), &Tolerances::default()).unwrap();
        assert!(max_abs_diff(&s, &identity(4)) < 1e-15);
    }

    #[test]
    fn diagonal_root() {
        let s = principal_sqrt_psd(&diag_real(&[4.0, 9.0]), &Tolerances::default()).unwrap();
        assert!(max_abs_diff(&s, &diag_real(&[2.0, 3.0])) < 1e-14);
    }

    #[test]
    fn coupling_matrix_of_dimer_metric() {
        let a = std::f64::consts::FRAC_PI_6;
        let (sn, cs) = a.sin_cos();
        let base = from_rows(&[&[re(1.0), -I * sn], &[I * sn, re(1.0)]]);
        let eta = base.scale(2.0 / (cs * cs));
        let tau = principal_sqrt_psd(&(eta - identity(2)), &Tolerances::default()).unwrap();
        let want = base.scale(1.0 / cs);
        assert!(max_abs_diff(&tau, &want) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_indefinite() {
        let tol = Tolerances::default();
        let nh = from_rows(&[&[re(1.0), re(1.0)], &[re(0.0), re(1.0)]]);
        assert!(matches!(
            principal_sqrt_psd(&nh, &tol),
            Err(PtError::NotHermitian { .. })
        ));
        assert!(matches!(
            principal_sqrt_psd(&diag_real(&[1.0, -0.5]), &tol),
            Err(PtError::NotPsd { .. })
        ));
    }

    #[test]
    fn tiny_negative_eigenvalue_is_clamped() {
        let s = principal_sqrt_psd(&diag_real(&[1.0, -1e-14]), &Tolerances::default()).unwrap();
        assert_eq!(s[(1, 1)], re(0.0));
    }
}
