use super::{
    eig, ensure_finite, ensure_square, hermitian_eigen, hermitian_part, inverse, ComplexMatrix,
    Tolerances,
};
use crate::error::Result;
use num_complex::Complex64;

/// Eigenvector condition number above which the spectral route is abandoned.
const SPECTRAL_COND_LIMIT: f64 = 1e8;

/// Matrix exponential `e^A`.
///
/// Hermitian and skew-Hermitian inputs go through the unitary Hermitian
/// eigendecomposition. Other inputs use `Psi diag(e^lambda) Psi^-1` when the
/// eigenvector matrix is well conditioned, and nalgebra's scaling-and-squaring
/// Padé approximant otherwise.
pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(a)?;
    ensure_finite(a)?;
    if n == 0 {
        return Ok(a.clone());
    }
    let tol = Tolerances::default();
    let scale = a.norm().max(1.0);

    let skew = a.map(|z| z * Complex64::new(0.0, 1.0));
    if super::hermiticity_residual(&skew) <= 1e-14 * scale {
        // A = -i K with K Hermitian.
        let k = hermitian_part(&skew);
        let he = hermitian_eigen(&k)?;
        return Ok(he.apply(|lambda| Complex64::new(0.0, -lambda).exp()));
    }
    if super::hermiticity_residual(a) <= 1e-14 * scale {
        let he = hermitian_eigen(&hermitian_part(a))?;
        return Ok(he.apply(|lambda| Complex64::new(lambda, 0.0).exp()));
    }

    if let Ok(d) = eig(a, &tol) {
        if d.condition_estimate <= SPECTRAL_COND_LIMIT {
            if let Ok(inv) = inverse(&d.eigenvectors) {
                let mut scaled = d.eigenvectors.clone();
                for (j, lambda) in d.eigenvalues.iter().enumerate() {
                    let e = lambda.exp();
                    for z in scaled.column_mut(j).iter_mut() {
                        *z *= e;
                    }
                }
                return Ok(scaled * inv);
            }
        }
    }
    Ok(a.exp())
}
