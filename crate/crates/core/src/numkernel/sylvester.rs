use nalgebra::DMatrix;

use super::{ensure_finite, ensure_square, hermitian_part, ComplexMatrix, Tolerances};
use crate::error::Result;
use num_complex::Complex64;

/// Frobenius-orthonormal real basis of the `n x n` Hermitian matrices:
/// diagonal units, then `(E_jk + E_kj)/sqrt2` and `i(E_jk - E_kj)/sqrt2`
/// for `j < k`.
fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(j, j)] = Complex64::new(1.0, 0.0);
        out.push(e);
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut sym = ComplexMatrix::zeros(n, n);
            sym[(j, k)] = Complex64::new(h, 0.0);
            sym[(k, j)] = Complex64::new(h, 0.0);
            out.push(sym);
            let mut anti = ComplexMatrix::zeros(n, n);
            anti[(j, k)] = Complex64::new(0.0, h);
            anti[(k, j)] = Complex64::new(0.0, -h);
            out.push(anti);
        }
    }
    out
}

/// Real `2n^2 x n^2` matrix of `X -> H^dag X - X H` restricted to Hermitian `X`.
pub fn hermitian_linearization(h: &ComplexMatrix) -> Result<DMatrix<f64>> {
    let n = ensure_square(h)?;
    let hd = h.adjoint();
    let basis = hermitian_basis(n);
    let mut lin = DMatrix::<f64>::zeros(2 * n * n, n * n);
    for (col, e) in basis.iter().enumerate() {
        let image = &hd * e - e * h;
        for (k, z) in image.iter().enumerate() {
            lin[(2 * k, col)] = z.re;
            lin[(2 * k + 1, col)] = z.im;
        }
    }
    Ok(lin)
}

/// Real-linear basis of the Hermitian solutions of `H^dag X = X H`.
///
/// The basis is orthonormal in the real Frobenius inner product; an empty
/// vector means only `X = 0` solves the equation.
pub fn sylvester_hermitian_nullspace(
    h: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    let n = ensure_square(h)?;
    ensure_finite(h)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lin = hermitian_linearization(h)?;
    let svd = lin.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| crate::error::PtError::NumericalFailure("SVD failed".into()))?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = tol.real_tol * sigma_max.max(1.0);
    let basis = hermitian_basis(n);
    let mut out = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > threshold {
            continue;
        }
        let mut x = ComplexMatrix::zeros(n, n);
        for (k, e) in basis.iter().enumerate() {
            x += e.scale(v_t[(i, k)]);
        }
        out.push(hermitian_part(&x));
    }
    Ok(out)
}
