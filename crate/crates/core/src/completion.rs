//! A linear map between two n-dimensional subspaces of `C^2n`, realised as a
//! unitary followed by an orthogonal projection and renormalisation.

use serde::Serialize;

use crate::error::{PtError, Result};
use crate::numkernel::json::matrix_serde;
use crate::numkernel::{
    ensure_finite, fro, identity, orthonormal_extension, principal_sqrt_psd, ComplexMatrix,
    ComplexVector, Tolerances,
};
use num_complex::Complex64;

/// `A u_j = sum_i a_ij v_i` for orthonormal bases `u` of M and `v` of N.
#[derive(Debug, Clone)]
pub struct SubspaceMap {
    m_basis: Vec<ComplexVector>,
    n_basis: Vec<ComplexVector>,
    a: ComplexMatrix,
}

fn check_orthonormal(basis: &[ComplexVector], tol: &Tolerances, which: &str) -> Result<()> {
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            if (u.dotc(v) - Complex64::new(want, 0.0)).norm() > tol.eq_tol {
                return Err(PtError::InvalidSubspaceMap(format!(
                    "{which} basis is not orthonormal"
                )));
            }
        }
    }
    Ok(())
}

impl SubspaceMap {
    pub fn new(
        m_basis: Vec<ComplexVector>,
        n_basis: Vec<ComplexVector>,
        a: ComplexMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = m_basis.len();
        if n == 0 || n_basis.len() != n {
            return Err(PtError::InvalidSubspaceMap(
                "M and N must have the same positive dimension".into(),
            ));
        }
        if a.nrows() != n || a.ncols() != n {
            return Err(PtError::DimensionMismatch {
                expected: n,
                found: if a.nrows() != n { a.nrows() } else { a.ncols() },
            });
        }
        ensure_finite(&a)?;
        for v in m_basis.iter().chain(n_basis.iter()) {
            if v.len() != 2 * n {
                return Err(PtError::DimensionMismatch {
                    expected: 2 * n,
                    found: v.len(),
                });
            }
        }
        check_orthonormal(&m_basis, tol, "M")?;
        check_orthonormal(&n_basis, tol, "N")?;
        Ok(SubspaceMap {
            m_basis,
            n_basis,
            a,
        })
    }

    /// Restriction of an ambient operator `L` to M, read in the N basis.
    pub fn from_operator(
        m_basis: Vec<ComplexVector>,
        n_basis: Vec<ComplexVector>,
        l: &ComplexMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = m_basis.len();
        let a = ComplexMatrix::from_fn(n, n, |i, j| n_basis[i].dotc(&(l * &m_basis[j])));
        Self::new(m_basis, n_basis, a, tol)
    }

    pub fn dim(&self) -> usize {
        self.m_basis.len()
    }

    pub fn m_basis(&self) -> &[ComplexVector] {
        &self.m_basis
    }

    pub fn n_basis(&self) -> &[ComplexVector] {
        &self.n_basis
    }

    pub fn coordinates(&self) -> &ComplexMatrix {
        &self.a
    }

    /// `A v` for `v` in M, through the basis coordinates.
    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        let n = self.dim();
        let coords = ComplexVector::from_fn(n, |j, _| self.m_basis[j].dotc(v));
        let image = &self.a * coords;
        let mut out = ComplexVector::zeros(2 * n);
        for (i, vi) in self.n_basis.iter().enumerate() {
            out += vi * image[i];
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletionResult {
    #[serde(rename = "U", with = "matrix_serde")]
    pub u: ComplexMatrix,
    #[serde(rename = "P_N", with = "matrix_serde")]
    pub p_n: ComplexMatrix,
    pub scale: f64,
}

impl CompletionResult {
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.u.nrows();
        (self.u.adjoint() * &self.u - identity(n)).norm()
    }
}

/// `sum_i v_i v_i^dag`.
pub fn projector(basis: &[ComplexVector]) -> ComplexMatrix {
    let dim = basis.first().map_or(0, |v| v.len());
    let mut p = ComplexMatrix::zeros(dim, dim);
    for v in basis {
        p += v * v.adjoint();
    }
    p
}

/// `sum_j to_j from_j^dag`.
fn outer_sum(to: &[ComplexVector], from: &[ComplexVector]) -> ComplexMatrix {
    let dim = to[0].len();
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (t, f) in to.iter().zip(from) {
        u += t * f.adjoint();
    }
    u
}

fn complement(basis: &[ComplexVector], dim: usize) -> Result<Vec<ComplexVector>> {
    Ok(orthonormal_extension(basis, dim)?.split_off(basis.len()))
}

/// Unitary `U` with `P_N U v = scale * A v` on M, `scale = 1/||a||_F`.
pub fn unitary_completion(m: &SubspaceMap, tol: &Tolerances) -> Result<CompletionResult> {
    if m.is_zero() {
        return Err(PtError::ZeroMap);
    }
    let n = m.dim();
    let dim = 2 * n;
    let norm = fro(&m.a);
    let c = m.a.unscale(norm);
    let d = principal_sqrt_psd(&(identity(n) - c.adjoint() * &c), tol)?;
    let n_perp = complement(&m.n_basis, dim)?;
    let images: Vec<ComplexVector> = (0..n)
        .map(|j| {
            let mut f = ComplexVector::zeros(dim);
            for i in 0..n {
                f += &m.n_basis[i] * c[(i, j)];
                f += &n_perp[i] * d[(i, j)];
            }
            f
        })
        .collect();
    let m_perp = complement(&m.m_basis, dim)?;
    let image_perp = complement(&images, dim)?;
    let u = outer_sum(&images, &m.m_basis) + outer_sum(&image_perp, &m_perp);
    Ok(CompletionResult {
        u,
        p_n: projector(&m.n_basis),
        scale: 1.0 / norm,
    })
}

/// For `A = 0`: a unitary carrying M onto the complement of N.
pub fn zero_map_completion(m: &SubspaceMap) -> Result<CompletionResult> {
    let dim = 2 * m.dim();
    let n_perp = complement(&m.n_basis, dim)?;
    let m_perp = complement(&m.m_basis, dim)?;
    let u = outer_sum(&n_perp, &m.m_basis) + outer_sum(&m.n_basis, &m_perp);
    Ok(CompletionResult {
        u,
        p_n: projector(&m.n_basis),
        scale: 0.0,
    })
}

/// Dispatch on whether the map vanishes.
pub fn complete(m: &SubspaceMap, tol: &Tolerances) -> Result<CompletionResult> {
    if m.is_zero() {
        zero_map_completion(m)
    } else {
        unitary_completion(m, tol)
    }
}

/// Measure the projection `P` on a unit state and keep the `P` branch.
///
/// A branch with probability at most `psd_tol` yields the zero vector and
/// probability 0.
pub fn post_select(
    state: &ComplexVector,
    p: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(ComplexVector, f64)> {
    let n = crate::numkernel::ensure_square(p)?;
    if state.len() != n {
        return Err(PtError::DimensionMismatch {
            expected: n,
            found: state.len(),
        });
    }
    let scale = fro(p).max(1.0);
    let residual = (p * p - p).norm().max((p - p.adjoint()).norm());
    if residual > tol.eq_tol * scale {
        return Err(PtError::NotProjection { residual });
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > tol.eq_tol {
        return Err(PtError::NotNormalized { norm });
    }
    let kept = p * state;
    let probability = kept.norm_squared();
    if probability <= tol.psd_tol {
        return Ok((ComplexVector::zeros(n), 0.0));
    }
    let out = kept.unscale(probability.sqrt());
    Ok((out, probability.min(1.0)))
}
