//! Metric operators: `H^dag eta = eta H` with `eta` Hermitian.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PtError, Result};
use crate::fixtures::{h3, h3_extended, q3};
use crate::numkernel::json::matrix_serde;
use crate::numkernel::{
    eig, ensure_same_order, ensure_square, fro, hermitian_eigen, hermitian_part,
    hermiticity_residual, identity, inverse, sylvester_hermitian_nullspace, ComplexMatrix,
    ComplexVector, Tolerances,
};
use crate::ptcore::{classify, ClassKind, PtSystem};
use num_complex::Complex64;

#[derive(Debug, Clone, Serialize)]
pub struct MetricOperator {
    #[serde(with = "matrix_serde")]
    pub eta: ComplexMatrix,
    pub positive_definite: bool,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignatureReport {
    pub epsilons: Vec<i8>,
    #[serde(with = "matrix_serde")]
    pub frame: ComplexMatrix,
}

/// `||H^dag eta - eta H||_F`.
pub fn intertwining_residual(h: &ComplexMatrix, eta: &ComplexMatrix) -> f64 {
    (h.adjoint() * eta - eta * h).norm()
}

fn require_unbroken(sys: &PtSystem, tol: &Tolerances) -> Result<crate::ptcore::Classification> {
    let class = classify(sys.h(), Some(sys.pt()), tol)?;
    if class.kind != ClassKind::UnbrokenPT {
        return Err(PtError::NotUnbroken {
            kind: class.kind.to_string(),
        });
    }
    Ok(class)
}

/// Check Hermiticity and the intertwining relation, then report positivity.
///
/// Residuals are compared against `eq_tol` scaled by the operand norms.
pub fn verify_metric(
    h: &ComplexMatrix,
    eta: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<MetricOperator> {
    let n = ensure_square(h)?;
    ensure_same_order(eta, n)?;
    let residual = hermiticity_residual(eta);
    if residual > tol.eq_tol * fro(eta).max(1.0) {
        return Err(PtError::NotHermitian { residual });
    }
    let residual = intertwining_residual(h, eta);
    if residual > tol.eq_tol * fro(h).max(1.0) * fro(eta).max(1.0) {
        return Err(PtError::NotIntertwining { residual });
    }
    let eta = hermitian_part(eta);
    let min_eigenvalue = hermitian_eigen(&eta)?.min();
    Ok(MetricOperator {
        eta,
        positive_definite: min_eigenvalue > tol.psd_tol,
        min_eigenvalue,
    })
}

/// `eta = (Psi Psi^dag)^-1` from the unit-column eigenframe of an unbroken H.
pub fn positive_metric(sys: &PtSystem, tol: &Tolerances) -> Result<MetricOperator> {
    let class = require_unbroken(sys, tol)?;
    let psi = class
        .eigenframe
        .ok_or_else(|| PtError::NumericalFailure("unbroken system without eigenframe".into()))?;
    let eta = hermitian_part(&inverse(&(&psi * psi.adjoint()))?);
    let m = verify_metric(sys.h(), &eta, tol)?;
    if !m.positive_definite {
        return Err(PtError::NotPositiveDefinite {
            min_eigenvalue: m.min_eigenvalue,
        });
    }
    Ok(m)
}

/// Signs `eps_i` with `<xi_i, eta xi_j> = eps_i delta_ij` in a rescaled eigenframe.
pub fn metric_signature(
    sys: &PtSystem,
    eta: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<SignatureReport> {
    verify_metric(sys.h(), eta, tol)?;
    require_unbroken(sys, tol)?;
    let d = eig(sys.h(), tol)?;
    let values = &d.eigenvalues;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            if (values[i] - values[j]).norm() <= tol.real_tol * values[i].norm().max(1.0) {
                return Err(PtError::DegenerateSpectrumUnsupported);
            }
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));

    let scale = fro(eta).max(1.0);
    let mut columns: Vec<ComplexVector> = Vec::with_capacity(order.len());
    let mut epsilons = Vec::with_capacity(order.len());
    for &i in &order {
        let v = d.eigenvectors.column(i).into_owned();
        let g = v.dotc(&(eta * &v)).re;
        if g.abs() <= tol.eq_tol * scale {
            return Err(PtError::NumericalFailure(
                "metric is degenerate on an eigenvector".into(),
            ));
        }
        epsilons.push(if g > 0.0 { 1 } else { -1 });
        columns.push(v.unscale(g.abs().sqrt()));
    }
    let frame = ComplexMatrix::from_columns(&columns);
    let gram = frame.adjoint() * eta * &frame;
    let target =
        crate::numkernel::diag_real(&epsilons.iter().map(|&e| e as f64).collect::<Vec<_>>());
    let residual = (gram - target).norm();
    if residual > tol.eq_tol * scale * crate::numkernel::condition_fro(&frame).max(1.0) {
        return Err(PtError::NumericalFailure(format!(
            "eigenframe Gram matrix is not diagonal (residual {residual:.3e})"
        )));
    }
    Ok(SignatureReport { epsilons, frame })
}

/// Metric with `det eta = 1` for a two-level unbroken system; returns `(eta, t)`
/// with `eta + eta^-1 = tI`.
pub fn scalar_sum_metric_2d(sys: &PtSystem, tol: &Tolerances) -> Result<(MetricOperator, f64)> {
    if sys.order() != 2 {
        return Err(PtError::WrongDimension {
            expected: 2,
            found: sys.order(),
        });
    }
    let base = positive_metric(sys, tol)?;
    let det = base.eta.determinant().re;
    let eta = base.eta.unscale(det.sqrt());
    let t = eta.trace().re;
    let m = verify_metric(sys.h(), &eta, tol)?;
    let residual = scalar_sum_residual(&eta, t)?;
    if residual > tol.eq_tol * t.max(1.0) {
        return Err(PtError::NumericalFailure(format!(
            "eta + eta^-1 - tI residual {residual:.3e}"
        )));
    }
    Ok((m, t))
}

/// `||eta + eta^-1 - tI||_F`.
pub fn scalar_sum_residual(eta: &ComplexMatrix, t: f64) -> Result<f64> {
    let n = eta.nrows();
    Ok((eta + inverse(eta)? - identity(n).scale(t)).norm())
}

/// `Some(t)` when `eta + eta^-1 = tI` with `t = tr(eta + eta^-1)/n`.
pub fn verify_scalar_sum(eta: &ComplexMatrix, tol: &Tolerances) -> Result<Option<f64>> {
    let n = ensure_square(eta)?;
    let residual = hermiticity_residual(eta);
    if residual > tol.eq_tol * fro(eta).max(1.0) {
        return Err(PtError::NotHermitian { residual });
    }
    let eta = hermitian_part(eta);
    let min = hermitian_eigen(&eta)?.min();
    if min <= tol.psd_tol {
        return Err(PtError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let sum = &eta + inverse(&eta)?;
    let t = sum.trace().re / n as f64;
    let residual = (sum - identity(n).scale(t)).norm();
    Ok((residual <= tol.eq_tol * t.max(1.0)).then_some(t))
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    pub min_residual: f64,
    #[serde(serialize_with = "complex_pair")]
    pub obstruction_entry_13: Complex64,
    pub samples: usize,
    /// Largest `|(A Q^-1 Q^-dag A + Q^dag Q)_13 - 1|` over the grid.
    #[serde(skip)]
    pub entry_13_max_deviation: f64,
    /// Real dimension of the Hermitian solution space of `h3`.
    #[serde(skip)]
    pub family_dimension: usize,
    /// Largest off-diagonal entry of `Q^dag X Q` over that solution basis.
    #[serde(skip)]
    pub family_offdiagonal: f64,
    /// Largest coupling entry `X[0..3, 3]` over the solutions for `h3 (+) 10`.
    #[serde(skip)]
    pub coupling_block: f64,
}

fn complex_pair<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub const OBSTRUCTION_GRID_POINTS: usize = 21;

/// Log-spaced grid over `[0.1, 10]`.
pub fn obstruction_grid() -> Vec<f64> {
    let last = (OBSTRUCTION_GRID_POINTS - 1) as f64;
    (0..OBSTRUCTION_GRID_POINTS)
        .map(|k| 0.1 * 100f64.powf(k as f64 / last))
        .collect()
}

fn obstruction_sample(
    q_inv: &ComplexMatrix,
    qtq: &ComplexMatrix,
    a: [f64; 3],
) -> Result<(f64, Complex64)> {
    let amat = crate::numkernel::diag_real(&a);
    let eta = q_inv.adjoint() * &amat * q_inv;
    let sum = &eta + inverse(&eta)?;
    let t = sum.trace().re / 3.0;
    let residual = (sum - identity(3).scale(t)).norm();
    let lhs = &amat * q_inv * q_inv.adjoint() * &amat + qtq;
    Ok((residual, lhs[(0, 2)]))
}

/// Grid search over the metric family `Q^-dag diag(a) Q^-1` of `h3`.
pub fn scalar_sum_obstruction_demo(tol: &Tolerances) -> Result<ObstructionReport> {
    let q = q3();
    let q_inv = inverse(&q)?;
    let qtq = q.adjoint() * &q;
    let grid = obstruction_grid();
    let mut points = Vec::with_capacity(grid.len().pow(3));
    for &a1 in &grid {
        for &a2 in &grid {
            for &a3 in &grid {
                points.push([a1, a2, a3]);
            }
        }
    }
    let results: Vec<(f64, Complex64)> = points
        .par_iter()
        .map(|&a| obstruction_sample(&q_inv, &qtq, a))
        .collect::<Result<_>>()?;
    let min_residual = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let entry_13_max_deviation = results
        .iter()
        .map(|r| (r.1 - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let (_, obstruction_entry_13) = obstruction_sample(&q_inv, &qtq, [1.0, 1.0, 1.0])?;

    let family = sylvester_hermitian_nullspace(&h3(), tol)?;
    let mut family_offdiagonal: f64 = 0.0;
    for x in &family {
        let d = q.adjoint() * x * &q;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    family_offdiagonal = family_offdiagonal.max(d[(i, j)].norm());
                }
            }
        }
    }
    let mut coupling_block: f64 = 0.0;
    for x in sylvester_hermitian_nullspace(&h3_extended(10.0), tol)? {
        for i in 0..3 {
            coupling_block = coupling_block.max(x[(i, 3)].norm());
        }
    }
    Ok(ObstructionReport {
        min_residual,
        obstruction_entry_13,
        samples: points.len(),
        entry_13_max_deviation,
        family_dimension: family.len(),
        family_offdiagonal,
        coupling_block,
    })
}
