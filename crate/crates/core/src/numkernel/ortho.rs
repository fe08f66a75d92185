use super::ComplexVector;
use crate::error::{PtError, Result};

const DEPENDENCE_TOL: f64 = 1e-10;

/// Remove the components of `v` along the orthonormal vectors in `basis`
/// (two passes of modified Gram-Schmidt).
fn project_out(v: &mut ComplexVector, basis: &[ComplexVector]) {
    for _ in 0..2 {
        for q in basis {
            let coeff = q.dotc(v);
            v.axpy(-coeff, q, num_complex::Complex64::new(1.0, 0.0));
        }
    }
}

/// Orthonormal basis of `C^dim` whose leading vectors span `span(b)`.
///
/// The completion is deterministic: at each step the standard basis vector
/// with the largest component outside the current span is added.
pub fn orthonormal_extension(b: &[ComplexVector], dim: usize) -> Result<Vec<ComplexVector>> {
    if b.len() > dim {
        return Err(PtError::DependentInput);
    }
    let mut out: Vec<ComplexVector> = Vec::with_capacity(dim);
    for v in b {
        if v.len() != dim {
            return Err(PtError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let scale = v.norm();
        if scale == 0.0 || !scale.is_finite() {
            return Err(PtError::DependentInput);
        }
        let mut w = v.clone();
        project_out(&mut w, &out);
        let norm = w.norm();
        if norm <= DEPENDENCE_TOL * scale {
            return Err(PtError::DependentInput);
        }
        out.push(w.unscale(norm));
    }
    while out.len() < dim {
        let mut best: Option<(f64, ComplexVector)> = None;
        for j in 0..dim {
            let mut e = ComplexVector::zeros(dim);
            e[j] = num_complex::Complex64::new(1.0, 0.0);
            project_out(&mut e, &out);
            let norm = e.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn + 1e-12) {
                best = Some((norm, e));
            }
        }
        let (norm, e) = best.expect("dim > 0 when basis incomplete");
        out.push(e.unscale(norm));
    }
    Ok(out)
}
