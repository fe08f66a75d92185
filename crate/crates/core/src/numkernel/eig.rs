//! General complex eigendecomposition.
//!
//! Hessenberg reduction followed by single-shift QR iterations with
//! Wilkinson shifts produces a complex Schur form `A = Z T Z^dag`; the
//! eigenvectors of the triangular factor are recovered by back substitution
//! and mapped back through `Z`.

use nalgebra::Hessenberg;

use super::{condition_fro, ensure_finite, ensure_square, fro, ComplexMatrix, Tolerances};
use crate::error::{PtError, Result};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Unit-norm eigenvectors stored column-wise, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
    /// Frobenius condition number of the eigenvector matrix.
    pub condition_estimate: f64,
    pub defective: bool,
}

impl EigenDecomposition {
    /// `||A Psi - Psi diag(lambda)||_F`.
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        let mut scaled = self.eigenvectors.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut_complex(*lambda);
        }
        (a * &self.eigenvectors - scaled).norm()
    }
}

trait ScaleComplex {
    fn scale_mut_complex(&mut self, s: Complex64);
}

impl<S> ScaleComplex for nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, s: Complex64) {
        for z in self.iter_mut() {
            *z *= s;
        }
    }
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Complex Schur decomposition `A = Z T Z^dag`, `T` upper triangular.
pub(crate) fn complex_schur(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((ComplexMatrix::zeros(0, 0), ComplexMatrix::zeros(0, 0)));
    }
    if n == 1 {
        return Ok((ComplexMatrix::identity(1, 1), a.clone()));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((ComplexMatrix::identity(n, n), a.clone()));
    }
    let (mut z, mut t) = Hessenberg::new(a.unscale(scale)).unpack();

    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut since_deflation = 0usize;
    let max_iter = MAX_SWEEPS_PER_EIGENVALUE * n;

    while hi > 0 {
        // Find the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = t[(lo, lo - 1)].norm();
            let mut diag = t[(lo - 1, lo - 1)].norm() + t[(lo, lo)].norm();
            if diag == 0.0 {
                diag = 1.0;
            }
            if sub <= eps * diag {
                t[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        iter += 1;
        since_deflation += 1;
        if iter > max_iter {
            return Err(PtError::NumericalFailure(
                "complex QR iteration did not converge".into(),
            ));
        }

        let shift = if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            t[(hi, hi)] + Complex64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(
                t[(hi - 1, hi - 1)],
                t[(hi - 1, hi)],
                t[(hi, hi - 1)],
                t[(hi, hi)],
            )
        };

        for k in lo..=hi {
            t[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let g = Givens::zeroing(t[(k, k)], t[(k + 1, k)]);
            g.apply_rows(&mut t, k, k);
            t[(k + 1, k)] = Complex64::new(0.0, 0.0);
            rotations.push(g);
        }
        for (offset, g) in rotations.iter().enumerate() {
            let k = lo + offset;
            g.apply_cols(&mut t, k, (k + 2).min(hi) + 1);
            g.apply_cols(&mut z, k, n);
        }
        for k in lo..=hi {
            t[(k, k)] += shift;
        }
    }

    // Clean the strictly lower part.
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok((z, t.scale(scale)))
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Unitary `G = [[c, s], [-conj(s), c]]` with `G (x; y) = (r; 0)`.
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    fn zeroing(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let r = ax.hypot(y.norm());
        if r == 0.0 {
            return Givens {
                c: 1.0,
                s: Complex64::new(0.0, 0.0),
            };
        }
        if ax == 0.0 {
            return Givens {
                c: 0.0,
                s: Complex64::new(1.0, 0.0),
            };
        }
        let phase = x / ax;
        Givens {
            c: ax / r,
            s: phase * y.conj() / r,
        }
    }

    /// Rows `k, k+1` of `m` (from column `from_col` on) are replaced by `G` times them.
    fn apply_rows(&self, m: &mut ComplexMatrix, k: usize, from_col: usize) {
        for j in from_col..m.ncols() {
            let x = m[(k, j)];
            let y = m[(k + 1, j)];
            m[(k, j)] = x * self.c + self.s * y;
            m[(k + 1, j)] = -self.s.conj() * x + y * self.c;
        }
    }

    /// Columns `k, k+1` of `m` (rows `0..to_row`) are right-multiplied by `G^dag`.
    fn apply_cols(&self, m: &mut ComplexMatrix, k: usize, to_row: usize) {
        for i in 0..to_row {
            let x = m[(i, k)];
            let y = m[(i, k + 1)];
            m[(i, k)] = x * self.c + y * self.s.conj();
            m[(i, k + 1)] = -x * self.s + y * self.c;
        }
    }
}

/// Eigenvectors of an upper-triangular matrix, by back substitution.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.nrows();
    let norm = fro(t).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * norm;
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(j, k)] = -acc / denom;
        }
        let col_norm = y.column(k).norm();
        if col_norm > 0.0 && col_norm.is_finite() {
            y.column_mut(k).unscale_mut(col_norm);
        }
    }
    y
}

/// Eigendecomposition of a general complex square matrix.
///
/// `defective` is raised when the eigenvector matrix is ill-conditioned
/// beyond `tol.defect_cond`, or when a cluster of (numerically) coincident
/// eigenvalues carries a rank-deficient eigenvector Gram matrix.
pub fn eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    let n = ensure_square(a)?;
    ensure_finite(a)?;
    let (z, t) = complex_schur(a)?;
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut vectors = &z * triangular_eigenvectors(&t);
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    let condition_estimate = condition_fro(&vectors);
    let defective = !condition_estimate.is_finite()
        || condition_estimate > tol.defect_cond
        || clustered_rank_deficient(&eigenvalues, &vectors, fro(a), tol);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
        condition_estimate,
        defective,
    })
}

/// Eigenvalues closer than `max(1e-6, 10 (n eps)^(1/n)) * max(1, ||A||)` are
/// grouped, since roundoff splits an order-`k` Jordan block by about
/// `eps^(1/k)`; a group whose unit eigenvectors have a Gram matrix with smallest
/// eigenvalue below `psd_tol` signals a Jordan block.
fn clustered_rank_deficient(
    values: &[Complex64],
    vectors: &ComplexMatrix,
    scale: f64,
    tol: &Tolerances,
) -> bool {
    let n = values.len();
    let split = 10.0 * (n as f64 * f64::EPSILON).powf(1.0 / n.max(1) as f64);
    let cluster_tol = split.max(1e-6) * scale.max(1.0);
    let mut assigned = vec![false; n];
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut members = vec![i];
        assigned[i] = true;
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..n {
                if !assigned[j]
                    && members
                        .iter()
                        .any(|&m| (values[m] - values[j]).norm() <= cluster_tol)
                {
                    members.push(j);
                    assigned[j] = true;
                    grew = true;
                }
            }
        }
        if members.len() < 2 {
            continue;
        }
        let sub = ComplexMatrix::from_fn(n, members.len(), |r, c| vectors[(r, members[c])]);
        let gram = sub.adjoint() * &sub;
        let min_eig = nalgebra::SymmetricEigen::new(super::hermitian_part(&gram))
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < tol.psd_tol {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{c, from_real_rows, from_rows, identity, pauli_x, re, I};

    fn sorted_re(vals: &[Complex64]) -> Vec<f64> {
        let mut v: Vec<f64> = vals.iter().map(|z| z.re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Roots of `x^2 - tr x + det`, an independent route to 2x2 spectra.
    fn quadratic_roots(m: &ComplexMatrix) -> [Complex64; 2] {
        let tr = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let disc = (tr * tr - det * 4.0).sqrt();
        [(tr + disc) / 2.0, (tr - disc) / 2.0]
    }

    #[test]
    fn pauli_x_spectrum() {
        let d = eig(&pauli_x(), &Tolerances::default()).unwrap();
        let v = sorted_re(&d.eigenvalues);
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        assert!(!d.defective);
        assert!(d.residual(&pauli_x()) < 1e-14);
    }

    #[test]
    fn upper_triangular_h3() {
        let h3 = from_real_rows(&[&[1.0, 1.0, 1.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 3.0]]);
        let d = eig(&h3, &Tolerances::default()).unwrap();
        let v = sorted_re(&d.eigenvalues);
        for (got, want) in v.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-13);
        }
        assert!(d.eigenvalues.iter().all(|z| z.im.abs() < 1e-13));
        assert!(!d.defective);
        assert!(d.residual(&h3) < 1e-12);
    }

    #[test]
    fn pt_dimer_matches_quadratic_formula() {
        let a = std::f64::consts::FRAC_PI_6;
        let h0 = from_rows(&[&[I * a.sin(), re(1.0)], &[re(1.0), -I * a.sin()]]);
        let d = eig(&h0, &Tolerances::default()).unwrap();
        let roots = quadratic_roots(&h0);
        let mut got = d.eigenvalues.clone();
        got.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        let mut want = roots.to_vec();
        want.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-13);
        }
        assert!((got[1].re - a.cos()).abs() < 1e-13);
        assert!(d.residual(&h0) < 1e-13);
    }

    #[test]
    fn jordan_block_flagged() {
        let j = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(eig(&j, &Tolerances::default()).unwrap().defective);
        // exceptional point of the dimer: nilpotent but not triangular
        let ep = from_rows(&[&[I, re(1.0)], &[re(1.0), -I]]);
        assert!(eig(&ep, &Tolerances::default()).unwrap().defective);
        let j3 = from_real_rows(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 2.0]]);
        assert!(eig(&j3, &Tolerances::default()).unwrap().defective);
    }

    #[test]
    fn repeated_but_diagonalizable_not_flagged() {
        let d = eig(&identity(3), &Tolerances::default()).unwrap();
        assert!(!d.defective);
        let m = from_real_rows(&[&[1.0, 0.0, 0.5], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
        let d = eig(&m, &Tolerances::default()).unwrap();
        assert!(!d.defective);
        assert!(d.residual(&m) < 1e-13);
    }

    #[test]
    fn complex_pair_of_rotation() {
        let r = from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let d = eig(&r, &Tolerances::default()).unwrap();
        let mut ims: Vec<f64> = d.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
        assert!(d.residual(&r) < 1e-14);
    }

    #[test]
    fn non_square_rejected() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            eig(&m, &Tolerances::default()),
            Err(PtError::NonSquare { .. })
        ));
    }

    #[test]
    fn larger_random_like_matrix() {
        let n = 8;
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            c(
                ((i * 7 + j * 3) % 11) as f64 - 5.0,
                ((i * 5 + j) % 7) as f64 - 3.0,
            )
        });
        let d = eig(&m, &Tolerances::default()).unwrap();
        assert!(d.residual(&m) < 1e-10 * m.norm());
    }
}
