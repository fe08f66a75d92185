//! PT operator pairs, PT-symmetry checks and phase classification.
//!
//! The anti-linear time reversal `T` is carried by its representation
//! matrix: it acts on a vector `v` as `T conj(v)`, so the composite `PT`
//! acts as `(P T) conj(v)`.

use serde::{Deserialize, Serialize};

use crate::error::{PtError, Result};
use crate::numkernel::{
    conj, conj_vec, eig, ensure_finite, ensure_same_order, ensure_square, fro, identity, inverse,
    ComplexMatrix, ComplexVector, EigenDecomposition, Tolerances,
};
use num_complex::Complex64;

/// Validated parity / time-reversal pair with the cached product `P T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PtPair {
    p: ComplexMatrix,
    t: ComplexMatrix,
    pt: ComplexMatrix,
}

impl PtPair {
    pub fn p(&self) -> &ComplexMatrix {
        &self.p
    }

    pub fn t(&self) -> &ComplexMatrix {
        &self.t
    }

    /// Representation matrix of the anti-linear operator `PT`.
    pub fn pt(&self) -> &ComplexMatrix {
        &self.pt
    }

    pub fn order(&self) -> usize {
        self.p.nrows()
    }

    /// `PT` applied to a vector: `(P T) conj(v)`.
    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        &self.pt * conj_vec(v)
    }

    /// The trivial pair `P = T = I` (PT acts as complex conjugation).
    pub fn conjugation(n: usize) -> Self {
        PtPair {
            p: identity(n),
            t: identity(n),
            pt: identity(n),
        }
    }

    /// Pair with `P = I` and `T = pt`, for a PT matrix built from an eigenframe.
    pub fn from_pt_matrix(pt: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        validate_pt_pair(&identity(pt.nrows()), pt, tol)
    }
}

fn scaled_tol(tol: &Tolerances, m: &ComplexMatrix) -> f64 {
    tol.eq_tol * fro(m).max(1.0)
}

/// Check `P^2 = I`, `T conj(T) = I` and `P T = T conj(P)`.
pub fn validate_pt_pair(p: &ComplexMatrix, t: &ComplexMatrix, tol: &Tolerances) -> Result<PtPair> {
    let n = ensure_square(p)?;
    ensure_same_order(t, n)?;
    ensure_finite(p)?;
    ensure_finite(t)?;
    let id = identity(n);

    let residual = (p * p - &id).norm();
    if residual > scaled_tol(tol, p) {
        return Err(PtError::NotInvolutoryP { residual });
    }
    let residual = (t * conj(t) - &id).norm();
    if residual > scaled_tol(tol, t) {
        return Err(PtError::NotInvolutoryT { residual });
    }
    let pt = p * t;
    let residual = (&pt - t * conj(p)).norm();
    if residual > tol.eq_tol * (fro(p) * fro(t)).max(1.0) {
        return Err(PtError::NonCommuting { residual });
    }
    Ok(PtPair {
        p: p.clone(),
        t: t.clone(),
        pt,
    })
}

/// `||H PT - PT conj(H)||_F`.
pub fn pt_symmetry_residual(h: &ComplexMatrix, pt: &PtPair) -> Result<f64> {
    ensure_same_order(h, pt.order())?;
    Ok((h * pt.pt() - pt.pt() * conj(h)).norm())
}

pub fn is_pt_symmetric(h: &ComplexMatrix, pt: &PtPair, tol: &Tolerances) -> Result<bool> {
    let residual = pt_symmetry_residual(h, pt)?;
    Ok(residual <= tol.eq_tol * fro(h).max(1.0) * fro(pt.pt()).max(1.0))
}

/// A Hamiltonian bundled with a PT pair under which it is symmetric.
#[derive(Debug, Clone)]
pub struct PtSystem {
    h: ComplexMatrix,
    pt: PtPair,
}

impl PtSystem {
    pub fn new(h: ComplexMatrix, pt: PtPair, tol: &Tolerances) -> Result<Self> {
        ensure_finite(&h)?;
        let residual = pt_symmetry_residual(&h, &pt)?;
        if !is_pt_symmetric(&h, &pt, tol)? {
            return Err(PtError::NotPtSymmetric { residual });
        }
        Ok(PtSystem { h, pt })
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn pt(&self) -> &PtPair {
        &self.pt
    }

    pub fn order(&self) -> usize {
        self.h.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassKind {
    UnbrokenPT,
    BrokenDiagonalizable,
    Defective,
    NotPTSymmetric,
}

impl std::fmt::Display for ClassKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClassKind::UnbrokenPT => "UnbrokenPT",
            ClassKind::BrokenDiagonalizable => "BrokenDiagonalizable",
            ClassKind::Defective => "Defective",
            ClassKind::NotPTSymmetric => "NotPTSymmetric",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub kind: ClassKind,
    pub spectrum: Vec<Complex64>,
    /// Unit-norm eigenvector columns when H is diagonalizable.
    pub eigenframe: Option<ComplexMatrix>,
}

#[derive(Serialize)]
struct ClassificationJson {
    kind: String,
    spectrum: Vec<[f64; 2]>,
}

impl Serialize for Classification {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClassificationJson {
            kind: self.kind.to_string(),
            spectrum: self.spectrum.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Whether every non-real eigenvalue has a conjugate partner.
fn conjugation_closed(values: &[Complex64], tol: &Tolerances) -> bool {
    let n = values.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || tol.is_real(values[i]) {
            continue;
        }
        let target = values[i].conj();
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .filter(|&j| (values[j] - target).norm() <= tol.real_tol * values[i].norm().max(1.0))
            .min_by(|&a, &b| {
                (values[a] - target)
                    .norm()
                    .total_cmp(&(values[b] - target).norm())
            });
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return false,
        }
    }
    true
}

/// Unbroken / broken / defective classification.
///
/// Without a PT pair the verdict is purely spectral: H is PT-symmetric for
/// some pair exactly when its spectrum is closed under conjugation (it is
/// then similar to a real matrix).
pub fn classify(
    h: &ComplexMatrix,
    pt: Option<&PtPair>,
    tol: &Tolerances,
) -> Result<Classification> {
    ensure_square(h)?;
    let d = eig(h, tol)?;
    let mut spectrum = d.eigenvalues.clone();
    sort_spectrum(&mut spectrum);

    if let Some(pt) = pt {
        if !is_pt_symmetric(h, pt, tol)? {
            return Ok(Classification {
                kind: ClassKind::NotPTSymmetric,
                spectrum,
                eigenframe: None,
            });
        }
    }
    if d.defective {
        return Ok(Classification {
            kind: ClassKind::Defective,
            spectrum,
            eigenframe: None,
        });
    }
    let all_real = d.eigenvalues.iter().all(|z| tol.is_real(*z));
    if all_real {
        let spectrum = spectrum.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
        return Ok(Classification {
            kind: ClassKind::UnbrokenPT,
            spectrum,
            eigenframe: Some(d.eigenvectors),
        });
    }
    if !conjugation_closed(&d.eigenvalues, tol) {
        if pt.is_some() {
            return Err(PtError::InconsistentSpectrum);
        }
        return Ok(Classification {
            kind: ClassKind::NotPTSymmetric,
            spectrum,
            eigenframe: None,
        });
    }
    Ok(Classification {
        kind: ClassKind::BrokenDiagonalizable,
        spectrum,
        eigenframe: Some(d.eigenvectors),
    })
}

/// Diagonal canonical form with the matching PT block pattern.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// Diagonal; conjugate pairs `(lambda, conj(lambda))` first, real eigenvalues last.
    pub j: ComplexMatrix,
    pub psi: ComplexMatrix,
    /// Swap blocks for conjugate pairs, ones for real eigenvalues.
    pub k: ComplexMatrix,
}

impl CanonicalForm {
    /// `(||Psi^-1 H Psi - J||, ||Psi^-1 PT conj(Psi) - K||)`.
    pub fn residuals(&self, h: &ComplexMatrix, pt: &PtPair) -> Result<(f64, f64)> {
        let inv = inverse(&self.psi)?;
        let rj = (&inv * h * &self.psi - &self.j).norm();
        let rk = (&inv * pt.pt() * conj(&self.psi) - &self.k).norm();
        Ok((rj, rk))
    }
}

/// Group eigenpair indices with numerically equal eigenvalues.
fn clusters(values: &[Complex64], tol: &Tolerances) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, z) in values.iter().enumerate() {
        let hit = out.iter_mut().find(|c| {
            let w = values[c[0]];
            (w - z).norm() <= tol.real_tol * w.norm().max(1.0)
        });
        match hit {
            Some(c) => c.push(i),
            None => out.push(vec![i]),
        }
    }
    out
}

/// Select `count` linearly independent vectors from `candidates`, greedily by
/// the size of their component outside the span of those already chosen.
fn select_independent(candidates: &[ComplexVector], count: usize) -> Result<Vec<ComplexVector>> {
    let mut chosen: Vec<ComplexVector> = Vec::new();
    let mut ortho: Vec<ComplexVector> = Vec::new();
    while chosen.len() < count {
        let mut best: Option<(f64, usize, ComplexVector)> = None;
        for (idx, c) in candidates.iter().enumerate() {
            let scale = c.norm();
            if scale == 0.0 {
                continue;
            }
            let mut r = c.unscale(scale);
            for _ in 0..2 {
                for q in &ortho {
                    let coeff = q.dotc(&r);
                    r -= q * coeff;
                }
            }
            let rn = r.norm();
            if best.as_ref().is_none_or(|(b, _, _)| rn > *b) {
                best = Some((rn, idx, r));
            }
        }
        match best {
            Some((rn, idx, r)) if rn > 1e-6 => {
                chosen.push(candidates[idx].clone());
                ortho.push(r.unscale(rn));
            }
            _ => return Err(PtError::SingularFrame),
        }
    }
    Ok(chosen)
}

/// Fixed points of the anti-linear involution `PT` spanning the given eigenspace.
fn self_conjugate_basis(eigvecs: &[ComplexVector], pt: &PtPair) -> Result<Vec<ComplexVector>> {
    let mut candidates = Vec::with_capacity(2 * eigvecs.len());
    for v in eigvecs {
        let image = pt.apply(v);
        let plus = v + &image;
        let minus = (v - &image).map(|z| z * Complex64::new(0.0, 1.0));
        if plus.norm() >= 1e-8 * v.norm() {
            candidates.push(plus);
        }
        candidates.push(minus);
    }
    let mut basis = select_independent(&candidates, eigvecs.len())?;
    for b in basis.iter_mut() {
        let n = b.norm();
        b.unscale_mut(n);
    }
    Ok(basis)
}

/// Canonical form of a diagonalizable PT-symmetric Hamiltonian.
pub fn canonical_form(sys: &PtSystem, tol: &Tolerances) -> Result<CanonicalForm> {
    let h = sys.h();
    let pt = sys.pt();
    let n = sys.order();
    if !is_pt_symmetric(h, pt, tol)? {
        return Err(PtError::NotPtSymmetric {
            residual: pt_symmetry_residual(h, pt)?,
        });
    }
    let d: EigenDecomposition = eig(h, tol)?;
    if d.defective {
        return Err(PtError::DefectiveInput);
    }
    let vecs: Vec<ComplexVector> = d
        .eigenvectors
        .column_iter()
        .map(|c| c.into_owned())
        .collect();

    let mut pair_groups: Vec<(Complex64, Vec<ComplexVector>)> = Vec::new();
    let mut real_groups: Vec<(f64, Vec<ComplexVector>)> = Vec::new();
    let mut lower_count = 0usize;
    for cluster in clusters(&d.eigenvalues, tol) {
        let mean =
            cluster.iter().map(|&i| d.eigenvalues[i]).sum::<Complex64>() / cluster.len() as f64;
        let members: Vec<ComplexVector> = cluster.iter().map(|&i| vecs[i].clone()).collect();
        if tol.is_real(mean) {
            real_groups.push((mean.re, self_conjugate_basis(&members, pt)?));
        } else if mean.im > 0.0 {
            pair_groups.push((mean, members));
        } else {
            lower_count += cluster.len();
        }
    }
    let upper_count: usize = pair_groups.iter().map(|(_, m)| m.len()).sum();
    if upper_count != lower_count {
        return Err(PtError::InconsistentSpectrum);
    }
    pair_groups.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    real_groups.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut columns: Vec<ComplexVector> = Vec::with_capacity(n);
    let mut diag: Vec<Complex64> = Vec::with_capacity(n);
    let mut k = ComplexMatrix::zeros(n, n);
    for (lambda, members) in &pair_groups {
        let m = members.len();
        let start = columns.len();
        for v in members {
            columns.push(v.clone());
            diag.push(*lambda);
        }
        for v in members {
            columns.push(pt.apply(v));
            diag.push(lambda.conj());
        }
        for i in 0..m {
            k[(start + i, start + m + i)] = Complex64::new(1.0, 0.0);
            k[(start + m + i, start + i)] = Complex64::new(1.0, 0.0);
        }
    }
    for (lambda, basis) in &real_groups {
        for v in basis {
            let idx = columns.len();
            columns.push(v.clone());
            diag.push(Complex64::new(*lambda, 0.0));
            k[(idx, idx)] = Complex64::new(1.0, 0.0);
        }
    }
    let psi = ComplexMatrix::from_columns(&columns);
    let j = crate::numkernel::diag(&diag);
    Ok(CanonicalForm { j, psi, k })
}

/// Whether `k` is a symmetric 0/1 permutation matrix (an involutive block pattern).
fn is_block_pattern(k: &ComplexMatrix) -> bool {
    let n = k.nrows();
    if k.ncols() != n {
        return false;
    }
    for i in 0..n {
        let mut ones = 0;
        for j in 0..n {
            let z = k[(i, j)];
            if z == Complex64::new(1.0, 0.0) {
                ones += 1;
                if k[(j, i)] != Complex64::new(1.0, 0.0) {
                    return false;
                }
            } else if z != Complex64::new(0.0, 0.0) {
                return false;
            }
        }
        if ones != 1 {
            return false;
        }
    }
    true
}

/// `PT = Psi K conj(Psi^-1)`.
pub fn construct_pt_from_eigenframe(
    psi: &ComplexMatrix,
    k: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let n = ensure_square(psi)?;
    ensure_same_order(k, n)?;
    if !is_block_pattern(k) {
        return Err(PtError::InvalidPattern(
            "K must be a symmetric permutation of swap blocks and ones".into(),
        ));
    }
    let cond = crate::numkernel::condition_fro(psi);
    if !cond.is_finite() || cond > tol.defect_cond {
        return Err(PtError::SingularFrame);
    }
    let inv = inverse(psi).map_err(|_| PtError::SingularFrame)?;
    Ok(psi * k * conj(&inv))
}
