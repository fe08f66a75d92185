//! Hermitian dilation of an unbroken PT-symmetric Hamiltonian onto `C^2n`.
//!
//! With `tau = (eta - I)^{1/2}` the graph subspace `Y_tau = {(psi; tau psi)}`
//! is invariant under `exp(-it Hhat)` and the top block evolves by `exp(-it H)`.

use serde::Serialize;

use crate::completion::projector;
use crate::error::{PtError, Result};
use crate::metric::{positive_metric, verify_metric};
use crate::numkernel::json::matrix_serde;
use crate::numkernel::{
    block2, ensure_finite, ensure_same_order, fro, hermitian_eigen, hermiticity_residual, identity,
    inverse, matrix_exp, principal_sqrt_psd, stack, ComplexMatrix, ComplexVector, Tolerances,
};
use crate::ptcore::{classify, ClassKind, PtSystem};
use num_complex::Complex64;

pub const DEFAULT_MARGIN: f64 = 1.05;

#[derive(Debug, Clone)]
pub enum EtaSource {
    /// Positive metric from the eigenframe, rescaled so that `lambda_min = margin`.
    Auto,
    /// A caller metric; used unchanged when `lambda_min > 1`, otherwise rescaled
    /// to the margin if `rescale` is set.
    Supplied { eta: ComplexMatrix, rescale: bool },
}

#[derive(Debug, Clone)]
pub enum H1Choice {
    Zero,
    /// `H1 = tau H tau eta^-1 + H eta^-1`.
    Reference,
    Supplied(ComplexMatrix),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DilationResiduals {
    pub hermiticity: f64,
    pub eq_h1h2: f64,
    pub eq_h2h4: f64,
    pub tau_sq: f64,
}

impl DilationResiduals {
    pub fn max(&self) -> f64 {
        self.hermiticity
            .max(self.eq_h1h2)
            .max(self.eq_h2h4)
            .max(self.tau_sq)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Dilation {
    #[serde(rename = "H", with = "matrix_serde")]
    pub h: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    pub eta: ComplexMatrix,
    #[serde(with = "matrix_serde")]
    pub tau: ComplexMatrix,
    #[serde(rename = "H1", with = "matrix_serde")]
    pub h1: ComplexMatrix,
    #[serde(rename = "H2", with = "matrix_serde")]
    pub h2: ComplexMatrix,
    #[serde(rename = "H4", with = "matrix_serde")]
    pub h4: ComplexMatrix,
    #[serde(rename = "Hhat", with = "matrix_serde")]
    pub hhat: ComplexMatrix,
    pub residuals: DilationResiduals,
}

fn rescale_to_margin(eta: &ComplexMatrix, margin: f64) -> Result<ComplexMatrix> {
    let min = hermitian_eigen(eta)?.min();
    if min <= 0.0 {
        return Err(PtError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(eta.scale(margin / min))
}

/// Assemble `Hhat = [[H1, H2], [H2^dag, H4]]` from `(H, eta, H1)`.
pub fn build_dilation(
    sys: &PtSystem,
    eta_source: &EtaSource,
    margin: f64,
    h1_choice: &H1Choice,
    tol: &Tolerances,
) -> Result<Dilation> {
    if !(margin.is_finite() && margin > 1.0) {
        return Err(PtError::InvalidParameter(format!(
            "margin must exceed 1, got {margin}"
        )));
    }
    let class = classify(sys.h(), Some(sys.pt()), tol)?;
    if class.kind != ClassKind::UnbrokenPT {
        return Err(PtError::NotUnbroken {
            kind: class.kind.to_string(),
        });
    }
    let h = sys.h();
    let n = sys.order();

    let eta = match eta_source {
        EtaSource::Auto => rescale_to_margin(&positive_metric(sys, tol)?.eta, margin)?,
        EtaSource::Supplied { eta, rescale } => {
            ensure_same_order(eta, n)?;
            ensure_finite(eta)?;
            let m = verify_metric(h, eta, tol)?;
            if !m.positive_definite {
                return Err(PtError::NotPositiveDefinite {
                    min_eigenvalue: m.min_eigenvalue,
                });
            }
            if m.min_eigenvalue > 1.0 {
                eta.clone()
            } else if *rescale {
                rescale_to_margin(eta, margin)?
            } else {
                return Err(PtError::EtaNotGreaterThanI {
                    min_eigenvalue: m.min_eigenvalue,
                });
            }
        }
    };
    let id = identity(n);
    let tau = principal_sqrt_psd(&(&eta - &id), tol)?;
    let tau_inv = inverse(&tau)?;

    let h1 = match h1_choice {
        H1Choice::Zero => ComplexMatrix::zeros(n, n),
        H1Choice::Reference => {
            let eta_inv = inverse(&eta)?;
            &tau * h * &tau * &eta_inv + h * &eta_inv
        }
        H1Choice::Supplied(m) => {
            ensure_same_order(m, n)?;
            ensure_finite(m)?;
            let residual = hermiticity_residual(m);
            if residual > tol.eq_tol * fro(m).max(1.0) {
                return Err(PtError::SuppliedH1NotHermitian { residual });
            }
            m.clone()
        }
    };
    let h2 = (h - &h1) * &tau_inv;
    let h4 = (&tau * h - h2.adjoint()) * &tau_inv;
    let hhat = block2(&h1, &h2, &h2.adjoint(), &h4);
    let residuals = DilationResiduals {
        hermiticity: hermiticity_residual(&hhat),
        eq_h1h2: (&h1 + &h2 * &tau - h).norm(),
        eq_h2h4: (h2.adjoint() + &h4 * &tau - &tau * h).norm(),
        tau_sq: (&tau * &tau - (&eta - &id)).norm(),
    };
    Ok(Dilation {
        h: h.clone(),
        eta,
        tau,
        h1,
        h2,
        h4,
        hhat,
        residuals,
    })
}

impl Dilation {
    pub fn order(&self) -> usize {
        self.h.nrows()
    }

    pub fn subspace(&self) -> TauSubspace {
        TauSubspace {
            tau: self.tau.clone(),
        }
    }

    /// `exp(-it Hhat)`.
    pub fn propagator(&self, t: f64) -> Result<ComplexMatrix> {
        matrix_exp(&self.hhat.map(|z| z * Complex64::new(0.0, -t)))
    }
}

/// The graph subspace `Y_tau`.
#[derive(Debug, Clone)]
pub struct TauSubspace {
    tau: ComplexMatrix,
}

impl TauSubspace {
    pub fn new(tau: ComplexMatrix) -> Result<Self> {
        crate::numkernel::ensure_square(&tau)?;
        Ok(TauSubspace { tau })
    }

    pub fn dim(&self) -> usize {
        self.tau.nrows()
    }

    fn halves(&self, x: &ComplexVector) -> Result<(ComplexVector, ComplexVector)> {
        let n = self.dim();
        if x.len() != 2 * n {
            return Err(PtError::DimensionMismatch {
                expected: 2 * n,
                found: x.len(),
            });
        }
        Ok((x.rows(0, n).into_owned(), x.rows(n, n).into_owned()))
    }

    /// `||x2 - tau x1||`.
    pub fn residual(&self, x: &ComplexVector) -> Result<f64> {
        let (x1, x2) = self.halves(x)?;
        Ok((x2 - &self.tau * x1).norm())
    }

    pub fn contains(&self, x: &ComplexVector, tol: &Tolerances) -> Result<bool> {
        let r = self.residual(x)?;
        Ok(r <= tol.eq_tol * x.norm() * fro(&self.tau).max(1.0))
    }

    /// Orthonormal basis: the columns of `[I; tau] eta^{-1/2}`.
    pub fn orthonormal_basis(&self) -> Result<Vec<ComplexVector>> {
        let n = self.dim();
        let eta = identity(n) + &self.tau * &self.tau;
        let inv_sqrt = hermitian_eigen(&eta)?.apply(|x| Complex64::new(1.0 / x.sqrt(), 0.0));
        let top = inv_sqrt.clone();
        let bottom = &self.tau * &inv_sqrt;
        Ok((0..n)
            .map(|j| stack(&top.column(j).into_owned(), &bottom.column(j).into_owned()))
            .collect())
    }

    pub fn projector(&self) -> Result<ComplexMatrix> {
        Ok(projector(&self.orthonormal_basis()?))
    }
}

/// `(psi; tau psi) / ||sqrt(eta) psi||`.
pub fn embed_state(psi: &ComplexVector, d: &Dilation) -> Result<ComplexVector> {
    ensure_vec_len(psi, d.order())?;
    let norm_sq = psi.dotc(&(&d.eta * psi)).re;
    if psi.norm() == 0.0 || norm_sq <= 0.0 {
        return Err(PtError::ZeroVector);
    }
    Ok(stack(psi, &(&d.tau * psi)).unscale(norm_sq.sqrt()))
}

fn ensure_vec_len(v: &ComplexVector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(PtError::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

/// `exp(-it Hhat) xhat` for `xhat` in `Y_tau`.
pub fn dilated_evolution(
    d: &Dilation,
    t: f64,
    xhat: &ComplexVector,
    tol: &Tolerances,
) -> Result<ComplexVector> {
    let sub = d.subspace();
    if !sub.contains(xhat, tol)? {
        return Err(PtError::NotInSubspace {
            residual: sub.residual(xhat)?,
        });
    }
    Ok(d.propagator(t)? * xhat)
}

/// `P1 Hhat^k x = H^k P1 x` for `k = 0..=2n`.
pub fn embedding_membership(
    hhat: &ComplexMatrix,
    h: &ComplexMatrix,
    x: &ComplexVector,
    tol: &Tolerances,
) -> Result<bool> {
    let n = crate::numkernel::ensure_square(h)?;
    ensure_same_order(hhat, 2 * n)?;
    ensure_vec_len(x, 2 * n)?;
    let growth = hermitian_eigen(hhat)?
        .values
        .iter()
        .fold(fro(h), |m, v| m.max(v.abs()))
        .max(1.0);
    let mut lifted = x.clone();
    let mut reduced = x.rows(0, n).into_owned();
    let mut bound = tol.eq_tol * x.norm().max(1.0);
    for k in 0..=2 * n {
        if k > 0 {
            lifted = hhat * lifted;
            reduced = h * reduced;
            bound *= growth;
        }
        let diff = (lifted.rows(0, n) - &reduced).norm();
        if diff > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dimer, dimer_eta, dimer_h1, dimer_h2, dimer_pt, dimer_tau};
    use crate::numkernel::{from_real_rows, re};
    use crate::ptcore::PtPair;
    use std::f64::consts::FRAC_PI_6;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn unit(dim: usize, j: usize) -> ComplexVector {
        let mut e = ComplexVector::zeros(dim);
        e[j] = re(1.0);
        e
    }

    #[test]
    fn hermitian_trivial_dilation() {
        let h = from_real_rows(&[&[1.0, 2.0], &[2.0, -1.0]]);
        let sys = PtSystem::new(h.clone(), PtPair::conjugation(2), &tol()).unwrap();
        let d = build_dilation(
            &sys,
            &EtaSource::Supplied {
                eta: identity(2),
                rescale: true,
            },
            2.0,
            &H1Choice::Zero,
            &tol(),
        )
        .unwrap();
        assert!((&d.eta - identity(2).scale(2.0)).norm() < 1e-14);
        assert!((&d.tau - identity(2)).norm() < 1e-14);
        // H2^dag + H4 tau = tau H with tau = I and H2 = H forces H4 = 0
        assert!((&d.h2 - &h).norm() < 1e-12 && d.h4.norm() < 1e-12);
        assert!(d.residuals.max() < 1e-12);

        let x = embed_state(&unit(2, 0), &d).unwrap();
        let want = stack(&unit(2, 0), &unit(2, 0)).unscale(2f64.sqrt());
        assert!((&x - want).norm() < 1e-15);
        let y = dilated_evolution(&d, 0.7, &x, &tol()).unwrap();
        let u = matrix_exp(&h.map(|z| z * Complex64::new(0.0, -0.7))).unwrap();
        let top = &u * unit(2, 0).unscale(2f64.sqrt());
        assert!((y.rows(0, 2) - &top).norm() < 1e-12);
        assert!((y.rows(2, 2) - &top).norm() < 1e-12);
    }

    #[test]
    fn dimer_reference_matrices() {
        let (a, s) = (FRAC_PI_6, 1.0);
        let sys = PtSystem::new(dimer(a, s, 0.0), dimer_pt(), &tol()).unwrap();
        let d = build_dilation(
            &sys,
            &EtaSource::Supplied {
                eta: dimer_eta(a),
                rescale: false,
            },
            DEFAULT_MARGIN,
            &H1Choice::Reference,
            &tol(),
        )
        .unwrap();
        assert!((&d.tau - dimer_tau(a)).norm() < 1e-12);
        assert!((&d.h1 - dimer_h1(a, s, 0.0)).norm() < 1e-12);
        assert!((&d.h2 - dimer_h2(a, s)).norm() < 1e-12);
        assert!((&d.h4 - dimer_h1(a, s, 0.0)).norm() < 1e-12);
        assert!(d.residuals.max() < 1e-12);
        let p = d.subspace().projector().unwrap();
        assert!((p - crate::fixtures::dimer_projection(a)).norm() < 1e-12);
    }

    #[test]
    fn zero_h1_and_auto_metric() {
        let sys = PtSystem::new(dimer(FRAC_PI_6, 1.0, 0.0), dimer_pt(), &tol()).unwrap();
        let d = build_dilation(
            &sys,
            &EtaSource::Auto,
            DEFAULT_MARGIN,
            &H1Choice::Zero,
            &tol(),
        )
        .unwrap();
        assert!(d.residuals.max() < 1e-10);
        assert!((hermitian_eigen(&d.eta).unwrap().min() - DEFAULT_MARGIN).abs() < 1e-12);
    }

    #[test]
    fn refusals() {
        let sys = PtSystem::new(dimer(FRAC_PI_6, 1.0, 0.0), dimer_pt(), &tol()).unwrap();
        let small = EtaSource::Supplied {
            eta: dimer_eta(FRAC_PI_6).scale(0.1),
            rescale: false,
        };
        assert!(matches!(
            build_dilation(&sys, &small, DEFAULT_MARGIN, &H1Choice::Zero, &tol()),
            Err(PtError::EtaNotGreaterThanI { .. })
        ));
        let bad_h1 = H1Choice::Supplied(from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert!(matches!(
            build_dilation(&sys, &EtaSource::Auto, DEFAULT_MARGIN, &bad_h1, &tol()),
            Err(PtError::SuppliedH1NotHermitian { .. })
        ));
        let broken = PtSystem::new(
            crate::numkernel::from_rows(&[
                &[crate::numkernel::I * 2.0, re(1.0)],
                &[re(1.0), -crate::numkernel::I * 2.0],
            ]),
            dimer_pt(),
            &tol(),
        )
        .unwrap();
        assert!(matches!(
            build_dilation(
                &broken,
                &EtaSource::Auto,
                DEFAULT_MARGIN,
                &H1Choice::Zero,
                &tol()
            ),
            Err(PtError::NotUnbroken { .. })
        ));
    }

    #[test]
    fn membership() {
        let sys = PtSystem::new(dimer(FRAC_PI_6, 1.0, 0.0), dimer_pt(), &tol()).unwrap();
        let d = build_dilation(
            &sys,
            &EtaSource::Auto,
            DEFAULT_MARGIN,
            &H1Choice::Zero,
            &tol(),
        )
        .unwrap();
        let x = embed_state(&unit(2, 1), &d).unwrap();
        assert!(embedding_membership(&d.hhat, &d.h, &x, &tol()).unwrap());
        assert!(embedding_membership(&d.hhat, &d.h, &ComplexVector::zeros(4), &tol()).unwrap());
        let off = stack(&ComplexVector::zeros(2), &unit(2, 0));
        assert!(!embedding_membership(&d.hhat, &d.h, &off, &tol()).unwrap());
        assert!(matches!(
            dilated_evolution(&d, 1.0, &off, &tol()),
            Err(PtError::NotInSubspace { .. })
        ));
        assert_eq!(
            embed_state(&ComplexVector::zeros(2), &d).unwrap_err(),
            PtError::ZeroVector
        );
    }
}
