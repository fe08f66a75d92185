//! Three-stage simulation of PT evolution with an ancilla qubit.
//!
//! 1. `(psi; 0)` is mapped into `Y_tau` by a unitary completion of
//!    `(phi; 0) -> (rho phi; tau rho phi)` and post-selected onto `Y_tau`.
//! 2. The dilated unitary `exp(-it Hhat)` acts.
//! 3. `(phi; tau phi) -> (rho' phi; 0)` is completed, post-selected onto the
//!    ancilla state `|0>` and the ancilla is discarded.
//!
//! The surviving state is proportional to `rho' U(t) rho psi`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::completion::{complete, post_select, projector, CompletionResult, SubspaceMap};
use crate::dilation::{
    build_dilation, dilated_evolution, Dilation, EtaSource, H1Choice, TauSubspace,
};
use crate::error::{PtError, Result};
use crate::fixtures;
use crate::numkernel::json::vector_serde;
use crate::numkernel::{
    ensure_finite, ensure_same_order, hermitian_eigen, matrix_exp, max_abs_diff, stack,
    ComplexMatrix, ComplexVector, Tolerances,
};
use crate::ptcore::PtSystem;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub enum Scheme {
    Identity,
    /// `rho = eta^{-1/2}`, `rho' = eta^{1/2}`.
    MetricSandwich,
    Custom {
        rho: ComplexMatrix,
        rho_prime: ComplexMatrix,
    },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Identity => "identity",
            Scheme::MetricSandwich => "metric_sandwich",
            Scheme::Custom { .. } => "custom",
        }
    }

    /// `(rho, rho')` for a system whose metric is `eta`.
    pub fn operators(&self, eta: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let n = eta.nrows();
        match self {
            Scheme::Identity => Ok((crate::numkernel::identity(n), crate::numkernel::identity(n))),
            Scheme::MetricSandwich => {
                let e = hermitian_eigen(eta)?;
                if e.min() <= 0.0 {
                    return Err(PtError::NotPositiveDefinite {
                        min_eigenvalue: e.min(),
                    });
                }
                let inv_sqrt = e.apply(|x| Complex64::new(1.0 / x.sqrt(), 0.0));
                let sqrt = e.apply(|x| Complex64::new(x.sqrt(), 0.0));
                Ok((inv_sqrt, sqrt))
            }
            Scheme::Custom { rho, rho_prime } => {
                ensure_same_order(rho, n)?;
                ensure_same_order(rho_prime, n)?;
                ensure_finite(rho)?;
                ensure_finite(rho_prime)?;
                Ok((rho.clone(), rho_prime.clone()))
            }
        }
    }
}

/// Number of repetitions and seed for binomial sampling of the two post-selections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sampling {
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub dilation: Dilation,
    pub scheme: Scheme,
    pub rho: ComplexMatrix,
    pub rho_prime: ComplexMatrix,
    pub t: f64,
    pub psi: ComplexVector,
    pub sampling: Option<Sampling>,
}

impl SimulationConfig {
    pub fn new(dilation: Dilation, scheme: Scheme, t: f64, psi: ComplexVector) -> Result<Self> {
        if !t.is_finite() {
            return Err(PtError::InvalidParameter("t must be finite".into()));
        }
        if psi.len() != dilation.order() {
            return Err(PtError::DimensionMismatch {
                expected: dilation.order(),
                found: psi.len(),
            });
        }
        let (rho, rho_prime) = scheme.operators(&dilation.eta)?;
        Ok(SimulationConfig {
            dilation,
            scheme,
            rho,
            rho_prime,
            t,
            psi,
            sampling: None,
        })
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = Some(sampling);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampledCounts {
    pub shots: u64,
    pub prepared: u64,
    pub accepted: u64,
}

impl SampledCounts {
    pub fn estimate(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.accepted as f64 / self.shots as f64
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationTrace {
    #[serde(with = "vector_serde")]
    pub xi1: ComplexVector,
    #[serde(with = "vector_serde")]
    pub xi2: ComplexVector,
    #[serde(with = "vector_serde")]
    pub xi3: ComplexVector,
    #[serde(with = "vector_serde")]
    pub xi4: ComplexVector,
    #[serde(with = "vector_serde")]
    pub xi5: ComplexVector,
    pub p_prepare: f64,
    pub p_post: f64,
    pub p_total: f64,
    pub final_formula_check: f64,
    /// `||rho' U(t) rho psi||` for the unit input.
    pub core_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled: Option<SampledCounts>,
}

/// Computational-basis vectors `(e_j; 0)`: the subspace with the ancilla in `|0>`.
pub fn system_subspace_basis(n: usize) -> Vec<ComplexVector> {
    (0..n)
        .map(|j| {
            let mut e = ComplexVector::zeros(2 * n);
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect()
}

fn eta_sqrt_pair(eta: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    Scheme::MetricSandwich.operators(eta)
}

/// Completion of `(phi; 0) -> (rho phi; tau rho phi)` from `X_1` into `Y_tau`.
pub fn preparation_completion(
    d: &Dilation,
    rho: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(SubspaceMap, CompletionResult)> {
    let n = d.order();
    let (_, sqrt) = eta_sqrt_pair(&d.eta)?;
    let y_basis = TauSubspace::new(d.tau.clone())?.orthonormal_basis()?;
    // V^dag [I; tau] rho = eta^{-1/2} eta rho
    let a = sqrt * rho;
    let map = SubspaceMap::new(system_subspace_basis(n), y_basis, a, tol)?;
    let done = complete(&map, tol)?;
    Ok((map, done))
}

/// Completion of `(phi; tau phi) -> (rho' phi; 0)` from `Y_tau` onto `X_1`.
pub fn readout_completion(
    d: &Dilation,
    rho_prime: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(SubspaceMap, CompletionResult)> {
    let n = d.order();
    let (inv_sqrt, _) = eta_sqrt_pair(&d.eta)?;
    let y_basis = TauSubspace::new(d.tau.clone())?.orthonormal_basis()?;
    // basis vector j of Y_tau is [I; tau] eta^{-1/2} e_j
    let a = rho_prime * inv_sqrt;
    let map = SubspaceMap::new(y_basis, system_subspace_basis(n), a, tol)?;
    let done = complete(&map, tol)?;
    Ok((map, done))
}

fn normalized(v: &ComplexVector) -> ComplexVector {
    let n = v.norm();
    if n == 0.0 {
        v.clone()
    } else {
        v.unscale(n)
    }
}

/// Distance between two unit vectors modulo a global phase.
pub fn phase_distance(a: &ComplexVector, b: &ComplexVector) -> f64 {
    let overlap = b.dotc(a);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    (a - b * phase).norm()
}

pub fn run_simulation(cfg: &SimulationConfig, tol: &Tolerances) -> Result<SimulationTrace> {
    let d = &cfg.dilation;
    let n = d.order();
    let psi_norm = cfg.psi.norm();
    if psi_norm == 0.0 {
        return Err(PtError::ZeroVector);
    }
    let psi = cfg.psi.unscale(psi_norm);

    let u = matrix_exp(&d.h.map(|z| z * Complex64::new(0.0, -cfg.t)))?;
    let core = &cfg.rho_prime * &u * &cfg.rho * &psi;
    let core_norm = core.norm();
    if core_norm <= tol.psd_tol {
        return Err(PtError::ZeroFinalState);
    }

    let xi1 = stack(&psi, &ComplexVector::zeros(n));
    let (_, prep) = preparation_completion(d, &cfg.rho, tol)?;
    let (xi2, p_prepare) = post_select(&(&prep.u * &xi1), &prep.p_n, tol)?;
    if p_prepare == 0.0 {
        return Err(PtError::ZeroFinalState);
    }
    let xi3 = dilated_evolution(d, cfg.t, &xi2, tol)?;
    let (_, read) = readout_completion(d, &cfg.rho_prime, tol)?;
    let ancilla_zero = projector(&system_subspace_basis(n));
    let (xi4, p_post) = post_select(&(&read.u * &xi3), &ancilla_zero, tol)?;
    if p_post == 0.0 {
        return Err(PtError::ZeroFinalState);
    }
    let xi5 = xi4.rows(0, n).into_owned();
    let final_formula_check = (&xi5 - normalized(&core)).norm();

    let sampled = cfg
        .sampling
        .map(|s| sample_counts(s, p_prepare, p_post))
        .transpose()?;
    Ok(SimulationTrace {
        xi1,
        xi2,
        xi3,
        xi4,
        xi5,
        p_prepare,
        p_post,
        p_total: p_prepare * p_post,
        final_formula_check,
        core_norm,
        sampled,
    })
}

fn sample_counts(s: Sampling, p_prepare: f64, p_post: f64) -> Result<SampledCounts> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let draw = |rng: &mut ChaCha8Rng, n: u64, p: f64| -> Result<u64> {
        let dist = Binomial::new(n, p.clamp(0.0, 1.0))
            .map_err(|e| PtError::InvalidParameter(e.to_string()))?;
        Ok(dist.sample(rng))
    };
    let prepared = draw(&mut rng, s.shots, p_prepare)?;
    let accepted = draw(&mut rng, prepared, p_post)?;
    Ok(SampledCounts {
        shots: s.shots,
        prepared,
        accepted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    Above,
}

/// One comparison in a report: a computed value and the bound it must meet.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= bound`.
    pub fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            relation: Relation::AtMost,
            pass: value.is_finite() && value <= bound,
        }
    }

    /// Passes when `value > bound`.
    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            relation: Relation::Above,
            pass: value.is_finite() && value > bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GuntherReport {
    pub alpha: f64,
    pub s: f64,
    pub e0: f64,
    pub t: f64,
    pub checks: Vec<Check>,
    /// Residual of `Hhat` against the tensor form with an unscaled coupling term.
    pub unscaled_tensor_residual: f64,
    pub preparation_amplitude: [f64; 2],
    pub preparation_probability: f64,
}

impl GuntherReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Dilation of the dimer with `eta(alpha)` and the `H1` recipe.
pub fn gunther_dilation(alpha: f64, s: f64, e0: f64, tol: &Tolerances) -> Result<Dilation> {
    if alpha.is_nan() || alpha.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(PtError::InvalidParameter(format!(
            "|alpha| must be below pi/2, got {alpha}"
        )));
    }
    let sys = PtSystem::new(fixtures::dimer(alpha, s, e0), fixtures::dimer_pt(), tol)?;
    build_dilation(
        &sys,
        &EtaSource::Supplied {
            eta: fixtures::dimer_eta(alpha),
            rescale: false,
        },
        crate::dilation::DEFAULT_MARGIN,
        &H1Choice::Reference,
        tol,
    )
}

/// Compare the dimer dilation, projection, preparation amplitude and block
/// evolution with their closed forms.
pub fn reproduce_gunther_example(
    alpha: f64,
    s: f64,
    e0: f64,
    t: f64,
    tol: &Tolerances,
) -> Result<GuntherReport> {
    let bound = 1e-10;
    let d = gunther_dilation(alpha, s, e0, tol)?;
    let mut checks = vec![
        Check::new(
            "tau",
            max_abs_diff(&d.tau, &fixtures::dimer_tau(alpha)),
            bound,
        ),
        Check::new(
            "H1",
            max_abs_diff(&d.h1, &fixtures::dimer_h1(alpha, s, e0)),
            bound,
        ),
        Check::new(
            "H2",
            max_abs_diff(&d.h2, &fixtures::dimer_h2(alpha, s)),
            bound,
        ),
        Check::new(
            "H4",
            max_abs_diff(&d.h4, &fixtures::dimer_h1(alpha, s, e0)),
            bound,
        ),
        Check::new(
            "Hhat_tensor",
            max_abs_diff(&d.hhat, &fixtures::dimer_hhat_tensor(alpha, s, e0)),
            bound,
        ),
    ];
    let unscaled_tensor_residual =
        max_abs_diff(&d.hhat, &fixtures::dimer_hhat_tensor_unscaled(alpha, s, e0));

    let p_y = d.subspace().projector()?;
    checks.push(Check::new(
        "P_Y",
        max_abs_diff(&p_y, &fixtures::dimer_projection(alpha)),
        bound,
    ));

    let psi_i = ComplexVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let xi1 = stack(&psi_i, &ComplexVector::zeros(2));
    let psi_hat = stack(&psi_i, &(&d.tau * &psi_i));
    let amplitude_of = |out: &ComplexVector| -> (Complex64, f64) {
        let amp = psi_hat.dotc(out) / psi_hat.norm_squared();
        (amp, (out - &psi_hat * amp).norm())
    };
    let (_, prep) = preparation_completion(&d, &crate::numkernel::identity(2), tol)?;
    let out = &prep.p_n * &prep.u * &xi1;
    let (amp, off) = amplitude_of(&out);
    let want = alpha.cos() / 2.0;
    checks.push(Check::new(
        "prep_amplitude",
        (amp - Complex64::new(want, 0.0)).norm().max(off),
        bound,
    ));
    checks.push(Check::new(
        "prep_unitarity",
        prep.unitarity_residual(),
        1e-12,
    ));

    let reference_u = fixtures::dimer_prep_unitary(alpha);
    let (reference_amp, reference_off) = amplitude_of(&(&p_y * &reference_u * &xi1));
    checks.push(Check::new(
        "reference_prep_unitary",
        (reference_amp - Complex64::new(want, 0.0))
            .norm()
            .max(reference_off)
            .max((reference_u.adjoint() * &reference_u - crate::numkernel::identity(4)).norm()),
        bound,
    ));

    let evolved = d.propagator(t)? * &psi_hat;
    let u = matrix_exp(&d.h.map(|z| z * Complex64::new(0.0, -t)))?;
    let top = evolved.rows(0, 2).into_owned();
    checks.push(Check::new(
        "evolution_top",
        (&top - &u * &psi_i).norm(),
        1e-8,
    ));
    checks.push(Check::new(
        "evolution_bottom",
        (evolved.rows(2, 2) - &d.tau * &top).norm(),
        1e-8,
    ));
    Ok(GuntherReport {
        alpha,
        s,
        e0,
        t,
        checks,
        unscaled_tensor_residual,
        preparation_amplitude: [amp.re, amp.im],
        preparation_probability: out.norm_squared(),
    })
}
