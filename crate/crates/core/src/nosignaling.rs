//! Two-party signaling test for a local PT-symmetric channel.
//!
//! Alice and Bob share `(|00> + |11>)/sqrt2`. Alice applies `I` or `sigma_x`,
//! then her qubit evolves under the dimer Hamiltonian, either directly
//! (`rho' U0(t) rho`, normalised) or through the ancilla-assisted pipeline.
//! Both parties measure in the `sigma_y` basis. Two-qubit vectors are indexed
//! `2a + b` (Alice, Bob); with the ancilla, `4 anc + 2a + b`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::completion::{post_select, projector};
use crate::dilation::Dilation;
use crate::error::{PtError, Result};
use crate::numkernel::{
    identity, kron, matrix_exp, pauli_x, ComplexMatrix, ComplexVector, Tolerances,
};
use crate::pipeline::{
    gunther_dilation, preparation_completion, readout_completion, system_subspace_basis, Scheme,
};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Alice's qubit is acted on by `rho' U0(t) rho` and the joint state normalised.
    Direct,
    /// The full ancilla pipeline on Alice's side, identity on Bob's.
    Simulated,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub s: f64,
    pub e0: f64,
    pub t: f64,
    pub scheme: Scheme,
    pub mode: Mode,
}

impl ExperimentConfig {
    pub fn new(alpha: f64, s: f64, t: f64, scheme: Scheme, mode: Mode) -> Self {
        ExperimentConfig {
            alpha,
            s,
            e0: 0.0,
            t,
            scheme,
            mode,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(PtError::InvalidParameter(format!(
                "|alpha| must be below pi/2, got {}",
                self.alpha
            )));
        }
        if !(self.s.is_finite() && self.t.is_finite() && self.e0.is_finite()) {
            return Err(PtError::InvalidParameter(
                "s, t and E0 must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome table indexed `[k][a][b]` with `0 = +y` and `1 = -y`.
#[derive(Debug, Clone, Serialize)]
pub struct JointStats {
    pub table: [[[f64; 2]; 2]; 2],
    pub bob_marginals: [[f64; 2]; 2],
    pub delta_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_success: Option<[f64; 2]>,
}

impl JointStats {
    fn from_states(states: [ComplexVector; 2], p_success: Option<[f64; 2]>) -> Self {
        let basis = y_basis();
        let mut table = [[[0.0; 2]; 2]; 2];
        let mut bob_marginals = [[0.0; 2]; 2];
        for (k, state) in states.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    let probe = kron_vec(&basis[a], &basis[b]);
                    let p = probe.dotc(state).norm_sqr();
                    table[k][a][b] = p;
                    bob_marginals[k][b] += p;
                }
            }
        }
        JointStats {
            table,
            bob_marginals,
            delta_s: (bob_marginals[0][0] - bob_marginals[1][0]).abs(),
            p_success,
        }
    }

    /// Largest `|sum_{a,b} P(a,b|A_k) - 1|`.
    pub fn normalization_defect(&self) -> f64 {
        self.table
            .iter()
            .map(|t| (t.iter().flatten().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    ComplexVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

/// `|+y> = (|0> + i|1>)/sqrt2`, `|-y> = (|0> - i|1>)/sqrt2`.
pub fn y_basis() -> [ComplexVector; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        ComplexVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)]),
        ComplexVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(0.0, -h)]),
    ]
}

/// `(|+x +x> + |-x -x>)/sqrt2`, which expands to `(|00> + |11>)/sqrt2`.
pub fn bell_plus_x_state() -> ComplexVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = ComplexVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]);
    let minus = ComplexVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]);
    (kron_vec(&plus, &plus) + kron_vec(&minus, &minus)).unscale(2f64.sqrt())
}

fn alice_unitaries() -> [ComplexMatrix; 2] {
    [identity(2), pauli_x()]
}

fn bob_phase(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -t)
}

fn prepared_branches() -> [ComplexVector; 2] {
    let psi = bell_plus_x_state();
    alice_unitaries().map(|u| kron(&u, &identity(2)) * &psi)
}

fn channel(d: &Dilation, scheme: &Scheme, t: f64) -> Result<ComplexMatrix> {
    let (rho, rho_prime) = scheme.operators(&d.eta)?;
    let u0 = matrix_exp(&d.h.map(|z| z * Complex64::new(0.0, -t)))?;
    Ok(rho_prime * u0 * rho)
}

fn run_direct(cfg: &ExperimentConfig, d: &Dilation, tol: &Tolerances) -> Result<JointStats> {
    let k_op = channel(d, &cfg.scheme, cfg.t)?;
    let op = kron(&k_op, &identity(2)).map(|z| z * bob_phase(cfg.t));
    let mut states = Vec::with_capacity(2);
    for (k, branch) in prepared_branches().iter().enumerate() {
        let out = &op * branch;
        let norm = out.norm();
        if norm <= tol.psd_tol {
            return Err(PtError::ZeroBranch { branch: k + 1 });
        }
        states.push(out.unscale(norm));
    }
    let states: [ComplexVector; 2] = states.try_into().expect("two branches");
    Ok(JointStats::from_states(states, None))
}

/// Alice-side operator on (ancilla, Alice) lifted to (ancilla, Alice, Bob).
fn lift(x: &ComplexMatrix) -> ComplexMatrix {
    kron(x, &identity(2))
}

fn run_simulated(cfg: &ExperimentConfig, d: &Dilation, tol: &Tolerances) -> Result<JointStats> {
    let (rho, rho_prime) = cfg.scheme.operators(&d.eta)?;
    let (_, prep) = preparation_completion(d, &rho, tol)?;
    let (_, read) = readout_completion(d, &rho_prime, tol)?;
    let evolve = lift(&d.propagator(cfg.t)?).map(|z| z * bob_phase(cfg.t));
    let prep_u = lift(&prep.u);
    let prep_p = lift(&prep.p_n);
    let read_u = lift(&read.u);
    let ancilla_zero = lift(&projector(&system_subspace_basis(2)));

    let mut states = Vec::with_capacity(2);
    let mut p_success = [0.0; 2];
    for (k, branch) in prepared_branches().iter().enumerate() {
        let mut xi = ComplexVector::zeros(8);
        xi.rows_mut(0, 4).copy_from(branch);
        let (xi, p1) = post_select(&(&prep_u * xi), &prep_p, tol)?;
        let xi = &evolve * xi;
        let (xi, p2) = post_select(&(&read_u * xi), &ancilla_zero, tol)?;
        let p = p1 * p2;
        if p <= tol.psd_tol {
            return Err(PtError::ZeroBranch { branch: k + 1 });
        }
        p_success[k] = p;
        states.push(xi.rows(0, 4).into_owned());
    }
    let states: [ComplexVector; 2] = states.try_into().expect("two branches");
    Ok(JointStats::from_states(states, Some(p_success)))
}

pub fn run_experiment(cfg: &ExperimentConfig, tol: &Tolerances) -> Result<JointStats> {
    cfg.validate()?;
    let d = gunther_dilation(cfg.alpha, cfg.s, cfg.e0, tol)?;
    match cfg.mode {
        Mode::Direct => run_direct(cfg, &d, tol),
        Mode::Simulated => run_simulated(cfg, &d, tol),
    }
}

/// Bob's statistics on the full dilated state without any post-selection.
#[derive(Debug, Clone, Serialize)]
pub struct WholeSystemReport {
    /// `P(b = +y | A_k)` for `k = 1, 2`.
    pub bob_plus_y: [f64; 2],
    pub marginal_gap: f64,
    /// `||rho_B(A_1) - rho_B(A_2)||_F` for Bob's reduced density matrix.
    pub reduced_state_gap: f64,
}

/// Bob's reduced density matrix of a state indexed `2 * rest + b`.
fn bob_reduced(state: &ComplexVector) -> ComplexMatrix {
    let rest = state.len() / 2;
    ComplexMatrix::from_fn(2, 2, |b, bp| {
        (0..rest)
            .map(|r| state[2 * r + b] * state[2 * r + bp].conj())
            .sum()
    })
}

/// Apply the preparation unitary, the dilated evolution and the readout
/// unitary to (ancilla, Alice) and compare Bob's side between `A_1` and `A_2`.
pub fn whole_system_marginals(
    cfg: &ExperimentConfig,
    tol: &Tolerances,
) -> Result<WholeSystemReport> {
    cfg.validate()?;
    let d = gunther_dilation(cfg.alpha, cfg.s, cfg.e0, tol)?;
    let (rho, rho_prime) = cfg.scheme.operators(&d.eta)?;
    let (_, prep) = preparation_completion(&d, &rho, tol)?;
    let (_, read) = readout_completion(&d, &rho_prime, tol)?;
    let total = lift(&(&read.u * d.propagator(cfg.t)? * &prep.u)).map(|z| z * bob_phase(cfg.t));
    let plus_y = &y_basis()[0];
    let mut bob_plus_y = [0.0; 2];
    let mut reduced = Vec::with_capacity(2);
    for (k, branch) in prepared_branches().iter().enumerate() {
        let mut xi = ComplexVector::zeros(8);
        xi.rows_mut(0, 4).copy_from(branch);
        let out = &total * xi;
        let rho_b = bob_reduced(&out);
        bob_plus_y[k] = plus_y.dotc(&(&rho_b * plus_y)).re;
        reduced.push(rho_b);
    }
    Ok(WholeSystemReport {
        bob_plus_y,
        marginal_gap: (bob_plus_y[0] - bob_plus_y[1]).abs(),
        reduced_state_gap: (&reduced[0] - &reduced[1]).norm(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub t: f64,
    pub scheme: String,
    pub delta_s: f64,
    pub p_success_1: Option<f64>,
    pub p_success_2: Option<f64>,
}

/// `delta_S` over `alphas x ts`, row-major in `alphas`.
pub fn sweep_delta_s(
    alphas: &[f64],
    ts: &[f64],
    s: f64,
    scheme: &Scheme,
    mode: Mode,
    tol: &Tolerances,
) -> Result<Vec<SweepRow>> {
    let grid: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| ts.iter().map(move |&t| (a, t)))
        .collect();
    grid.par_iter()
        .map(|&(alpha, t)| {
            let cfg = ExperimentConfig::new(alpha, s, t, scheme.clone(), mode);
            let stats = run_experiment(&cfg, tol)?;
            Ok(SweepRow {
                alpha,
                t,
                scheme: scheme.name().to_string(),
                delta_s: stats.delta_s,
                p_success_1: stats.p_success.map(|p| p[0]),
                p_success_2: stats.p_success.map(|p| p[1]),
            })
        })
        .collect()
}

/// Write sweep rows as CSV with a header row.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| PtError::NumericalFailure(format!("csv: {e}"));
    w.write_record([
        "alpha",
        "t",
        "scheme",
        "delta_S",
        "p_success_1",
        "p_success_2",
    ])
    .map_err(io)?;
    let opt = |p: Option<f64>| p.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            format!("{:.16e}", r.alpha),
            format!("{:.16e}", r.t),
            r.scheme.clone(),
            format!("{:.16e}", r.delta_s),
            opt(r.p_success_1),
            opt(r.p_success_2),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| PtError::NumericalFailure(format!("csv: {e}")))?;
    Ok(())
}
