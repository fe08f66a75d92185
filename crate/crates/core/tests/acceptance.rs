//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_6};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use ptsim::completion::{complete, SubspaceMap};
use ptsim::dilation::{
    build_dilation, embed_state, embedding_membership, EtaSource, H1Choice, DEFAULT_MARGIN,
};
use ptsim::fixtures;
use ptsim::metric::{
    intertwining_residual, positive_metric, scalar_sum_metric_2d, scalar_sum_obstruction_demo,
};
use ptsim::nosignaling::{run_experiment, whole_system_marginals, ExperimentConfig, Mode};
use ptsim::numkernel::{
    hermitian_eigen, hermiticity_residual, identity, inverse, max_abs_diff, principal_sqrt_psd,
    stack,
};
use ptsim::pipeline::{
    gunther_dilation, preparation_completion, reproduce_gunther_example, run_simulation, Scheme,
    SimulationConfig,
};
use ptsim::ptcore::{classify, PtPair, PtSystem};
use ptsim::{ComplexMatrix, ComplexVector, PtError, Tolerances};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const ALPHAS: [f64; 3] = [FRAC_PI_6, FRAC_PI_4, 1.0];
const TIMES: [f64; 3] = [0.5, 1.0, 2.0];

/// Identity-scheme `delta_S` at `s = 1`, rows `ALPHAS`, columns `TIMES`.
/// Computed once with an independent dense-exponential script and frozen.
#[allow(clippy::excessive_precision)]
const FROZEN_DELTA_S: [[f64; 3]; 3] = [
    [
        2.10098973386929289e-01,
        5.57885238580254739e-01,
        7.87497448684103984e-01,
    ],
    [
        2.73493740513711669e-01,
        6.47309884671583347e-01,
        9.35040549436818247e-01,
    ],
    [
        3.05163140868125571e-01,
        6.67990098313516967e-01,
        9.39559021910084113e-01,
    ],
];

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn psi_i() -> ComplexVector {
    ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut literal = [0.0f64; 2];
    for &alpha in &ALPHAS {
        for (si, s) in [1.0, 2.0].into_iter().enumerate() {
            for e0 in [0.0, 1.0] {
                let r = reproduce_gunther_example(alpha, s, e0, 1.0, &tol())
                    .map_err(|e| e.to_string())?;
                for name in ["tau", "H1", "H2", "H4", "Hhat_tensor"] {
                    let ch = r.check(name).ok_or(format!("missing check {name}"))?;
                    ensure!(
                        ch.value <= 1e-10,
                        "{name} off by {:.3e} at alpha={alpha}, s={s}, E0={e0}",
                        ch.value
                    );
                    worst = worst.max(ch.value);
                }
                literal[si] = literal[si].max(r.unscaled_tensor_residual);
            }
        }
    }
    ensure!(
        literal[0] <= 1e-10,
        "tensor form disagrees at s=1: {:.3e}",
        literal[0]
    );
    Ok(format!(
        "12 points, worst entry {worst:.1e}; coupling term -s cos sin sigma_y(x)sigma_z \
         (without the factor s: residual {:.1e} at s=1, {:.3} at s=2)",
        literal[0], literal[1]
    ))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for &alpha in &ALPHAS {
        for s in [1.0, 2.0] {
            for e0 in [0.0, 1.0] {
                let d = gunther_dilation(alpha, s, e0, &tol()).map_err(|e| e.to_string())?;
                let (_, prep) =
                    preparation_completion(&d, &identity(2), &tol()).map_err(|e| e.to_string())?;
                let out = &prep.p_n * &prep.u * stack(&psi_i(), &ComplexVector::zeros(2));
                let hat = stack(&psi_i(), &(&d.tau * psi_i()));
                let amp = hat.dotc(&out) / hat.norm_squared();
                let err = (amp - c(alpha.cos() / 2.0, 0.0))
                    .norm()
                    .max((&out - &hat * amp).norm());
                ensure!(err <= 1e-10, "amplitude off by {err:.3e} at alpha={alpha}");
                worst = worst.max(err);
            }
        }
    }
    Ok(format!(
        "amplitude cos(alpha)/2 on 12 points, worst {worst:.1e}"
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = common::rng(3);
    let mut worst = 0.0f64;
    for &alpha in &ALPHAS {
        for s in [1.0, 2.0] {
            let d = gunther_dilation(alpha, s, 0.0, &tol()).map_err(|e| e.to_string())?;
            for psi in [psi_i(), common::unit_vector(&mut rng, 2)] {
                let lifted = stack(&psi, &(&d.tau * &psi));
                for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
                    let out = d.propagator(t).map_err(|e| e.to_string())? * &lifted;
                    let top = out.rows(0, 2).into_owned();
                    let e_top = (&top - common::evolution(&d.h, t) * &psi).norm();
                    let e_bottom = (out.rows(2, 2) - &d.tau * &top).norm();
                    ensure!(
                        e_top <= 1e-8 && e_bottom <= 1e-8,
                        "alpha={alpha}, t={t}: top {e_top:.3e}, bottom {e_bottom:.3e}"
                    );
                    worst = worst.max(e_top).max(e_bottom);
                }
            }
        }
    }
    Ok(format!("60 evolutions, worst block error {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = common::rng(4);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n = 2 + i % 3;
        let sys = common::unbroken_system(&mut rng, n);
        let h1 = if i % 2 == 0 {
            H1Choice::Zero
        } else {
            H1Choice::Supplied(common::hermitian(&mut rng, n))
        };
        let d = build_dilation(&sys, &EtaSource::Auto, DEFAULT_MARGIN, &h1, &tol())
            .map_err(|e| format!("system {i}: {e}"))?;
        let r1 = (&d.h1 + &d.h2 * &d.tau - sys.h()).norm();
        let r2 = (d.h2.adjoint() + &d.h4 * &d.tau - &d.tau * sys.h()).norm();
        let r3 = hermiticity_residual(&d.hhat);
        let r = r1.max(r2).max(r3);
        ensure!(
            r <= 1e-10,
            "system {i} (n={n}): residuals {r1:.3e} {r2:.3e} {r3:.3e}"
        );
        worst = worst.max(r);
    }
    Ok(format!("50 random systems, worst residual {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let (mut ok, mut refused) = (0, 0);
    let mut worst = 0.0f64;
    for entry in fixtures::positivity_corpus() {
        let sys = PtSystem::new(entry.h.clone(), entry.pt.clone(), &tol())
            .map_err(|e| format!("{}: {e}", entry.name))?;
        match (entry.unbroken, positive_metric(&sys, &tol())) {
            (true, Ok(m)) => {
                let r = intertwining_residual(&entry.h, &m.eta);
                let min = hermitian_eigen(&m.eta).map_err(|e| e.to_string())?.min();
                ensure!(
                    r <= 1e-10 && min > 0.0,
                    "{}: residual {r:.3e}, min {min:.3e}",
                    entry.name
                );
                worst = worst.max(r);
                ok += 1;
            }
            (false, Err(PtError::NotUnbroken { .. })) => refused += 1,
            (_, other) => return Err(format!("{}: unexpected {other:?}", entry.name)),
        }
    }
    ensure!(
        ok == 10 && refused == 10,
        "{ok} metrics, {refused} refusals"
    );
    Ok(format!(
        "10 metrics (worst residual {worst:.1e}), 10 NotUnbroken refusals"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = common::rng(6);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let sys = common::unbroken_system(&mut rng, 2);
        let (m, t) = scalar_sum_metric_2d(&sys, &tol()).map_err(|e| format!("system {i}: {e}"))?;
        let inv = inverse(&m.eta).map_err(|e| e.to_string())?;
        let r = (&m.eta + inv - identity(2).scale(t)).norm();
        let w = intertwining_residual(sys.h(), &m.eta);
        ensure!(
            r <= 1e-10 && w <= 1e-10,
            "system {i}: scalar sum {r:.3e}, metric {w:.3e}"
        );
        worst = worst.max(r);
    }
    let obs = scalar_sum_obstruction_demo(&tol()).map_err(|e| e.to_string())?;
    ensure!(
        obs.obstruction_entry_13 == c(1.0, 0.0) && obs.entry_13_max_deviation == 0.0,
        "entry (1,3) = {}",
        obs.obstruction_entry_13
    );
    ensure!(
        obs.min_residual > 0.1,
        "grid minimum {:.3e}",
        obs.min_residual
    );
    Ok(format!(
        "20 systems, worst {worst:.1e}; h3 entry (1,3) = 1, grid min {:.4} over {} samples",
        obs.min_residual, obs.samples
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = common::rng(7);
    let (mut worst_u, mut worst_p) = (0.0f64, 0.0f64);
    let mut zero_maps = 0;
    for i in 0..20 {
        let n = 1 + i % 3;
        let mb = common::orthonormal(&mut rng, 2 * n, n);
        let nb = common::orthonormal(&mut rng, 2 * n, n);
        let a = if i % 10 == 0 {
            zero_maps += 1;
            ComplexMatrix::zeros(n, n)
        } else {
            common::gaussian_matrix(&mut rng, n, n)
        };
        let map = SubspaceMap::new(mb.clone(), nb, a, &tol()).map_err(|e| e.to_string())?;
        let r = complete(&map, &tol()).map_err(|e| format!("map {i}: {e}"))?;
        let ru = r.unitarity_residual();
        ensure!(ru <= 1e-12, "map {i}: unitarity {ru:.3e}");
        worst_u = worst_u.max(ru);
        for _ in 0..100 {
            let mut v = ComplexVector::zeros(2 * n);
            for b in &mb {
                v += b * common::gauss(&mut rng);
            }
            let err = (&r.p_n * &r.u * &v - map.apply(&v).scale(r.scale)).norm();
            ensure!(err <= 1e-10, "map {i}: defining property {err:.3e}");
            worst_p = worst_p.max(err);
        }
    }
    Ok(format!(
        "20 maps ({zero_maps} zero), unitarity {worst_u:.1e}, defining property {worst_p:.1e}"
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = common::rng(8);
    let mut cases: Vec<(String, SimulationConfig)> = Vec::new();
    let gunther = gunther_dilation(FRAC_PI_6, 1.0, 0.0, &tol()).map_err(|e| e.to_string())?;
    for scheme in [Scheme::Identity, Scheme::MetricSandwich] {
        let cfg = SimulationConfig::new(gunther.clone(), scheme.clone(), 1.0, psi_i())
            .map_err(|e| e.to_string())?;
        cases.push((format!("dimer/{}", scheme.name()), cfg));
        let sys = common::unbroken_system(&mut rng, 3);
        let d = build_dilation(
            &sys,
            &EtaSource::Auto,
            DEFAULT_MARGIN,
            &H1Choice::Zero,
            &tol(),
        )
        .map_err(|e| e.to_string())?;
        let psi = common::unit_vector(&mut rng, 3);
        let cfg = SimulationConfig::new(d, scheme.clone(), 0.7, psi).map_err(|e| e.to_string())?;
        cases.push((format!("random/{}", scheme.name()), cfg));
    }
    for i in 0..10 {
        let n = 2 + i % 2;
        let sys = common::unbroken_system(&mut rng, n);
        let d = build_dilation(
            &sys,
            &EtaSource::Auto,
            DEFAULT_MARGIN,
            &H1Choice::Reference,
            &tol(),
        )
        .map_err(|e| e.to_string())?;
        let scheme = Scheme::Custom {
            rho: common::frame(&mut rng, n),
            rho_prime: common::frame(&mut rng, n),
        };
        let psi = common::unit_vector(&mut rng, n);
        let t = 0.2 + 0.3 * i as f64;
        let cfg = SimulationConfig::new(d, scheme, t, psi).map_err(|e| e.to_string())?;
        cases.push((format!("custom/{i}"), cfg));
    }
    let mut worst = 0.0f64;
    for (name, cfg) in &cases {
        if let Scheme::MetricSandwich = cfg.scheme {
            let sq = max_abs_diff(&(&cfg.rho_prime * &cfg.rho_prime), &cfg.dilation.eta).max(
                max_abs_diff(&(&cfg.rho * &cfg.rho_prime), &identity(cfg.rho.nrows())),
            );
            ensure!(
                sq <= 1e-10,
                "{name}: metric sandwich operators off by {sq:.3e}"
            );
        }
        let trace = run_simulation(cfg, &tol()).map_err(|e| format!("{name}: {e}"))?;
        let raw = &cfg.rho_prime * common::evolution(&cfg.dilation.h, cfg.t) * &cfg.rho * &cfg.psi;
        let want = raw.unscale(raw.norm());
        let err = (&trace.xi5 - &want).norm();
        ensure!(err <= 1e-10, "{name}: final state off by {err:.3e}");
        worst = worst.max(err);
    }
    Ok(format!("{} configurations, worst {worst:.1e}", cases.len()))
}

/// Straight-line two-qubit computation of the identity-scheme gap using
/// `U0 = cos(wt) I - i sin(wt)/w H0`, `w = s cos(alpha)`.
fn oracle_delta_s(alpha: f64, s: f64, t: f64) -> f64 {
    let w = s * alpha.cos();
    let (cw, sw) = ((w * t).cos(), (w * t).sin() / w);
    let h = [
        [c(0.0, s * alpha.sin()), c(s, 0.0)],
        [c(s, 0.0), c(0.0, -s * alpha.sin())],
    ];
    let u = [
        [c(cw, 0.0) - c(0.0, sw) * h[0][0], -c(0.0, sw) * h[0][1]],
        [-c(0.0, sw) * h[1][0], c(cw, 0.0) - c(0.0, sw) * h[1][1]],
    ];
    let bob_plus = |k: usize| -> f64 {
        // amplitudes psi[a][b] of (|00> + |11>)/sqrt2, with sigma_x on Alice when k = 1
        let mut psi = [
            [c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)],
        ];
        if k == 1 {
            psi.swap(0, 1);
        }
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] = u[a][0] * psi[0][b] + u[a][1] * psi[1][b];
            }
        }
        let norm2: f64 = out.iter().flatten().map(|z| z.norm_sqr()).sum();
        let mut p = 0.0;
        for row in &out {
            let amp = (row[0] + c(0.0, -1.0) * row[1]) * FRAC_1_SQRT_2;
            p += amp.norm_sqr();
        }
        p / norm2
    };
    (bob_plus(0) - bob_plus(1)).abs()
}

fn criterion_9() -> Outcome {
    let mut worst_sandwich = 0.0f64;
    let mut smallest_violation = f64::INFINITY;
    for (i, &alpha) in ALPHAS.iter().enumerate() {
        for (j, &t) in TIMES.iter().enumerate() {
            for mode in [Mode::Direct, Mode::Simulated] {
                let cfg = ExperimentConfig::new(alpha, 1.0, t, Scheme::MetricSandwich, mode);
                let st = run_experiment(&cfg, &tol()).map_err(|e| e.to_string())?;
                ensure!(
                    st.delta_s <= 1e-10,
                    "metric sandwich gap {:.3e} at alpha={alpha}, t={t}, {mode:?}",
                    st.delta_s
                );
                ensure!(
                    st.normalization_defect() <= 1e-10,
                    "distribution not normalized"
                );
                worst_sandwich = worst_sandwich.max(st.delta_s);

                let cfg = ExperimentConfig::new(alpha, 1.0, t, Scheme::Identity, mode);
                let got = run_experiment(&cfg, &tol())
                    .map_err(|e| e.to_string())?
                    .delta_s;
                let frozen = FROZEN_DELTA_S[i][j];
                let oracle = oracle_delta_s(alpha, 1.0, t);
                ensure!(
                    (got - frozen).abs() <= 1e-10 && (oracle - frozen).abs() <= 1e-12,
                    "identity gap at alpha={alpha}, t={t}, {mode:?}: got {got:.17e}, \
                     oracle {oracle:.17e}, frozen {frozen:.17e}"
                );
                ensure!(got > 1e-6, "no violation at alpha={alpha}, t={t}");
                smallest_violation = smallest_violation.min(got);
            }
        }
    }
    Ok(format!(
        "metric sandwich worst {worst_sandwich:.1e}; identity gaps match frozen values, smallest {smallest_violation:.4}"
    ))
}

fn criterion_10() -> Outcome {
    let mut worst = 0.0f64;
    for &alpha in &ALPHAS {
        for &t in &TIMES {
            for scheme in [Scheme::Identity, Scheme::MetricSandwich] {
                let cfg = ExperimentConfig::new(alpha, 1.0, t, scheme, Mode::Simulated);
                let r = whole_system_marginals(&cfg, &tol()).map_err(|e| e.to_string())?;
                let gap = r.marginal_gap.max(r.reduced_state_gap);
                ensure!(gap <= 1e-10, "alpha={alpha}, t={t}: gap {gap:.3e}");
                worst = worst.max(gap);
            }
        }
    }
    Ok(format!(
        "18 whole-system runs, worst Bob-side gap {worst:.1e}"
    ))
}

fn criterion_11() -> Outcome {
    let mut rng = common::rng(11);
    let mut worst_norm = 0.0f64;
    for i in 0..50 {
        let n = 2 + i % 3;
        let sys = common::unbroken_system(&mut rng, n);
        let eta = positive_metric(&sys, &tol())
            .map_err(|e| e.to_string())?
            .eta;
        let root = principal_sqrt_psd(&eta, &tol()).map_err(|e| e.to_string())?;
        let psi = common::gaussian_vector(&mut rng, n);
        let psi = psi.unscale((&root * &psi).norm());
        let t = 3.0 * i as f64 / 50.0;
        let after = (&root * common::evolution(sys.h(), t) * &psi).norm();
        let err = (after - 1.0).abs();
        ensure!(err <= 1e-10, "system {i}: eta-norm drift {err:.3e}");
        worst_norm = worst_norm.max(err);
    }

    let mut similar = 0;
    for entry in fixtures::positivity_corpus() {
        let n = entry.h.nrows();
        let s = common::frame(&mut rng, n);
        let s_inv = inverse(&s).map_err(|e| e.to_string())?;
        let h = &s * &entry.h * &s_inv;
        let pt = &s * entry.pt.pt() * s_inv.map(|z| z.conj());
        let pair = PtPair::from_pt_matrix(&pt, &tol()).map_err(|e| e.to_string())?;
        let before = classify(&entry.h, Some(&entry.pt), &tol()).map_err(|e| e.to_string())?;
        let after =
            classify(&h, Some(&pair), &tol()).map_err(|e| format!("{}: {e}", entry.name))?;
        ensure!(
            before.kind == after.kind,
            "{}: {} became {}",
            entry.name,
            before.kind,
            after.kind
        );
        similar += 1;
    }

    let mut members = 0;
    let mut strangers = 0;
    for i in 0..20 {
        let n = 2 + i % 3;
        let sys = common::unbroken_system(&mut rng, n);
        let d = build_dilation(
            &sys,
            &EtaSource::Auto,
            DEFAULT_MARGIN,
            &H1Choice::Reference,
            &tol(),
        )
        .map_err(|e| e.to_string())?;
        let x =
            embed_state(&common::gaussian_vector(&mut rng, n), &d).map_err(|e| e.to_string())?;
        ensure!(
            embedding_membership(&d.hhat, &d.h, &x, &tol()).map_err(|e| e.to_string())?,
            "embedded state {i} rejected"
        );
        members += 1;
        let y = common::unit_vector(&mut rng, 2 * n);
        ensure!(
            !embedding_membership(&d.hhat, &d.h, &y, &tol()).map_err(|e| e.to_string())?,
            "generic vector {i} accepted"
        );
        strangers += 1;
    }
    Ok(format!(
        "eta-norm drift {worst_norm:.1e} over 50 runs; {similar} corpus classes similarity-invariant; \
         {members} members accepted, {strangers} non-members rejected"
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("dimer dilation closed forms", criterion_1),
        ("preparation amplitude", criterion_2),
        ("embedding identity", criterion_3),
        ("dilation constraints on random systems", criterion_4),
        ("positivity criterion on the corpus", criterion_5),
        ("scalar-sum metric and h3 obstruction", criterion_6),
        ("unitary completion", criterion_7),
        ("pipeline closed form", criterion_8),
        ("no-signaling restoration and violation", criterion_9),
        ("whole-system no-signaling", criterion_10),
        ("property suite", criterion_11),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {:>2}: PASS  {title}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {title}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
