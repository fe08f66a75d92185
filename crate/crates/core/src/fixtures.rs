//! Reference systems: the two-level dimer, the H3 witness and a small
//! classification corpus.

use crate::numkernel::{
    block2, diag_real, from_real_rows, from_rows, identity, kron, pauli_x, pauli_y, pauli_z, re,
    ComplexMatrix, I,
};
use crate::ptcore::PtPair;
use num_complex::Complex64;

/// `[[E0 + i s sin a, s], [s, E0 - i s sin a]]`.
pub fn dimer(alpha: f64, s: f64, e0: f64) -> ComplexMatrix {
    from_rows(&[
        &[re(e0) + I * (s * alpha.sin()), re(s)],
        &[re(s), re(e0) - I * (s * alpha.sin())],
    ])
}

/// `(alpha, s, E0)` when `h` has the dimer form with `s > 0` and `|alpha| < pi/2`.
pub fn dimer_parameters(h: &ComplexMatrix, eq_tol: f64) -> Option<(f64, f64, f64)> {
    if h.nrows() != 2 || h.ncols() != 2 {
        return None;
    }
    let s = h[(0, 1)].re;
    let e0 = h[(0, 0)].re;
    if s.is_nan() || s <= 0.0 {
        return None;
    }
    let sin = h[(0, 0)].im / s;
    if sin.is_nan() || sin.abs() >= 1.0 {
        return None;
    }
    let alpha = sin.asin();
    let bound = eq_tol * h.norm().max(1.0);
    ((dimer(alpha, s, e0) - h).norm() <= bound).then_some((alpha, s, e0))
}

/// Parity `sigma_x` with trivial time reversal, the pair the dimer respects.
pub fn dimer_pt() -> PtPair {
    PtPair::from_pt_matrix(&pauli_x(), &Default::default()).expect("sigma_x is a valid PT matrix")
}

/// `(2/cos^2 a) [[1, -i sin a], [i sin a, 1]]`.
pub fn dimer_eta(alpha: f64) -> ComplexMatrix {
    let (s, c) = alpha.sin_cos();
    from_rows(&[&[re(1.0), -I * s], &[I * s, re(1.0)]]).scale(2.0 / (c * c))
}

/// `(1/cos a) [[1, -i sin a], [i sin a, 1]]`.
pub fn dimer_tau(alpha: f64) -> ComplexMatrix {
    let (s, c) = alpha.sin_cos();
    from_rows(&[&[re(1.0), -I * s], &[I * s, re(1.0)]]).unscale(c)
}

/// `H1 = H4 = [[E0, s cos^2 a], [s cos^2 a, E0]]`.
pub fn dimer_h1(alpha: f64, s: f64, e0: f64) -> ComplexMatrix {
    let c2 = alpha.cos().powi(2);
    from_real_rows(&[&[e0, s * c2], &[s * c2, e0]])
}

/// `H2 = diag(i s sin a cos a, -i s sin a cos a)`.
pub fn dimer_h2(alpha: f64, s: f64) -> ComplexMatrix {
    let w = s * alpha.sin() * alpha.cos();
    from_rows(&[&[I * w, re(0.0)], &[re(0.0), -I * w]])
}

/// `I2 (x) (E0 I2 + s cos^2 a sigma_x) - s cos a sin a sigma_y (x) sigma_z`.
pub fn dimer_hhat_tensor(alpha: f64, s: f64, e0: f64) -> ComplexMatrix {
    let local = identity(2).scale(e0) + pauli_x().scale(s * alpha.cos().powi(2));
    kron(&identity(2), &local) - kron(&pauli_y(), &pauli_z()).scale(s * alpha.cos() * alpha.sin())
}

/// The tensor form with the coupling term left unscaled by `s`.
pub fn dimer_hhat_tensor_unscaled(alpha: f64, s: f64, e0: f64) -> ComplexMatrix {
    let local = identity(2).scale(e0) + pauli_x().scale(s * alpha.cos().powi(2));
    kron(&identity(2), &local) - kron(&pauli_y(), &pauli_z()).scale(alpha.cos() * alpha.sin())
}

/// Orthogonal projection onto the graph subspace of `dimer_tau(alpha)`.
pub fn dimer_projection(alpha: f64) -> ComplexMatrix {
    let (s, c) = alpha.sin_cos();
    let z = re(0.0);
    from_rows(&[
        &[re(1.0), I * s, re(c), z],
        &[-I * s, re(1.0), z, re(c)],
        &[re(c), z, re(1.0), -I * s],
        &[z, re(c), I * s, re(1.0)],
    ])
    .scale(0.5)
}

/// The closed-form preparation unitary for the dimer (one admissible choice).
pub fn dimer_prep_unitary(alpha: f64) -> ComplexMatrix {
    let e = Complex64::from_polar(1.0, alpha);
    let f = e.conj();
    let o = re(1.0);
    from_rows(&[
        &[e, -o, o, e],
        &[-o, f, f, o],
        &[o, f, -f, o],
        &[e, o, o, -e],
    ])
    .scale(0.5)
}

/// Upper-triangular eigenframe of `h3`.
pub fn q3() -> ComplexMatrix {
    from_real_rows(&[&[1.0, 1.0, 1.0], &[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]])
}

/// `Q diag(1,2,3) Q^-1`: unbroken, yet no metric satisfies `eta + eta^-1 = tI`.
pub fn h3() -> ComplexMatrix {
    from_real_rows(&[&[1.0, 1.0, 1.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 3.0]])
}

/// `h3` extended by a decoupled level at `alpha0`.
pub fn h3_extended(alpha0: f64) -> ComplexMatrix {
    let z = ComplexMatrix::zeros(3, 1);
    block2(&h3(), &z, &z.transpose(), &diag_real(&[alpha0]))
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub h: ComplexMatrix,
    pub pt: PtPair,
    pub unbroken: bool,
}

fn entry(name: &'static str, h: ComplexMatrix, pt: PtPair, unbroken: bool) -> CorpusEntry {
    CorpusEntry {
        name,
        h,
        pt,
        unbroken,
    }
}

/// Ten unbroken, five broken-diagonalizable and five defective systems.
pub fn positivity_corpus() -> Vec<CorpusEntry> {
    let conj2 = PtPair::conjugation(2);
    let conj3 = PtPair::conjugation(3);
    let conj4 = PtPair::conjugation(4);
    let sx = dimer_pt();
    let pi = std::f64::consts::PI;
    vec![
        entry("sigma_z", pauli_z(), conj2.clone(), true),
        entry("h3", h3(), conj3.clone(), true),
        entry("dimer_pi6", dimer(pi / 6.0, 1.0, 0.0), sx.clone(), true),
        entry("dimer_pi4_s2", dimer(pi / 4.0, 2.0, 0.0), sx.clone(), true),
        entry(
            "dimer_pi3_s2_e1",
            dimer(pi / 3.0, 2.0, 1.0),
            sx.clone(),
            true,
        ),
        entry("diag_1_3", diag_real(&[1.0, 3.0]), conj2.clone(), true),
        entry(
            "real_nonnormal_2",
            from_real_rows(&[&[1.0, 2.0], &[0.5, -1.0]]),
            conj2.clone(),
            true,
        ),
        entry(
            "real_symmetric_3",
            from_real_rows(&[&[2.0, 1.0, 0.0], &[1.0, 0.0, -1.0], &[0.0, -1.0, 1.0]]),
            conj3.clone(),
            true,
        ),
        entry("h3_plus_10", h3_extended(10.0), conj4.clone(), true),
        entry(
            "degenerate_diag",
            diag_real(&[1.0, 1.0, 2.0]),
            conj3.clone(),
            true,
        ),
        entry(
            "rotation",
            from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]),
            conj2.clone(),
            false,
        ),
        entry(
            "spiral",
            from_real_rows(&[&[1.0, -2.0], &[2.0, 1.0]]),
            conj2.clone(),
            false,
        ),
        entry(
            "dimer_broken",
            from_rows(&[&[I * 2.0, re(1.0)], &[re(1.0), -I * 2.0]]),
            sx.clone(),
            false,
        ),
        entry(
            "mixed_3",
            from_real_rows(&[&[0.0, -1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 2.0]]),
            conj3.clone(),
            false,
        ),
        entry(
            "companion_4",
            from_real_rows(&[
                &[0.0, 0.0, 0.0, -5.0],
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, -2.0],
                &[0.0, 0.0, 1.0, 0.0],
            ]),
            conj4.clone(),
            false,
        ),
        entry(
            "jordan_2",
            from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]),
            conj2.clone(),
            false,
        ),
        entry(
            "nilpotent_2",
            from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]),
            conj2.clone(),
            false,
        ),
        entry("dimer_exceptional", dimer(pi / 2.0, 1.0, 0.0), sx, false),
        entry(
            "jordan_3",
            from_real_rows(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 2.0]]),
            conj3.clone(),
            false,
        ),
        entry(
            "jordan_2_plus_5",
            from_real_rows(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 5.0]]),
            conj3,
            false,
        ),
    ]
}
