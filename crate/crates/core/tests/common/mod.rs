#![allow(dead_code)]

use num_complex::Complex64;
use ptsim::numkernel::{diag_real, identity, inverse};
use ptsim::ptcore::{construct_pt_from_eigenframe, PtPair, PtSystem};
use ptsim::{ComplexMatrix, ComplexVector, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gauss(rng))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    ComplexVector::from_fn(n, |_, _| gauss(rng))
}

pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    let v = gaussian_vector(rng, n);
    let norm = v.norm();
    v.unscale(norm)
}

pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let a = gaussian_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

/// `I + 0.4 G`: invertible with moderate condition number.
pub fn frame(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    identity(n) + gaussian_matrix(rng, n, n).scale(0.4)
}

/// Distinct real levels separated by at least 0.5.
pub fn levels(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut x = rng.random_range(-2.0..0.0);
    (0..n)
        .map(|_| {
            x += rng.random_range(0.5..1.5);
            x
        })
        .collect()
}

/// `Psi D Psi^-1` with `PT = Psi conj(Psi^-1)`, which it commutes with.
pub fn unbroken_system(rng: &mut ChaCha8Rng, n: usize) -> PtSystem {
    let tol = Tolerances::default();
    let psi = frame(rng, n);
    let d = diag_real(&levels(rng, n));
    let h = &psi * d * inverse(&psi).unwrap();
    let pt = construct_pt_from_eigenframe(&psi, &identity(n), &tol).unwrap();
    let pair = PtPair::from_pt_matrix(&pt, &tol).unwrap();
    PtSystem::new(h, pair, &tol).unwrap()
}

/// `k` orthonormal columns in `C^dim`.
pub fn orthonormal(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> Vec<ComplexVector> {
    let q = gaussian_matrix(rng, dim, k).qr().q();
    (0..k).map(|j| q.column(j).into_owned()).collect()
}

pub fn evolution(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    ptsim::numkernel::matrix_exp(&h.map(|z| z * Complex64::new(0.0, -t))).unwrap()
}
