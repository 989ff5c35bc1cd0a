#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use stabcert_core::sampling::NormalSource;
use stabcert_core::LinearSystem;

/// Random system with `‖A‖₂ ≈ a_scale` and an `n × m` Gaussian input matrix.
pub fn random_system(src: &mut NormalSource, n: usize, m: usize, a_scale: f64) -> LinearSystem {
    let raw = DMatrix::from_fn(n, n, |_, _| src.normal());
    let norm = raw.singular_values().max();
    let a = raw * (a_scale / norm);
    let b = DMatrix::from_fn(n, m, |_, _| src.normal());
    LinearSystem::new(a, b).unwrap()
}

pub fn random_vector(src: &mut NormalSource, n: usize) -> DVector<f64> {
    src.normal_vector(n)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Random system with `1 ≤ n ≤ max_n`, `1 ≤ m ≤ n` and `‖A‖₂ ∈ [0.5, 2]`.
pub fn random_case(src: &mut NormalSource, max_n: usize) -> LinearSystem {
    let n = 1 + (src.uniform(0.0, max_n as f64) as usize).min(max_n - 1);
    random_case_n(src, n)
}

pub fn random_case_n(src: &mut NormalSource, n: usize) -> LinearSystem {
    let m = 1 + (src.uniform(0.0, n as f64) as usize).min(n - 1);
    let scale = src.uniform(0.5, 2.0);
    random_system(src, n, m, scale)
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(src: &mut NormalSource, n: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n, n, |_, _| src.normal());
    raw.qr().q()
}

/// System with a Kalman decomposition of known rank `r` hidden behind a random
/// orthogonal change of basis; returns it with the uncontrollable block `A22`.
pub fn system_with_rank(
    src: &mut NormalSource,
    n: usize,
    m: usize,
    r: usize,
) -> (LinearSystem, DMatrix<f64>) {
    let mut a = DMatrix::from_fn(n, n, |_, _| src.normal() / (n as f64).sqrt());
    for i in r..n {
        for j in 0..r {
            a[(i, j)] = 0.0;
        }
    }
    let mut b = DMatrix::zeros(n, m);
    for i in 0..r {
        for j in 0..m {
            b[(i, j)] = src.normal();
        }
    }
    let a22 = a.view((r, r), (n - r, n - r)).into_owned();
    let q = random_orthogonal(src, n);
    let sys = LinearSystem::new(&q * a * q.transpose(), &q * b).unwrap();
    (sys, a22)
}

pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues.iter().all(|&l| l >= -tol)
}
