//! Dense kernels shared by the analysis modules: the matrix exponential,
//! sorted symmetric eigendecompositions and a few norms.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};

// Diagonal Padé coefficients b_0..b_m for m = 3, 5, 7, 9, 13.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm thresholds below which the degree-m approximant is accurate to unit roundoff.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

/// Matrix 1-norm (maximum absolute column sum).
pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant
/// of degree 3 to 13, selected from the 1-norm of the argument.
///
/// The input must be square with finite entries.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let norm = norm1(a);
    if norm == 0.0 {
        return eye;
    }

    let low: [(f64, &[f64]); 4] = [
        (THETA3, &PADE3),
        (THETA5, &PADE5),
        (THETA7, &PADE7),
        (THETA9, &PADE9),
    ];
    for (theta, coeffs) in low {
        if norm <= theta {
            return pade_low(a, coeffs, &eye);
        }
    }

    let s = if norm > THETA13 {
        libm::ceil(libm::log2(norm / THETA13)).max(0.0) as i32
    } else {
        0
    };
    let scaled = a * libm::exp2(-(s as f64));
    let mut r = pade13(&scaled, &eye);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_solve(u: DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
    let p = &v + &u;
    let q = v - u;
    // q is well conditioned for norms under the theta thresholds.
    q.lu().solve(&p).expect("Padé denominator is nonsingular")
}

fn pade_low(a: &DMatrix<f64>, b: &[f64], eye: &DMatrix<f64>) -> DMatrix<f64> {
    let a2 = a * a;
    let mut power = eye.clone();
    let mut u = eye * b[1];
    let mut v = eye * b[0];
    let mut k = 2;
    while k < b.len() {
        power = &power * &a2;
        v += &power * b[k];
        if k + 1 < b.len() {
            u += &power * b[k + 1];
        }
        k += 2;
    }
    pade_solve(a * u, v)
}

fn pade13(a: &DMatrix<f64>, eye: &DMatrix<f64>) -> DMatrix<f64> {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a * (&a6 * inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + eye * b[1]);
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + eye * b[0];
    pade_solve(u, v)
}

/// Returns `(m + mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// nonincreasing order; column `i` of the returned matrix pairs with value `i`.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Largest singular value.
pub fn norm2(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Largest singular value with its right singular vector.
pub fn top_right_singular(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let (values, vectors) = sym_eigen(&(m.transpose() * m));
    (libm::sqrt(values[0].max(0.0)), vectors.column(0).into_owned())
}

/// Eigenvalues of a general real matrix as `(re, im)` pairs.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect())
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?
        .into_iter()
        .map(|(re, _)| re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub(crate) fn normalized(v: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v.clone()
    }
}
