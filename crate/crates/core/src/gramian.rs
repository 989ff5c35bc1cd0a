//! Controllability Gramians.
//!
//! `G_T = ∫₀ᵀ S(T-t) B Bᵀ S(T-t)ᵀ dt`, so that `⟨G_T ψ, ψ⟩` equals the squared
//! L² norm of the adjoint output `t ↦ Bᵀ S(T-t)ᵀ ψ`. The primary route is a
//! block matrix exponential; a Gauss–Legendre route is kept for
//! cross-validation.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{expm, norm1, sym_eigen, symmetrize};
use crate::model::LinearSystem;
use crate::quadrature;

/// Relative tolerance of the adaptive quadrature behind [`komornik_gramian`].
pub const KOMORNIK_RTOL: f64 = 1e-10;

/// A symmetric positive semidefinite Gramian with its spectral data.
#[derive(Debug, Clone)]
pub struct Gramian {
    horizon: f64,
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    sqrt: DMatrix<f64>,
}

impl Gramian {
    /// Symmetrizes `matrix`, diagonalizes it and clamps negative eigenvalues
    /// (roundoff on a PSD matrix) to zero.
    pub fn from_matrix(horizon: f64, matrix: DMatrix<f64>) -> Self {
        let matrix = symmetrize(&matrix);
        let (mut eigenvalues, eigenvectors) = sym_eigen(&matrix);
        for l in eigenvalues.iter_mut() {
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        let n = matrix.nrows();
        let root = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            eigenvalues.iter().map(|l| libm::sqrt(*l)),
        ));
        let sqrt = symmetrize(&(&eigenvectors * root * eigenvectors.transpose()));
        Gramian {
            horizon,
            matrix,
            eigenvalues,
            eigenvectors,
            sqrt,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Clamped eigenvalues, nonincreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Symmetric PSD square root.
    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.sqrt
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.n() - 1]
    }

    /// Eigenvalues at or below this are treated as zero.
    pub fn kernel_threshold(&self, rel_tol: f64) -> f64 {
        rel_tol * self.max_eigenvalue()
    }

    /// Number of eigenvalues above `rel_tol * λ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let thr = self.kernel_threshold(rel_tol);
        self.eigenvalues.iter().filter(|&&l| l > thr && l > 0.0).count()
    }

    /// Orthonormal basis (as columns) of the numerical kernel.
    pub fn kernel_basis(&self, rel_tol: f64) -> DMatrix<f64> {
        let r = self.rank(rel_tol);
        self.eigenvectors.columns(r, self.n() - r).into_owned()
    }

    /// Orthonormal basis (as columns) of the numerical range.
    pub fn range_basis(&self, rel_tol: f64) -> DMatrix<f64> {
        self.eigenvectors.columns(0, self.rank(rel_tol)).into_owned()
    }

    /// `⟨Gψ, ψ⟩`.
    pub fn quadratic_form(&self, psi: &DVector<f64>) -> f64 {
        psi.dot(&(&self.matrix * psi))
    }

    /// `‖G^{1/2} ψ‖`, evaluated in the eigenbasis.
    pub fn sqrt_norm(&self, psi: &DVector<f64>) -> f64 {
        let coords = self.eigenvectors.transpose() * psi;
        let s: f64 = coords
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, l)| l * c * c)
            .sum();
        libm::sqrt(s)
    }

    /// Pseudo-inverse square root: eigenvalues above the kernel threshold are
    /// mapped to `λ^{-1/2}`, the rest to zero.
    pub fn pinv_sqrt(&self, rel_tol: f64) -> DMatrix<f64> {
        let thr = self.kernel_threshold(rel_tol);
        let d = DVector::from_iterator(
            self.n(),
            self.eigenvalues
                .iter()
                .map(|&l| if l > thr && l > 0.0 { 1.0 / libm::sqrt(l) } else { 0.0 }),
        );
        &self.eigenvectors * DMatrix::from_diagonal(&d) * self.eigenvectors.transpose()
    }

    /// Moore–Penrose pseudo-inverse on the numerical range.
    pub fn pinv(&self, rel_tol: f64) -> DMatrix<f64> {
        let thr = self.kernel_threshold(rel_tol);
        let d = DVector::from_iterator(
            self.n(),
            self.eigenvalues
                .iter()
                .map(|&l| if l > thr && l > 0.0 { 1.0 / l } else { 0.0 }),
        );
        &self.eigenvectors * DMatrix::from_diagonal(&d) * self.eigenvectors.transpose()
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    Ok(())
}

/// Returns `(S(h), G_h)` from one block exponential of
/// `[[-A h, B Bᵀ h], [0, Aᵀ h]]`. Accurate when `‖A h‖` is moderate; callers
/// with long horizons should go through [`gramian`].
pub fn block_step(sys: &LinearSystem, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = sys.n();
    let a = sys.a();
    let bbt = sys.b() * sys.b().transpose();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(-a * h));
    m.view_mut((0, n), (n, n)).copy_from(&(bbt * h));
    m.view_mut((n, n), (n, n)).copy_from(&(a.transpose() * h));
    let e = expm(&m);
    let f12 = e.view((0, n), (n, n));
    let s = e.view((n, n), (n, n)).transpose();
    let g = &s * f12;
    (s, symmetrize(&g))
}

/// Controllability Gramian on `[0, horizon]`.
///
/// The horizon is split into `2^k` pieces with `‖A‖₁ h ≤ 1`, the block
/// exponential gives `(S(h), G_h)`, and `k` doublings
/// `G_{2t} = G_t + S(t) G_t S(t)ᵀ` assemble `G_T`. The split keeps the
/// `exp(-A h)` block from overflowing on stiff dissipative generators.
pub fn gramian(sys: &LinearSystem, horizon: f64) -> Result<Gramian> {
    let (_, g) = semigroup_and_gramian(sys, horizon)?;
    Ok(Gramian::from_matrix(horizon, g))
}

/// `(S(t), G_t)` by the same doubling scheme as [`gramian`], without the
/// spectral post-processing.
pub fn semigroup_and_gramian(
    sys: &LinearSystem,
    horizon: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_horizon(horizon)?;
    let scale = horizon * norm1(sys.a());
    let k = if scale > 1.0 {
        libm::ceil(libm::log2(scale)) as u32
    } else {
        0
    };
    let h = horizon / libm::exp2(k as f64);
    let (mut s, mut g) = block_step(sys, h);
    for _ in 0..k {
        g = symmetrize(&(&g + &s * &g * s.transpose()));
        s = &s * &s;
    }
    Ok((s, g))
}

/// Gramian by composite Gauss–Legendre quadrature of `S(s) B Bᵀ S(s)ᵀ`.
pub fn gramian_by_quadrature(
    sys: &LinearSystem,
    horizon: f64,
    panels: usize,
    order: usize,
) -> Result<Gramian> {
    check_horizon(horizon)?;
    let bbt = sys.b() * sys.b().transpose();
    let g = quadrature::composite(
        |s| {
            let e = expm(&(sys.a() * s));
            &e * &bbt * e.transpose()
        },
        0.0,
        horizon,
        panels,
        order,
    );
    Ok(Gramian::from_matrix(horizon, g))
}

/// The weight `f_λ`: `e^{-2λt}` on `[0, T]`, then a linear ramp
/// `2λ e^{-2λT} (T + 1/(2λ) - t)` down to zero at `T + 1/(2λ)`; zero beyond.
pub fn komornik_weight(t: f64, horizon: f64, lambda: f64) -> f64 {
    let end = horizon + 0.5 / lambda;
    if t < 0.0 || t > end {
        0.0
    } else if t <= horizon {
        libm::exp(-2.0 * lambda * t)
    } else {
        2.0 * lambda * libm::exp(-2.0 * lambda * horizon) * (end - t)
    }
}

/// Weighted backward Gramian
/// `C_λ = ∫₀^{T+1/(2λ)} f_λ(t) S(-t) B Bᵀ S(-t)ᵀ dt`.
///
/// Computed by adaptive Gauss–Legendre quadrature with panels split at `T`.
pub fn komornik_gramian(sys: &LinearSystem, horizon: f64, lambda: f64) -> Result<Gramian> {
    check_horizon(horizon)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    let bbt = sys.b() * sys.b().transpose();
    let end = horizon + 0.5 / lambda;
    let c = quadrature::adaptive(
        |t| {
            let e = expm(&(sys.a() * -t));
            (&e * &bbt * e.transpose()) * komornik_weight(t, horizon, lambda)
        },
        &[0.0, horizon, end],
        KOMORNIK_RTOL,
    );
    Ok(Gramian::from_matrix(horizon, c))
}
