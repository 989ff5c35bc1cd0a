//! Linear control systems `y' = A y + B u` on Euclidean state and input spaces.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, expm, norm2, sym_eigen};

/// Default relative threshold for numerical rank decisions.
pub const KALMAN_REL_TOL: f64 = 1e-9;

/// A finite-dimensional linear control system.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    label: Option<String>,
}

impl LinearSystem {
    /// Builds a system, checking that `a` is square, `b` has as many rows as
    /// `a`, both dimensions are positive and all entries are finite.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::invalid(format!(
                "A must be a nonempty square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::invalid(format!(
                "B must be {n}xm with m >= 1, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("system matrices must have finite entries"));
        }
        Ok(LinearSystem { a, b, label: None })
    }

    /// Builds a system from row-major data of lengths `n*n` and `n*m`.
    pub fn from_row_major(n: usize, m: usize, a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::invalid(format!(
                "A has {} entries, expected n*n = {}",
                a.len(),
                n * n
            )));
        }
        if b.len() != n * m {
            return Err(Error::invalid(format!(
                "B has {} entries, expected n*m = {}",
                b.len(),
                n * m
            )));
        }
        if n == 0 || m == 0 {
            return Err(Error::invalid("n and m must be positive"));
        }
        Self::new(
            DMatrix::from_row_slice(n, n, a),
            DMatrix::from_row_slice(n, m, b),
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `exp(tA)`. Negative times are allowed.
    pub fn semigroup(&self, t: f64) -> Result<DMatrix<f64>> {
        if !t.is_finite() {
            return Err(Error::invalid(format!("time must be finite, got {t}")));
        }
        Ok(expm(&(&self.a * t)))
    }

    /// `exp(tA)ᵀ`, the adjoint semigroup.
    pub fn adjoint_semigroup(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.semigroup(t)?.transpose())
    }

    /// The system with `A` replaced by `A + ωI`.
    pub fn shift(&self, omega: f64) -> LinearSystem {
        let n = self.n();
        let mut a = self.a.clone();
        for i in 0..n {
            a[(i, i)] += omega;
        }
        LinearSystem {
            a,
            b: self.b.clone(),
            label: self.label.clone(),
        }
    }

    /// `[B, AB, ..., A^{n-1}B]`. Only meaningful for small, well-scaled systems;
    /// rank decisions go through [`LinearSystem::kalman_decompose`].
    pub fn kalman_matrix(&self) -> DMatrix<f64> {
        let (n, m) = (self.n(), self.m());
        let mut k = DMatrix::zeros(n, n * m);
        let mut block = self.b.clone();
        for j in 0..n {
            k.view_mut((0, j * m), (n, m)).copy_from(&block);
            block = &self.a * block;
        }
        k
    }

    pub fn kalman_decompose(&self) -> Result<KalmanDecomposition> {
        self.kalman_decompose_with(KALMAN_REL_TOL)
    }

    /// Orthogonal controllability staircase.
    ///
    /// The controllable subspace is grown as an orthonormal Krylov basis of
    /// `(A, B)`; each new block is orthogonalized twice against the basis and
    /// its singular directions are kept above `rel_tol * ‖A‖` (`rel_tol * ‖B‖`
    /// for the first block). This spans the range of the Kalman matrix without
    /// forming powers of `A`.
    pub fn kalman_decompose_with(&self, rel_tol: f64) -> Result<KalmanDecomposition> {
        let n = self.n();
        let a_norm = norm2(&self.a);
        let b_norm = norm2(&self.b);

        let mut cols: Vec<DVector<f64>> = Vec::new();
        let mut fresh = significant_directions(&self.b, rel_tol * b_norm);
        cols.extend(fresh.iter().cloned());

        while !fresh.is_empty() && cols.len() < n {
            let basis = DMatrix::from_columns(&cols);
            let mut next = Vec::new();
            let mut w = DMatrix::from_columns(&fresh);
            w = &self.a * w;
            for _ in 0..2 {
                let proj = basis.transpose() * &w;
                w -= &basis * proj;
            }
            for d in significant_directions(&w, rel_tol * a_norm) {
                if cols.len() + next.len() < n {
                    next.push(d);
                }
            }
            cols.extend(next.iter().cloned());
            fresh = next;
        }

        let rank = cols.len();
        let mut basis = DMatrix::zeros(n, n);
        for (j, c) in cols.iter().enumerate() {
            basis.set_column(j, c);
        }
        let mut uncontrollable_spectrum = Vec::new();
        if rank < n {
            let projector = if rank == 0 {
                DMatrix::identity(n, n)
            } else {
                let q1 = DMatrix::from_columns(&cols);
                DMatrix::identity(n, n) - &q1 * q1.transpose()
            };
            let (_, vecs) = sym_eigen(&projector);
            let q2 = vecs.columns(0, n - rank).into_owned();
            basis.view_mut((0, rank), (n, n - rank)).copy_from(&q2);
            let a22 = q2.transpose() * &self.a * &q2;
            uncontrollable_spectrum = eigenvalues(&a22)?;
        }
        Ok(KalmanDecomposition {
            rank,
            basis,
            uncontrollable_spectrum,
        })
    }
}

/// Orthonormal directions of the range of `w` whose singular values exceed
/// `threshold`. Right singular vectors come from the symmetric eigenproblem of
/// `wᵀw`; the left ones are `w v / ‖w v‖`, orthonormalized twice.
fn significant_directions(w: &DMatrix<f64>, threshold: f64) -> Vec<DVector<f64>> {
    if w.ncols() == 0 {
        return Vec::new();
    }
    let (_, v) = sym_eigen(&(w.transpose() * w));
    let mut out: Vec<DVector<f64>> = Vec::new();
    for j in 0..v.ncols() {
        let mut u = w * v.column(j);
        if !(u.norm() > threshold) {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&u);
                u -= q * c;
            }
        }
        let norm = u.norm();
        if norm > threshold {
            out.push(u / norm);
        }
    }
    out
}

/// Split of the state space into controllable and uncontrollable parts.
#[derive(Debug, Clone)]
pub struct KalmanDecomposition {
    /// Dimension of the controllable subspace.
    pub rank: usize,
    /// Orthogonal matrix; its first `rank` columns span the controllable subspace.
    pub basis: DMatrix<f64>,
    /// Eigenvalues `(re, im)` of `A` compressed to the orthogonal complement.
    pub uncontrollable_spectrum: Vec<(f64, f64)>,
}

impl KalmanDecomposition {
    pub fn is_controllable(&self) -> bool {
        self.uncontrollable_spectrum.is_empty() && self.rank == self.basis.nrows()
    }
}

/// Scalar integrator `y' = u`.
pub fn integrator() -> LinearSystem {
    LinearSystem::from_row_major(1, 1, &[0.0], &[1.0])
        .expect("valid")
        .with_label("integrator")
}

/// Harmonic oscillator `A = [[0,1],[-1,0]]` actuated on the first coordinate.
pub fn rotation() -> LinearSystem {
    LinearSystem::from_row_major(2, 1, &[0.0, 1.0, -1.0, 0.0], &[1.0, 0.0])
        .expect("valid")
        .with_label("rotation")
}

/// Unstable scalar system `y' = y + u`.
pub fn scalar_unstable() -> LinearSystem {
    LinearSystem::from_row_major(1, 1, &[1.0], &[1.0])
        .expect("valid")
        .with_label("scalar-unstable")
}

/// Eigenvalues of the Dirichlet 3-point Laplacian on `grid_points` interior
/// nodes of (0,1), in increasing order of magnitude.
pub fn dirichlet_laplacian_eigenvalues(grid_points: usize) -> Vec<f64> {
    let h = 1.0 / (grid_points as f64 + 1.0);
    (1..=grid_points)
        .map(|k| {
            let s = libm::sin(k as f64 * PI * h / 2.0);
            -4.0 * s * s / (h * h)
        })
        .collect()
}

/// Finite-difference analog on (0,1) of a wave equation controlled on an
/// interval and driven by an uncontrolled heat equation:
///
/// ```text
/// z_tt = Δz + w + χ u,   w_t = Δw,   Dirichlet boundary conditions.
/// ```
///
/// The state is `(z, z_t, w)` on `grid_points` interior nodes with the 3-point
/// Laplacian `Δ = -L`. The energy geometry (discrete H¹₀ for `z`, grid L² for
/// `z_t`, `w` and the control) is absorbed by the congruence
/// `ỹ = ((hL)^{1/2} z, √h z_t, √h w)`, `ũ = √h u`, which gives
///
/// ```text
/// Ã = [[0, L^{1/2}, 0], [-L^{1/2}, 0, I], [0, 0, -L]],   B̃ = (0, diag χ, 0)
/// ```
///
/// so every downstream computation uses the plain Euclidean product. The
/// control block of `B̃` has one column per node; columns of nodes outside
/// `(control_lo, control_hi)` are zero.
pub fn wave_heat(grid_points: usize, control_lo: f64, control_hi: f64) -> Result<LinearSystem> {
    if grid_points < 3 {
        return Err(Error::invalid(format!(
            "grid_points must be >= 3, got {grid_points}"
        )));
    }
    if !(0.0..=1.0).contains(&control_lo)
        || !(0.0..=1.0).contains(&control_hi)
        || control_lo >= control_hi
    {
        return Err(Error::invalid(format!(
            "control interval ({control_lo}, {control_hi}) must satisfy 0 <= lo < hi <= 1"
        )));
    }
    let np = grid_points;
    let h = 1.0 / (np as f64 + 1.0);
    let chi: Vec<f64> = (1..=np)
        .map(|j| {
            let x = j as f64 * h;
            if x > control_lo && x < control_hi {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    if chi.iter().all(|&c| c == 0.0) {
        return Err(Error::invalid(format!(
            "no grid node lies in ({control_lo}, {control_hi})"
        )));
    }

    // Sine basis diagonalizes L exactly: L v_k = λ_k v_k.
    let lambdas: Vec<f64> = dirichlet_laplacian_eigenvalues(np)
        .into_iter()
        .map(|l| -l)
        .collect();
    let norm = libm::sqrt(2.0 * h);
    let modes = DMatrix::from_fn(np, np, |j, k| {
        norm * libm::sin((k + 1) as f64 * (j + 1) as f64 * PI * h)
    });
    let root = DMatrix::from_diagonal(&DVector::from_iterator(
        np,
        lambdas.iter().map(|l| libm::sqrt(*l)),
    ));
    let sqrt_l = crate::linalg::symmetrize(&(&modes * root * modes.transpose()));
    let mut lap = DMatrix::zeros(np, np);
    for j in 0..np {
        lap[(j, j)] = -2.0 / (h * h);
        if j + 1 < np {
            lap[(j, j + 1)] = 1.0 / (h * h);
            lap[(j + 1, j)] = 1.0 / (h * h);
        }
    }

    let n = 3 * np;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, np), (np, np)).copy_from(&sqrt_l);
    a.view_mut((np, 0), (np, np)).copy_from(&(-&sqrt_l));
    a.view_mut((np, 2 * np), (np, np))
        .copy_from(&DMatrix::identity(np, np));
    a.view_mut((2 * np, 2 * np), (np, np)).copy_from(&lap);

    let mut b = DMatrix::zeros(n, np);
    for (j, c) in chi.iter().enumerate() {
        b[(np + j, j)] = *c;
    }
    Ok(LinearSystem::new(a, b)?.with_label(format!(
        "wave-heat n={np} control=({control_lo},{control_hi})"
    )))
}

/// Looks up a built-in system by name: `integrator`, `rotation`,
/// `scalar-unstable`, or `wave-heat` (20 nodes, control on (0.3, 0.7)).
pub fn builtin(name: &str) -> Option<LinearSystem> {
    match name {
        "integrator" => Some(integrator()),
        "rotation" => Some(rotation()),
        "scalar-unstable" => Some(scalar_unstable()),
        "wave-heat" => wave_heat(20, 0.3, 0.7).ok(),
        _ => None,
    }
}
