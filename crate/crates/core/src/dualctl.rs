//! Minimal-norm control into a ball, through the dual problem.
//!
//! Among all controls steering `y0` into the closed ball of radius `α‖y0‖` at
//! time `T`, the one of least L² norm is `ū(t) = -Bᵀ S(T-t)ᵀ ψ̄` where `ψ̄`
//! minimizes
//!
//! ```text
//! J(ψ) = ½⟨G_T ψ, ψ⟩ - ⟨ψ, S(T) y0⟩ + α‖y0‖ ‖ψ‖ .
//! ```
//!
//! Writing `ψ̄ = r̄ σ̄` with `‖σ̄‖ = 1`, stationarity reads
//! `(r̄ G_T + α‖y0‖ I) σ̄ = S(T) y0`, so `r̄` is the root of the decreasing map
//! `r ↦ ‖(r G_T + α‖y0‖ I)⁻¹ S(T) y0‖ - 1`. The minimal norm is
//! `μ = ‖G_T^{1/2} ψ̄‖` and the optimal cost is `½μ² = -J(ψ̄)`.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gramian::Gramian;
use crate::model::{LinearSystem, KALMAN_REL_TOL};

/// Default number of control samples.
pub const DEFAULT_GRID: usize = 512;
/// Relative tolerance of the bisection on `r̄`.
pub const BISECTION_RTOL: f64 = 1e-12;

/// Optimal control data for one `(y0, α, T)`.
#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub y0: DVector<f64>,
    pub alpha: f64,
    pub horizon: f64,
    /// Dual minimizer; zero when no control is needed.
    pub psi_bar: DVector<f64>,
    pub r_bar: f64,
    /// `None` when `psi_bar = 0`.
    pub sigma_bar: Option<DVector<f64>>,
    /// `μ_{y0,α}^T`, the L² norm of the optimal control.
    pub mu: f64,
    /// Optimal cost `-J(ψ̄)`.
    pub s_value: f64,
    /// Uniform sample times `t_i = i T / grid`, `i = 0..=grid`.
    pub times: Vec<f64>,
    /// Row `i` holds `ū(t_i)`.
    pub control: DMatrix<f64>,
    /// Trapezoidal L² norm of the sampled control.
    pub control_l2: f64,
    /// `y(T; y0, ū)`.
    pub terminal_state: DVector<f64>,
}

/// Result of minimizing `J` along a ray `r ↦ J(rσ)`, `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radial {
    /// Finite infimum, attained at `r` (`r = 0` when the infimum is 0).
    Min { value: f64, r: f64 },
    /// `J → -∞` along the ray.
    NegInfinity,
}

/// The dual functional for fixed `(y0, α)` with `S(T) y0` precomputed.
pub struct DualProblem<'a> {
    sys: &'a LinearSystem,
    g: &'a Gramian,
    y0: DVector<f64>,
    alpha: f64,
    target: DVector<f64>,
    radius: f64,
    semigroup: DMatrix<f64>,
}

impl<'a> DualProblem<'a> {
    pub fn new(
        sys: &'a LinearSystem,
        g: &'a Gramian,
        y0: &DVector<f64>,
        alpha: f64,
    ) -> Result<Self> {
        if y0.len() != sys.n() || g.n() != sys.n() {
            return Err(Error::invalid(format!(
                "dimension mismatch: system n={}, gramian n={}, y0 len={}",
                sys.n(),
                g.n(),
                y0.len()
            )));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::invalid(format!("alpha must be >= 0, got {alpha}")));
        }
        if y0.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("y0 must be finite"));
        }
        let semigroup = sys.semigroup(g.horizon())?;
        let target = &semigroup * y0;
        Ok(DualProblem {
            sys,
            g,
            y0: y0.clone(),
            alpha,
            target,
            radius: alpha * y0.norm(),
            semigroup,
        })
    }

    /// `S(T) y0`.
    pub fn free_terminal_state(&self) -> &DVector<f64> {
        &self.target
    }

    /// `J(ψ) = ½⟨Gψ,ψ⟩ - ⟨ψ, S(T)y0⟩ + α‖y0‖‖ψ‖`.
    pub fn j(&self, psi: &DVector<f64>) -> f64 {
        0.5 * self.g.quadratic_form(psi) - psi.dot(&self.target) + self.radius * psi.norm()
    }

    /// Closed-form `inf_{r>0} J(rσ)` for a unit `σ`.
    pub fn radial_profile(&self, sigma: &DVector<f64>) -> Result<Radial> {
        let norm = sigma.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("sigma must be a unit vector, norm {norm}")));
        }
        let a = 0.5 * self.g.quadratic_form(sigma);
        let b = sigma.dot(&self.target) - self.radius;
        if b <= 0.0 {
            return Ok(Radial::Min { value: 0.0, r: 0.0 });
        }
        if a <= 0.5 * self.g.kernel_threshold(KALMAN_REL_TOL) {
            return Ok(Radial::NegInfinity);
        }
        Ok(Radial::Min {
            value: -b * b / (4.0 * a),
            r: b / (2.0 * a),
        })
    }

    /// `r ↦ ‖(r G + α‖y0‖ I)⁻¹ S(T) y0‖`, evaluated in the eigenbasis of `G`.
    pub fn stationarity_map(&self, r: f64) -> f64 {
        let coords = self.g.eigenvectors().transpose() * &self.target;
        let s: f64 = coords
            .iter()
            .zip(self.g.eigenvalues())
            .map(|(c, l)| {
                let d = r * l + self.radius;
                c * c / (d * d)
            })
            .sum();
        libm::sqrt(s)
    }

    fn kernel_component(&self) -> DVector<f64> {
        let kernel = self.g.kernel_basis(KALMAN_REL_TOL);
        &kernel * (kernel.transpose() * &self.target)
    }

    /// Dual minimizer `ψ̄`, with `r̄` and `σ̄` when it is nonzero.
    pub fn minimizer(&self) -> Result<(DVector<f64>, f64, Option<DVector<f64>>)> {
        let n = self.sys.n();
        let target_norm = self.target.norm();
        if target_norm <= self.radius || target_norm == 0.0 {
            return Ok((DVector::zeros(n), 0.0, None));
        }
        let blocked = self.kernel_component();
        if self.alpha == 0.0 {
            if blocked.norm() > 1e-8 * target_norm {
                return Err(Error::Infeasible {
                    reason: "S(T) y0 is not in the range of the Gramian".into(),
                    direction: (&blocked / blocked.norm()).iter().copied().collect(),
                });
            }
            let psi = self.g.pinv(KALMAN_REL_TOL) * &self.target;
            let r = psi.norm();
            let sigma = if r > 0.0 { Some(&psi / r) } else { None };
            return Ok((psi, r, sigma));
        }
        if blocked.norm() >= self.radius * (1.0 - 1e-12) {
            return Err(Error::Infeasible {
                reason: format!(
                    "uncontrollable part of S(T) y0 has norm {} >= alpha |y0| = {}",
                    blocked.norm(),
                    self.radius
                ),
                direction: (&blocked / blocked.norm()).iter().copied().collect(),
            });
        }

        // Bracket the root of the decreasing map, then bisect.
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut grow = 0;
        while self.stationarity_map(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            grow += 1;
            if grow > 2000 {
                return Err(Error::Numerical("could not bracket the dual radius".into()));
            }
        }
        for _ in 0..2000 {
            if hi - lo <= BISECTION_RTOL * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.stationarity_map(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);

        let v = self.g.eigenvectors();
        let coords = v.transpose() * &self.target;
        let scaled = DVector::from_iterator(
            n,
            coords
                .iter()
                .zip(self.g.eigenvalues())
                .map(|(c, l)| c / (r * l + self.radius)),
        );
        let sigma = v * scaled;
        let sigma = &sigma / sigma.norm();
        Ok((&sigma * r, r, Some(sigma)))
    }

    /// Solves for the optimal control sampled on `grid + 1` uniform times.
    pub fn solve(&self, grid: usize) -> Result<MinNormSolution> {
        if grid == 0 {
            return Err(Error::invalid("grid must be positive"));
        }
        let (psi_bar, r_bar, sigma_bar) = self.minimizer()?;
        let horizon = self.g.horizon();
        let mu = self.g.sqrt_norm(&psi_bar);
        let s_value = -self.j(&psi_bar);

        // ū(t_i) = -Bᵀ S(T - t_i)ᵀ ψ̄, stepping the adjoint backwards from T.
        let h = horizon / grid as f64;
        let step_t = self.sys.semigroup(h)?.transpose();
        let bt = self.sys.b().transpose();
        let m = self.sys.m();
        let mut control = DMatrix::zeros(grid + 1, m);
        let mut adjoint = psi_bar.clone();
        for i in (0..=grid).rev() {
            let u = -(&bt * &adjoint);
            control.set_row(i, &u.transpose());
            if i > 0 {
                adjoint = &step_t * adjoint;
            }
        }
        let times: Vec<f64> = (0..=grid).map(|i| i as f64 * h).collect();
        let control_l2 = trapezoid_l2(&control, h);
        let terminal_state = &self.target - self.g.matrix() * &psi_bar;

        Ok(MinNormSolution {
            y0: self.y0.clone(),
            alpha: self.alpha,
            horizon,
            psi_bar,
            r_bar,
            sigma_bar,
            mu,
            s_value,
            times,
            control,
            control_l2,
            terminal_state,
        })
    }

    pub fn semigroup(&self) -> &DMatrix<f64> {
        &self.semigroup
    }
}

/// Trapezoidal L² norm of uniformly sampled rows with spacing `h`.
pub fn trapezoid_l2(samples: &DMatrix<f64>, h: f64) -> f64 {
    let rows = samples.nrows();
    let mut acc = 0.0;
    for i in 0..rows {
        let w = if i == 0 || i + 1 == rows { 0.5 } else { 1.0 };
        acc += w * samples.row(i).norm_squared();
    }
    libm::sqrt(acc * h)
}

/// Minimal-norm control steering `y0` into the ball of radius `α‖y0‖` at the
/// Gramian's horizon.
pub fn solve_min_norm(
    sys: &LinearSystem,
    g: &Gramian,
    y0: &DVector<f64>,
    alpha: f64,
    grid: usize,
) -> Result<MinNormSolution> {
    DualProblem::new(sys, g, y0, alpha)?.solve(grid)
}

pub fn evaluate_j(
    sys: &LinearSystem,
    g: &Gramian,
    y0: &DVector<f64>,
    alpha: f64,
    psi: &DVector<f64>,
) -> Result<f64> {
    Ok(DualProblem::new(sys, g, y0, alpha)?.j(psi))
}

pub fn radial_profile(
    sys: &LinearSystem,
    g: &Gramian,
    y0: &DVector<f64>,
    alpha: f64,
    sigma: &DVector<f64>,
) -> Result<Radial> {
    DualProblem::new(sys, g, y0, alpha)?.radial_profile(sigma)
}
