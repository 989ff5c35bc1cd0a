//! Observability constants of a Gramian.
//!
//! With `S = S(T)` and `G = G_T`:
//!
//! * exact controllability: `C_T = λ_min(G)^{-1/2}`,
//! * null controllability: the smallest `C` with `‖Sᵀψ‖ ≤ C ‖G^{1/2}ψ‖`,
//! * weak observability: the smallest `C` with
//!   `‖Sᵀψ‖ ≤ C ‖G^{1/2}ψ‖ + α ‖ψ‖` for all `ψ`.
//!
//! Each report carries a unit witness `ψ` at which the supremum is (nearly)
//! attained, or a kernel direction when the constant is infinite.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gramian::Gramian;
use crate::linalg::{normalized, norm2, sym_eigen, top_right_singular};
use crate::model::{LinearSystem, KALMAN_REL_TOL};
use crate::sampling::{circle, fibonacci_sphere, NormalSource};

/// How a reported constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Closed form from an eigendecomposition.
    Spectral,
    /// Multi-start local maximization on the unit sphere; a lower bound that
    /// is tight whenever the global maximizer is found.
    Optimized,
    /// Brute-force sampling; a certified lower bound.
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Optimized => "optimized",
            Method::Oracle => "oracle",
        }
    }
}

/// An observability constant together with its extremal direction.
#[derive(Debug, Clone)]
pub struct ObservabilityReport {
    pub horizon: f64,
    /// Zero for the exact and null controllability constants.
    pub alpha: f64,
    /// Nonnegative; `f64::INFINITY` when no finite constant exists.
    pub value: f64,
    pub witness: DVector<f64>,
    pub method: Method,
}

impl ObservabilityReport {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `C_T = λ_min(G_T)^{-1/2}`, infinite when `λ_min ≤ 1e-9 λ_max`.
pub fn exact_controllability_constant(g: &Gramian) -> ObservabilityReport {
    let n = g.n();
    let lmin = g.min_eigenvalue();
    let witness = g.eigenvectors().column(n - 1).into_owned();
    let value = if g.max_eigenvalue() > 0.0 && lmin > KALMAN_REL_TOL * g.max_eigenvalue() {
        1.0 / libm::sqrt(lmin)
    } else {
        f64::INFINITY
    };
    ObservabilityReport {
        horizon: g.horizon(),
        alpha: 0.0,
        value,
        witness,
        method: Method::Spectral,
    }
}

/// Null-controllability constant `μ_0^T`: the square root of the top
/// eigenvalue of `G^{+/2} S Sᵀ G^{+/2}`, or infinity when `Sᵀ` does not vanish
/// on the numerical kernel of `G`.
pub fn null_controllability_constant(
    sys: &LinearSystem,
    g: &Gramian,
) -> Result<ObservabilityReport> {
    let s = sys.semigroup(g.horizon())?;
    let kernel = g.kernel_basis(KALMAN_REL_TOL);
    if kernel.ncols() > 0 {
        let (sigma, v) = top_right_singular(&(s.transpose() * &kernel));
        if sigma > KALMAN_REL_TOL * norm2(&s) {
            return Ok(ObservabilityReport {
                horizon: g.horizon(),
                alpha: 0.0,
                value: f64::INFINITY,
                witness: normalized(&(&kernel * v)),
                method: Method::Spectral,
            });
        }
    }
    let p = g.pinv_sqrt(KALMAN_REL_TOL);
    let pencil = &p * &s * s.transpose() * &p;
    let (vals, vecs) = sym_eigen(&pencil);
    let witness = normalized(&(&p * vecs.column(0)));
    Ok(ObservabilityReport {
        horizon: g.horizon(),
        alpha: 0.0,
        value: libm::sqrt(vals[0].max(0.0)),
        witness,
        method: Method::Spectral,
    })
}

/// Tuning of the multi-start maximization behind [`weak_constant_with`].
#[derive(Debug, Clone)]
pub struct WeakOptions {
    pub random_starts: usize,
    pub seed: u64,
    /// Relative eigenvalue threshold defining the numerical kernel of `G`.
    pub kernel_rel_tol: f64,
    /// Gradient-ascent iterations per start.
    pub max_iterations: usize,
    /// Newton refinements applied to the best candidates.
    pub newton_steps: usize,
}

impl Default for WeakOptions {
    fn default() -> Self {
        WeakOptions {
            random_starts: 32,
            seed: 0,
            kernel_rel_tol: KALMAN_REL_TOL,
            max_iterations: 400,
            newton_steps: 6,
        }
    }
}

/// The ratio `(‖Sᵀψ‖ - α‖ψ‖) / ‖G^{1/2}ψ‖`, which is scale invariant.
struct WeakObjective {
    sst: DMatrix<f64>,
    gram: DMatrix<f64>,
    alpha: f64,
}

impl WeakObjective {
    fn value(&self, psi: &DVector<f64>) -> f64 {
        let psi = normalized(psi);
        let p = libm::sqrt(psi.dot(&(&self.sst * &psi)).max(0.0));
        let q = libm::sqrt(psi.dot(&(&self.gram * &psi)).max(0.0));
        if q == 0.0 {
            return if p > self.alpha { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        (p - self.alpha) / q
    }

    /// Value and tangent gradient at a unit vector.
    fn value_grad(&self, psi: &DVector<f64>) -> (f64, DVector<f64>) {
        let sp = &self.sst * psi;
        let gp = &self.gram * psi;
        let p = libm::sqrt(psi.dot(&sp).max(0.0));
        let q = libm::sqrt(psi.dot(&gp).max(0.0));
        if q == 0.0 || p == 0.0 {
            return (self.value(psi), DVector::zeros(psi.len()));
        }
        let f = (p - self.alpha) / q;
        let mut grad = ((sp / p - psi * self.alpha) * q - gp * ((p - self.alpha) / q)) / (q * q);
        let radial = psi.dot(&grad);
        grad -= psi * radial;
        (f, grad)
    }

    fn ascend(&self, start: &DVector<f64>, iterations: usize) -> (f64, DVector<f64>) {
        let mut psi = normalized(start);
        let (mut f, mut g) = self.value_grad(&psi);
        if !f.is_finite() {
            return (f, psi);
        }
        let mut step = 0.1 / g.norm().max(1e-300);
        for _ in 0..iterations {
            let gn2 = g.norm_squared();
            if gn2.sqrt() <= 1e-15 * f.abs().max(1.0) {
                break;
            }
            let mut t = step;
            let mut accepted = None;
            for _ in 0..60 {
                let cand = normalized(&(&psi + &g * t));
                let fc = self.value(&cand);
                if fc >= f + 1e-4 * t * gn2 {
                    accepted = Some((cand, fc));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, fc)) = accepted else { break };
            let (_, gc) = self.value_grad(&cand);
            // Barzilai–Borwein length for the next trial step.
            let ds = &cand - &psi;
            let dg = &gc - &g;
            let curv = -ds.dot(&dg);
            step = if curv > 0.0 { ds.norm_squared() / curv } else { 2.0 * t };
            let improvement = fc - f;
            psi = cand;
            f = fc;
            g = gc;
            if improvement <= 1e-16 * f.abs().max(1e-300) {
                break;
            }
        }
        (f, psi)
    }

    /// Newton steps in local tangent coordinates with a finite-difference Hessian.
    fn refine(&self, start: &DVector<f64>, steps: usize) -> (f64, DVector<f64>) {
        let mut psi = normalized(start);
        let mut f = self.value(&psi);
        let n = psi.len();
        if n < 2 || !f.is_finite() {
            return (f, psi);
        }
        for _ in 0..steps {
            let tangent = tangent_basis(&psi);
            let k = n - 1;
            let local_grad = |x: &DVector<f64>| {
                let raw = &psi + &tangent * x;
                let r = raw.norm();
                let (_, g) = self.value_grad(&(raw / r));
                tangent.transpose() * g / r
            };
            let g0 = local_grad(&DVector::zeros(k));
            if g0.norm() == 0.0 {
                break;
            }
            let eps = 1e-5;
            let mut hess = DMatrix::zeros(k, k);
            for j in 0..k {
                let mut e = DVector::zeros(k);
                e[j] = eps;
                let col = (local_grad(&e) - local_grad(&(-&e))) / (2.0 * eps);
                hess.set_column(j, &col);
            }
            let hess = crate::linalg::symmetrize(&hess);
            let (vals, _) = sym_eigen(&hess);
            if vals[0] >= 0.0 {
                break;
            }
            let Some(dx) = hess.lu().solve(&(-&g0)) else { break };
            let cand = normalized(&(&psi + &tangent * dx));
            let fc = self.value(&cand);
            if fc > f {
                psi = cand;
                f = fc;
            } else {
                break;
            }
        }
        (f, psi)
    }
}

// Orthonormal columns spanning the complement of `psi`.
fn tangent_basis(psi: &DVector<f64>) -> DMatrix<f64> {
    let n = psi.len();
    let projector = DMatrix::identity(n, n) - psi * psi.transpose();
    let (_, vecs) = sym_eigen(&projector);
    vecs.columns(0, n - 1).into_owned()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

enum Trivial {
    Zero(DVector<f64>),
    Infinite(DVector<f64>),
}

// Cases decided without optimization: α ≥ ‖S‖ gives zero, and a kernel
// direction of G with ‖Sᵀψ‖ > α gives infinity.
fn weak_trivial(s: &DMatrix<f64>, g: &Gramian, alpha: f64, rel_tol: f64) -> Option<Trivial> {
    let st = s.transpose();
    let (s_norm, top) = top_right_singular(&st);
    // Absorbs the rounding of ‖S‖ so that α = ‖S‖ gives exactly zero.
    if alpha >= s_norm * (1.0 - 1e-12) {
        return Some(Trivial::Zero(top));
    }
    let kernel = g.kernel_basis(rel_tol);
    if kernel.ncols() > 0 {
        let (sigma, v) = top_right_singular(&(&st * &kernel));
        if sigma > alpha {
            return Some(Trivial::Infinite(normalized(&(&kernel * v))));
        }
    }
    None
}

pub fn weak_constant(sys: &LinearSystem, g: &Gramian, alpha: f64) -> Result<ObservabilityReport> {
    weak_constant_with(sys, g, alpha, &WeakOptions::default())
}

/// Weak observability constant `μ_α^T`.
///
/// After the zero and infinite cases are settled, the ratio
/// `(‖Sᵀψ‖ - α) / ‖G^{1/2}ψ‖` is maximized over the unit sphere by gradient
/// ascent from spectral warm starts (top eigenvectors of `S Sᵀ` and of the
/// null-controllability pencil, bottom range eigenvectors and kernel
/// directions of `G`) and seeded random starts; the best candidates are then
/// polished by Newton steps.
pub fn weak_constant_with(
    sys: &LinearSystem,
    g: &Gramian,
    alpha: f64,
    opts: &WeakOptions,
) -> Result<ObservabilityReport> {
    check_alpha(alpha)?;
    let s = sys.semigroup(g.horizon())?;
    let report = |value: f64, witness: DVector<f64>, method| ObservabilityReport {
        horizon: g.horizon(),
        alpha,
        value,
        witness,
        method,
    };
    match weak_trivial(&s, g, alpha, opts.kernel_rel_tol) {
        Some(Trivial::Zero(w)) => return Ok(report(0.0, w, Method::Spectral)),
        Some(Trivial::Infinite(w)) => return Ok(report(f64::INFINITY, w, Method::Spectral)),
        None => {}
    }

    let n = g.n();
    let sst = &s * s.transpose();
    let objective = WeakObjective {
        sst: sst.clone(),
        gram: g.sqrt() * g.sqrt(),
        alpha,
    };

    let mut starts: Vec<DVector<f64>> = Vec::new();
    let (_, svecs) = sym_eigen(&sst);
    starts.extend((0..n.min(3)).map(|j| svecs.column(j).into_owned()));
    let p = g.pinv_sqrt(opts.kernel_rel_tol);
    let (_, pvecs) = sym_eigen(&(&p * &sst * &p));
    starts.extend((0..n.min(3)).map(|j| normalized(&(&p * pvecs.column(j)))));
    let rank = g.rank(opts.kernel_rel_tol);
    let evecs = g.eigenvectors();
    for j in rank.saturating_sub(3)..rank {
        starts.push(evecs.column(j).into_owned());
    }
    if rank > 0 {
        let weakest = evecs.column(rank - 1).into_owned();
        for j in rank..n {
            starts.push(normalized(&(evecs.column(j) + &weakest * 0.1)));
        }
    }
    let mut rng = NormalSource::new(opts.seed);
    starts.extend((0..opts.random_starts).map(|_| rng.unit_vector(n)));

    let mut results: Vec<(f64, DVector<f64>)> = starts
        .iter()
        .map(|s| objective.ascend(s, opts.max_iterations))
        .filter(|(f, _)| !f.is_nan())
        .collect();
    results.sort_by(|a, b| b.0.total_cmp(&a.0));
    results.truncate(3);

    let (best, witness) = results
        .iter()
        .map(|(_, psi)| objective.refine(psi, opts.newton_steps))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Numerical("no finite candidate on the sphere".into()))?;
    Ok(report(best.max(0.0), witness, Method::Optimized))
}

/// Brute-force lower bound on `μ_α^T` from `samples` points of the sphere plus
/// the coordinate directions. Half of the points form a uniform set (equally
/// spaced in 2-D, a Fibonacci lattice in 3-D, seeded draws otherwise); the
/// other half is the same kind of set pushed through `G^{+1/2}` and
/// renormalized, which concentrates points where `‖G^{1/2}ψ‖` is small and the
/// ratio varies fastest. The ratio is evaluated from `G` and `S(T)` directly.
pub fn weak_constant_oracle(
    sys: &LinearSystem,
    g: &Gramian,
    alpha: f64,
    samples: usize,
) -> Result<ObservabilityReport> {
    check_alpha(alpha)?;
    let n = g.n();
    let st = sys.semigroup(g.horizon())?.transpose();
    let gm = g.matrix();
    let kernel_thr = KALMAN_REL_TOL * g.max_eigenvalue();

    let lattice = |count: usize, seed: u64| -> Vec<DVector<f64>> {
        match n {
            2 => circle(count.max(1)),
            3 => fibonacci_sphere(count.max(1)),
            _ => {
                let mut rng = NormalSource::new(seed);
                (0..count).map(|_| rng.unit_vector(n)).collect()
            }
        }
    };
    let mut points: Vec<DVector<f64>> = if n == 1 {
        alloc::vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)]
    } else {
        let half = samples / 2;
        let mut pts = lattice(samples - half, 0x5eed);
        let p = g.pinv_sqrt(KALMAN_REL_TOL);
        pts.extend(
            lattice(half, 0x5eed + 1)
                .iter()
                .map(|v| &p * v)
                .filter(|v| v.norm() > 0.0)
                .map(|v| normalized(&v)),
        );
        pts
    };
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        points.push(e);
    }

    let mut best = (0.0, points[0].clone());
    for psi in points {
        let p = (&st * &psi).norm();
        let num = p - alpha;
        if num <= 0.0 {
            continue;
        }
        let q2 = psi.dot(&(gm * &psi));
        let v = if q2 <= kernel_thr { f64::INFINITY } else { num / libm::sqrt(q2) };
        if v > best.0 {
            best = (v, psi);
        }
    }
    Ok(ObservabilityReport {
        horizon: g.horizon(),
        alpha,
        value: best.0,
        witness: best.1,
        method: Method::Oracle,
    })
}

/// `μ_α^T` along a list of `α` values.
pub fn weak_constant_curve(
    sys: &LinearSystem,
    g: &Gramian,
    alphas: &[f64],
    opts: &WeakOptions,
) -> Result<Vec<ObservabilityReport>> {
    alphas
        .iter()
        .map(|&a| weak_constant_with(sys, g, a, opts))
        .collect()
}
