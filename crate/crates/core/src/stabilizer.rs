//! Exponential stabilization.
//!
//! Two constructions are provided. A *concatenation* plan repeats, on every
//! period of length `T`, the minimal-norm control that shrinks the current
//! state by the factor `α`; it exists exactly when the weak observability
//! constant `μ_α^T` is finite and decays at rate `ln(α)/T`. A *feedback* plan
//! is the gain `K_λ = -Bᵀ C_λ⁻¹` built from the weighted backward Gramian,
//! which gives decay rate at least `λ` for controllable pairs.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::constants::{null_controllability_constant, weak_constant_with, WeakOptions};
use crate::dualctl::DualProblem;
use crate::error::{Error, Result};
use crate::gramian::{gramian, komornik_gramian, semigroup_and_gramian, Gramian};
use crate::linalg::{expm, norm2, spectral_abscissa};
use crate::model::{LinearSystem, KALMAN_REL_TOL};

/// Tolerance on the closed-loop abscissa of a Komornik feedback.
pub const FEEDBACK_RATE_TOL: f64 = 1e-3;
/// Time samples used to bound `sup_{[0,T]} ‖S(t)‖`.
pub const GROWTH_SAMPLES: usize = 256;

/// Period-wise minimal-norm control schedule.
#[derive(Debug, Clone)]
pub struct ConcatenationPlan {
    pub alpha: f64,
    pub period: f64,
    /// `μ_α^T`: each period's control norm is at most this times the state norm.
    pub constant: f64,
    gramian: Gramian,
}

impl ConcatenationPlan {
    /// `ln(α)/T`.
    pub fn certified_rate(&self) -> f64 {
        libm::log(self.alpha) / self.period
    }

    pub fn gramian(&self) -> &Gramian {
        &self.gramian
    }
}

/// Linear state feedback `u = K y`.
#[derive(Debug, Clone)]
pub struct FeedbackPlan {
    /// `m × n` gain.
    pub gain: DMatrix<f64>,
    /// Spectral abscissa of `A + B K` for the system the plan was returned for.
    pub certified_rate: f64,
    pub lambda: f64,
    pub horizon: f64,
    /// Generator shift applied before the design (`0` for a plain design).
    pub shift: f64,
    weighted_gramian: Gramian,
}

impl FeedbackPlan {
    pub fn closed_loop(&self, sys: &LinearSystem) -> DMatrix<f64> {
        sys.a() + sys.b() * &self.gain
    }

    /// The weighted Gramian `C_λ` of the (possibly shifted) design system.
    pub fn weighted_gramian(&self) -> &Gramian {
        &self.weighted_gramian
    }

    /// `(M, ω)` with `‖exp(t(A+BK))‖ ≤ M e^{ωt}` for all `t ≥ 0`, from the
    /// Lyapunov function `⟨y, C_λ⁻¹ y⟩`: `M = cond(C_λ)^{1/2}`, `ω = -λ - shift`.
    pub fn lyapunov_bound(&self) -> (f64, f64) {
        let c = &self.weighted_gramian;
        let m = libm::sqrt(c.max_eigenvalue() / c.min_eigenvalue());
        (m, -self.lambda - self.shift)
    }

    /// `V(y) = ⟨y, C_λ⁻¹ y⟩`.
    pub fn lyapunov(&self, y: &DVector<f64>) -> f64 {
        let coords = self.weighted_gramian.eigenvectors().transpose() * y;
        coords
            .iter()
            .zip(self.weighted_gramian.eigenvalues())
            .map(|(c, l)| c * c / l)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub enum StabilizationPlan {
    Concatenation(ConcatenationPlan),
    Feedback(FeedbackPlan),
}

impl StabilizationPlan {
    pub fn certified_rate(&self) -> f64 {
        match self {
            StabilizationPlan::Concatenation(p) => p.certified_rate(),
            StabilizationPlan::Feedback(p) => p.certified_rate,
        }
    }
}

fn check_alpha_unit(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

pub fn concatenation_plan(sys: &LinearSystem, alpha: f64, period: f64) -> Result<ConcatenationPlan> {
    concatenation_plan_with(sys, alpha, period, &WeakOptions::default())
}

/// Plan with `C = μ_α^T`; fails when the weak constant is infinite.
pub fn concatenation_plan_with(
    sys: &LinearSystem,
    alpha: f64,
    period: f64,
    opts: &WeakOptions,
) -> Result<ConcatenationPlan> {
    check_alpha_unit(alpha)?;
    check_positive("period", period)?;
    let g = gramian(sys, period)?;
    let report = weak_constant_with(sys, &g, alpha, opts)?;
    if !report.is_finite() {
        return Err(Error::NotStabilizable(format!(
            "weak observability constant is infinite at alpha={alpha}, T={period}"
        )));
    }
    Ok(ConcatenationPlan {
        alpha,
        period,
        constant: report.value,
        gramian: g,
    })
}

/// Sampled closed trajectory of a concatenation plan.
#[derive(Debug, Clone)]
pub struct ConcatenationRun {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub norms: Vec<f64>,
    /// `‖y(kT)‖` for `k = 0..=steps`.
    pub period_norms: Vec<f64>,
    /// Control norm used on each period.
    pub period_mus: Vec<f64>,
    /// Row `i` is the control at `times[i]`; at a period boundary the sample
    /// belongs to the period that starts there (the final row closes the last one).
    pub controls: DMatrix<f64>,
    /// `‖u‖²_{L²(0, steps·T)} = Σ μ_k²`.
    pub control_energy: f64,
    pub period: f64,
}

impl ConcatenationRun {
    /// `ln(‖y(NT)‖/‖y0‖) / (NT)`; `-∞` once the state reaches zero.
    pub fn measured_rate(&self) -> f64 {
        let first = self.period_norms[0];
        let last = *self.period_norms.last().expect("nonempty");
        let span = self.period * (self.period_norms.len() - 1) as f64;
        if first == 0.0 || last == 0.0 {
            return f64::NEG_INFINITY;
        }
        libm::log(last / first) / span
    }

    /// `sup_t ‖y(t)‖ e^{-rate t}` over the samples.
    pub fn max_weighted_norm(&self, rate: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.norms)
            .map(|(t, n)| n * libm::exp(-rate * t))
            .fold(0.0, f64::max)
    }
}

/// `max_{t ∈ [0,T]} ‖S(t)‖₂` over `samples + 1` equally spaced times.
pub fn growth_constant(sys: &LinearSystem, period: f64, samples: usize) -> Result<f64> {
    check_positive("period", period)?;
    let step = sys.semigroup(period / samples as f64)?;
    let mut s = DMatrix::identity(sys.n(), sys.n());
    let mut best: f64 = 1.0;
    for _ in 0..samples {
        s = &step * s;
        best = best.max(norm2(&s));
    }
    Ok(best)
}

/// Envelope `(M/α)(1 + ‖B‖ √T C) ‖y0‖` for `‖y(t)‖ e^{-t ln(α)/T}` along a
/// concatenated trajectory, with `M` from [`growth_constant`].
pub fn intermediate_bound(sys: &LinearSystem, plan: &ConcatenationPlan, y0_norm: f64) -> Result<f64> {
    let m = growth_constant(sys, plan.period, GROWTH_SAMPLES)?;
    let b = norm2(sys.b());
    Ok(m / plan.alpha * (1.0 + b * libm::sqrt(plan.period) * plan.constant) * y0_norm)
}

/// Applies the plan for `steps` periods from `y0`, sampling each period at
/// `grid + 1` times.
///
/// Within a period starting from `y_k` with dual minimizer `ψ̄_k`,
/// `y(t) = S(t) y_k - G_t S(T-t)ᵀ ψ̄_k`, evaluated exactly through the
/// recurrences `S(t+h) = S(h) S(t)` and `G_{t+h} = S(h) G_t S(h)ᵀ + G_h`.
pub fn run_concatenation(
    sys: &LinearSystem,
    plan: &ConcatenationPlan,
    y0: &DVector<f64>,
    steps: usize,
    grid: usize,
) -> Result<ConcatenationRun> {
    if steps == 0 || grid == 0 {
        return Err(Error::invalid("steps and grid must be positive"));
    }
    if y0.len() != sys.n() {
        return Err(Error::invalid(format!("y0 has length {}, expected {}", y0.len(), sys.n())));
    }
    let n = sys.n();
    let m = sys.m();
    let period = plan.period;
    let h = period / grid as f64;
    let (s_h, g_h) = semigroup_and_gramian(sys, h)?;

    let mut s_pows = Vec::with_capacity(grid + 1);
    let mut g_acc = Vec::with_capacity(grid + 1);
    s_pows.push(DMatrix::<f64>::identity(n, n));
    g_acc.push(DMatrix::<f64>::zeros(n, n));
    for i in 0..grid {
        s_pows.push(&s_h * &s_pows[i]);
        g_acc.push(&s_h * &g_acc[i] * s_h.transpose() + &g_h);
    }
    // G_{t_i} S(T - t_i)ᵀ
    let coupling: Vec<DMatrix<f64>> = (0..=grid)
        .map(|i| &g_acc[i] * s_pows[grid - i].transpose())
        .collect();
    let bt = sys.b().transpose();

    let total = steps * grid + 1;
    let mut times = Vec::with_capacity(total);
    let mut states = Vec::with_capacity(total);
    let mut controls = DMatrix::zeros(total, m);
    let mut period_norms = Vec::with_capacity(steps + 1);
    let mut period_mus = Vec::with_capacity(steps);
    let mut energy = 0.0;

    let mut y = y0.clone();
    period_norms.push(y.norm());
    for k in 0..steps {
        let problem = DualProblem::new(sys, &plan.gramian, &y, plan.alpha)?;
        let (psi, _, _) = problem.minimizer()?;
        let mu = plan.gramian.sqrt_norm(&psi);
        period_mus.push(mu);
        energy += mu * mu;
        for i in 0..=grid {
            let row = k * grid + i;
            let adjoint = s_pows[grid - i].transpose() * &psi;
            if i < grid || k + 1 == steps {
                controls.set_row(row, &(-(&bt * adjoint)).transpose());
            }
            // The boundary state was already recorded at the end of period k - 1.
            if i == 0 && k > 0 {
                continue;
            }
            times.push(k as f64 * period + i as f64 * h);
            states.push(&s_pows[i] * &y - &coupling[i] * &psi);
        }
        y = states.last().expect("nonempty").clone();
        period_norms.push(y.norm());
    }
    let norms = states.iter().map(|s| s.norm()).collect();
    Ok(ConcatenationRun {
        times,
        states,
        norms,
        period_norms,
        period_mus,
        controls,
        control_energy: energy,
        period,
    })
}

/// Feedback `K_λ = -Bᵀ C_λ⁻¹`.
pub fn komornik_feedback(sys: &LinearSystem, horizon: f64, lambda: f64) -> Result<FeedbackPlan> {
    let c = komornik_gramian(sys, horizon, lambda)?;
    let n = sys.n();
    if !(c.min_eigenvalue() > KALMAN_REL_TOL * c.max_eigenvalue()) {
        return Err(Error::Uncontrollable {
            direction: c.eigenvectors().column(n - 1).iter().copied().collect(),
        });
    }
    let inv_diag = DVector::from_iterator(n, c.eigenvalues().iter().map(|l| 1.0 / l));
    let c_inv = c.eigenvectors() * DMatrix::from_diagonal(&inv_diag) * c.eigenvectors().transpose();
    let gain = -(sys.b().transpose() * c_inv);
    let rate = spectral_abscissa(&(sys.a() + sys.b() * &gain))?;
    if rate > -lambda + FEEDBACK_RATE_TOL {
        return Err(Error::Numerical(format!(
            "closed-loop abscissa {rate} exceeds -lambda = {}",
            -lambda
        )));
    }
    Ok(FeedbackPlan {
        gain,
        certified_rate: rate,
        lambda,
        horizon,
        shift: 0.0,
        weighted_gramian: c,
    })
}

/// Feedback with closed-loop abscissa at most `omega_target` (< 0), designed
/// on `A - ω_target I` so that `exp(t(A - ω I + BK)) = e^{-ωt} exp(t(A + BK))`
/// transfers the shifted rate `-λ` to `ω_target - λ`.
pub fn complete_stabilization_via_shift(
    sys: &LinearSystem,
    omega_target: f64,
    horizon: f64,
    lambda: f64,
) -> Result<FeedbackPlan> {
    if !(omega_target.is_finite() && omega_target < 0.0) {
        return Err(Error::invalid(format!(
            "target rate must be negative, got {omega_target}"
        )));
    }
    let kalman = sys.kalman_decompose()?;
    if kalman.rank < sys.n() {
        return Err(Error::NotStabilizable(format!(
            "Kalman rank {} < n = {}; uncontrollable modes {:?} cannot be moved",
            kalman.rank,
            sys.n(),
            kalman.uncontrollable_spectrum
        )));
    }
    let shifted = sys.shift(-omega_target);
    let mut plan = komornik_feedback(&shifted, horizon, lambda)?;
    plan.certified_rate = spectral_abscissa(&plan.closed_loop(sys))?;
    plan.shift = -omega_target;
    Ok(plan)
}

/// Data witnessing α-contraction in time `T` from a stabilizing feedback:
/// `u(t) = K exp(t(A+BK)) y0` reaches the ball of radius `α‖y0‖` at
/// `T = ln(α/M)/ω` with `‖u‖ ≤ ‖K‖ M / √(-2ω) ‖y0‖`.
#[derive(Debug, Clone, Copy)]
pub struct DecayCertificate {
    pub alpha: f64,
    pub period: f64,
    pub constant: f64,
    pub growth: f64,
    pub rate: f64,
}

pub fn feedback_certificate(plan: &FeedbackPlan, alpha: f64) -> Result<DecayCertificate> {
    check_alpha_unit(alpha)?;
    let (growth, rate) = plan.lyapunov_bound();
    if !(rate < 0.0) {
        return Err(Error::NotStabilizable(format!("feedback rate {rate} is not negative")));
    }
    Ok(DecayCertificate {
        alpha,
        period: libm::log(alpha / growth) / rate,
        constant: norm2(&plan.gain) * growth / libm::sqrt(-2.0 * rate),
        growth,
        rate,
    })
}

/// Exact closed-loop samples `exp(t_i (A+BK)) y0` on `samples + 1` times in
/// `[0, t_end]`. A zero gain gives the free motion.
pub fn simulate_feedback(
    sys: &LinearSystem,
    gain: &DMatrix<f64>,
    y0: &DVector<f64>,
    t_end: f64,
    samples: usize,
) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    check_positive("t_end", t_end)?;
    if samples == 0 {
        return Err(Error::invalid("samples must be positive"));
    }
    if gain.nrows() != sys.m() || gain.ncols() != sys.n() || y0.len() != sys.n() {
        return Err(Error::invalid("gain or initial state has the wrong shape"));
    }
    let h = t_end / samples as f64;
    let step = expm(&((sys.a() + sys.b() * gain) * h));
    let mut times = Vec::with_capacity(samples + 1);
    let mut states = Vec::with_capacity(samples + 1);
    let mut y = y0.clone();
    for i in 0..=samples {
        times.push(i as f64 * h);
        states.push(y.clone());
        y = &step * y;
    }
    Ok((times, states))
}

/// One `(α, T)` evaluation of `μ_α^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub alpha: f64,
    pub horizon: f64,
    pub mu: f64,
    pub rate: f64,
}

impl SweepCell {
    pub fn is_finite(&self) -> bool {
        self.mu.is_finite()
    }
}

/// Options for [`sweep_omega_star_with`].
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub weak: WeakOptions,
    /// A grid minimum below this is flagged as unbounded below.
    pub floor: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            weak: WeakOptions::default(),
            floor: -1e3,
        }
    }
}

/// Grid upper bound on the best decay rate `ω* = inf ln(α)/T` over pairs with
/// finite `μ_α^T`.
#[derive(Debug, Clone)]
pub struct OmegaStarEstimate {
    pub grid: Vec<SweepCell>,
    /// `None` when no grid cell is finite.
    pub omega_star_upper: Option<f64>,
    pub argmin: Option<(f64, f64)>,
    /// Heuristic: the minimum sits at the most aggressive corner (smallest α
    /// and smallest T) of the grid, or falls below the configured floor.
    pub unbounded_below: bool,
    /// `μ_0^T` finite for some `T` of the grid; for α → 0 this is the
    /// principled test of complete stabilizability.
    pub null_controllable: bool,
}

/// Evaluates `μ_α^T` for every `α` at a single `T`.
pub fn sweep_row(
    sys: &LinearSystem,
    horizon: f64,
    alphas: &[f64],
    opts: &WeakOptions,
) -> Result<(Vec<SweepCell>, bool)> {
    let g = gramian(sys, horizon)?;
    let null = null_controllability_constant(sys, &g)?.is_finite();
    let cells = alphas
        .iter()
        .map(|&alpha| {
            let r = weak_constant_with(sys, &g, alpha, opts)?;
            Ok(SweepCell {
                alpha,
                horizon,
                mu: r.value,
                rate: libm::log(alpha) / horizon,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((cells, null))
}

pub fn validate_sweep_grids(alphas: &[f64], horizons: &[f64]) -> Result<()> {
    if alphas.is_empty() || horizons.is_empty() {
        return Err(Error::invalid("alpha and T grids must be nonempty"));
    }
    for &a in alphas {
        check_alpha_unit(a)?;
    }
    for &t in horizons {
        check_positive("T", t)?;
    }
    Ok(())
}

impl OmegaStarEstimate {
    pub fn from_cells(cells: Vec<SweepCell>, null_controllable: bool, floor: f64) -> Self {
        let best = cells
            .iter()
            .filter(|c| c.is_finite())
            .min_by(|a, b| a.rate.total_cmp(&b.rate))
            .copied();
        let alpha_min = cells.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min);
        let t_min = cells.iter().map(|c| c.horizon).fold(f64::INFINITY, f64::min);
        let unbounded_below = match best {
            Some(c) => (c.alpha == alpha_min && c.horizon == t_min) || c.rate < floor,
            None => false,
        };
        OmegaStarEstimate {
            omega_star_upper: best.map(|c| c.rate),
            argmin: best.map(|c| (c.alpha, c.horizon)),
            unbounded_below,
            null_controllable,
            grid: cells,
        }
    }
}

pub fn sweep_omega_star(
    sys: &LinearSystem,
    alphas: &[f64],
    horizons: &[f64],
) -> Result<OmegaStarEstimate> {
    sweep_omega_star_with(sys, alphas, horizons, &SweepOptions::default())
}

/// Sequential sweep over the product grid.
pub fn sweep_omega_star_with(
    sys: &LinearSystem,
    alphas: &[f64],
    horizons: &[f64],
    opts: &SweepOptions,
) -> Result<OmegaStarEstimate> {
    validate_sweep_grids(alphas, horizons)?;
    let mut cells = Vec::with_capacity(alphas.len() * horizons.len());
    let mut null = false;
    for &t in horizons {
        let (row, nc) = sweep_row(sys, t, alphas, &opts.weak)?;
        null |= nc;
        cells.extend(row);
    }
    Ok(OmegaStarEstimate::from_cells(cells, null, opts.floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{integrator, rotation, scalar_unstable};
    use alloc::vec;

    #[test]
    fn integrator_plan_and_run() {
        let sys = integrator();
        let plan = concatenation_plan(&sys, 0.5, 1.0).unwrap();
        assert!((plan.constant - 0.5).abs() < 1e-12);
        assert!((plan.certified_rate() - libm::log(0.5)).abs() < 1e-15);

        let run = run_concatenation(&sys, &plan, &DVector::from_vec(vec![1.0]), 5, 32).unwrap();
        let want = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125];
        for (got, w) in run.period_norms.iter().zip(want) {
            assert!((got - w).abs() < 1e-12, "{got} vs {w}");
        }
        let energy_bound = plan.constant.powi(2) / (1.0 - 0.25);
        assert!(run.control_energy <= energy_bound * (1.0 + 1e-6));

        let rate = plan.certified_rate();
        let envelope = run.max_weighted_norm(rate);
        assert!(envelope <= intermediate_bound(&sys, &plan, 1.0).unwrap());
        // Envelope as printed in the original estimate, (M/α)(1 + ‖B‖√T) C.
        assert!(envelope <= 1.0 / 0.5 * (1.0 + 1.0) * plan.constant);
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let sys = rotation();
        let plan = concatenation_plan(&sys, 0.5, 2.0).unwrap();
        let run = run_concatenation(&sys, &plan, &DVector::zeros(2), 3, 8).unwrap();
        assert!(run.norms.iter().all(|&x| x == 0.0));
        assert!(run.controls.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stable_free_motion_needs_no_control() {
        let sys = LinearSystem::from_row_major(1, 1, &[-2.0], &[1.0]).unwrap();
        let plan = concatenation_plan(&sys, 0.5, 1.0).unwrap();
        assert_eq!(plan.constant, 0.0);
    }

    #[test]
    fn plan_rejects_bad_parameters() {
        let sys = integrator();
        assert!(concatenation_plan(&sys, 1.0, 1.0).is_err());
        assert!(concatenation_plan(&sys, 0.5, 0.0).is_err());
        let frozen = LinearSystem::from_row_major(1, 1, &[0.0], &[0.0]).unwrap();
        assert!(matches!(
            concatenation_plan(&frozen, 0.5, 1.0),
            Err(Error::NotStabilizable(_))
        ));
    }

    #[test]
    fn komornik_scalar_pole() {
        let plan = komornik_feedback(&integrator(), 1.0, 1.0).unwrap();
        let e2 = libm::exp(-2.0);
        let c = (1.0 - e2) / 2.0 + e2 / 4.0;
        assert!((plan.gain[(0, 0)] + 1.0 / c).abs() < 1e-10);
        assert!((plan.certified_rate + 1.0 / c).abs() < 1e-10);
        assert!((plan.certified_rate + 2.145_157_766_991_508).abs() < 1e-9);
    }

    #[test]
    fn komornik_rejects_uncontrollable() {
        let sys = LinearSystem::from_row_major(2, 1, &[1.0, 0.0, 0.0, -2.0], &[1.0, 0.0]).unwrap();
        match komornik_feedback(&sys, 1.0, 1.0) {
            Err(Error::Uncontrollable { direction }) => assert!(direction[1].abs() > 0.99),
            other => panic!("expected uncontrollable, got {other:?}"),
        }
    }

    #[test]
    fn shifted_design_reaches_target() {
        let sys = scalar_unstable();
        let plan = complete_stabilization_via_shift(&sys, -5.0, 1.0, 1.0).unwrap();
        let pole = sys.a()[(0, 0)] + sys.b()[(0, 0)] * plan.gain[(0, 0)];
        assert!(pole <= -5.0);
        let shifted_rate = spectral_abscissa(&plan.closed_loop(&sys.shift(5.0))).unwrap();
        assert!((plan.certified_rate - (shifted_rate - 5.0)).abs() < 1e-8);
        assert!(complete_stabilization_via_shift(&sys, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn forward_certificate_gives_finite_weak_constant() {
        let sys = scalar_unstable();
        let plan = komornik_feedback(&sys, 1.0, 1.0).unwrap();
        let cert = feedback_certificate(&plan, 0.5).unwrap();
        assert!(cert.period > 0.0);
        let g = gramian(&sys, cert.period).unwrap();
        let mu = crate::constants::weak_constant(&sys, &g, 0.5).unwrap().value;
        assert!(mu <= cert.constant * (1.0 + 1e-9), "{mu} > {}", cert.constant);
    }

    #[test]
    fn sweep_examples() {
        let alphas = [0.1, 0.3, 0.5, 0.7, 0.9];
        let ts = [0.25, 0.5, 1.0, 2.0];
        let est = sweep_omega_star(&integrator(), &alphas, &ts).unwrap();
        assert!(est.grid.iter().all(|c| c.is_finite()));
        assert!(est.unbounded_below);
        assert!(est.null_controllable);
        assert!((est.omega_star_upper.unwrap() - libm::log(0.1) / 0.25).abs() < 1e-12);

        let damped = LinearSystem::from_row_major(1, 1, &[-1.0], &[0.0]).unwrap();
        let alphas: Vec<f64> = (1..20).map(|k| k as f64 * 0.05).collect();
        let ts: Vec<f64> = (1..40).map(|k| k as f64 * 0.1).collect();
        let est = sweep_omega_star(&damped, &alphas, &ts).unwrap();
        let w = est.omega_star_upper.unwrap();
        assert!(w >= -1.0 - 1e-12 && w < -0.9, "{w}");
        assert!(!est.unbounded_below);
        assert!(!est.null_controllable);

        let frozen = LinearSystem::from_row_major(1, 1, &[0.0], &[0.0]).unwrap();
        let est = sweep_omega_star(&frozen, &[0.3, 0.6], &[1.0, 2.0]).unwrap();
        assert!(est.omega_star_upper.is_none());
        assert!(!est.unbounded_below);

        assert!(sweep_omega_star(&frozen, &[], &[1.0]).is_err());
        assert!(sweep_omega_star(&frozen, &[1.5], &[1.0]).is_err());
    }

    #[test]
    fn lyapunov_decreases_along_closed_loop() {
        let sys = rotation();
        let plan = komornik_feedback(&sys, 1.0, 1.0).unwrap();
        let y0 = DVector::from_vec(vec![1.0, -0.5]);
        let (_, states) = simulate_feedback(&sys, &plan.gain, &y0, 5.0, 100).unwrap();
        let v: Vec<f64> = states.iter().map(|y| plan.lyapunov(y)).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }
}
