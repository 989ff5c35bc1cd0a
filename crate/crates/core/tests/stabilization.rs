mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use stabcert_core::linalg::expm;
use stabcert_core::model::{integrator, rotation, scalar_unstable};
use stabcert_core::sampling::NormalSource;
use stabcert_core::stabilizer::{
    feedback_certificate, intermediate_bound, simulate_feedback, SweepOptions,
};
use stabcert_core::stabilizer::sweep_omega_star_with;
use stabcert_core::{
    complete_stabilization_via_shift, concatenation_plan, gramian, komornik_feedback,
    run_concatenation, sweep_omega_star, DualProblem, Error, LinearSystem,
};

fn controllable(src: &mut NormalSource, max_n: usize) -> LinearSystem {
    loop {
        let sys = random_case(src, max_n);
        let g = gramian(&sys, 1.0).unwrap();
        if g.min_eigenvalue() >= 1e-6 * g.max_eigenvalue() {
            return sys;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn concatenated_trajectory_stays_in_envelope(seed in any::<u64>()) {
        let mut src = NormalSource::new(seed);
        let sys = controllable(&mut src, 4);
        let alpha = src.uniform(0.2, 0.8);
        let t = src.uniform(0.5, 1.5);
        let plan = concatenation_plan(&sys, alpha, t).unwrap();
        let y0 = src.normal_vector(sys.n());
        let run = run_concatenation(&sys, &plan, &y0, 6, 24).unwrap();
        let bound = intermediate_bound(&sys, &plan, y0.norm()).unwrap();
        let weighted = run.max_weighted_norm(alpha.ln() / t);
        prop_assert!(weighted <= bound * (1.0 + 1e-9), "{} > {}", weighted, bound);
        prop_assert_eq!(run.times.len(), 6 * 24 + 1);
        prop_assert!((run.times.last().unwrap() - 6.0 * t).abs() < 1e-12);
        // Period boundaries reproduce the recorded period norms.
        for k in 0..=6 {
            prop_assert!((run.norms[k * 24] - run.period_norms[k]).abs() <= 1e-12 * y0.norm());
        }
    }

    #[test]
    fn concatenated_state_solves_the_ode(seed in any::<u64>()) {
        let mut src = NormalSource::new(seed);
        let sys = controllable(&mut src, 3);
        let plan = concatenation_plan(&sys, 0.5, 1.0).unwrap();
        let y0 = src.normal_vector(sys.n());
        let grid = 400;
        let run = run_concatenation(&sys, &plan, &y0, 2, grid).unwrap();
        // Variation of constants with the sampled control by composite Simpson,
        // accumulated Horner-style: Σ w_i S(h)^{grid-i} B u_i.
        let h = 1.0 / grid as f64;
        let step = expm(&(sys.a() * h));
        let mut y = y0.clone();
        for k in 0..2 {
            let start = &run.states[k * grid];
            let psi = DualProblem::new(&sys, plan.gramian(), start, 0.5).unwrap().minimizer().unwrap().0;
            let mut acc = DVector::zeros(sys.n());
            let mut free = y.clone();
            for i in 0..=grid {
                let u = if i == grid {
                    -(sys.b().transpose() * &psi)
                } else {
                    run.controls.row(k * grid + i).transpose()
                };
                let w = if i == 0 || i == grid { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                acc = &step * acc + sys.b() * u * (w * h / 3.0);
                if i > 0 {
                    free = &step * free;
                }
            }
            y = free + acc;
            let scale = y0.norm() + run.period_mus[k] * sys.b().norm();
            let gap = (&y - &run.states[(k + 1) * grid]).norm() / scale;
            prop_assert!(gap < 1e-8, "period {}: gap {}", k, gap);
        }
    }

    #[test]
    fn komornik_lyapunov_decay(seed in any::<u64>(), lambda in 0.3f64..2.0) {
        let mut src = NormalSource::new(seed);
        let sys = controllable(&mut src, 5);
        let plan = komornik_feedback(&sys, 1.0, lambda).unwrap();
        prop_assert!(plan.certified_rate <= -lambda + 1e-3);
        let (m, omega) = plan.lyapunov_bound();
        prop_assert!((omega + lambda).abs() < 1e-15);
        let cl = plan.closed_loop(&sys);
        for k in 1..=40 {
            let t = 0.1 * k as f64;
            let norm = expm(&(&cl * t)).singular_values().max();
            prop_assert!(norm <= m * (omega * t).exp() * (1.0 + 1e-8), "t={}: {} > {}", t, norm, m * (omega * t).exp());
        }
        let y0 = src.normal_vector(sys.n());
        let (_, states) = simulate_feedback(&sys, &plan.gain, &y0, 2.0, 100).unwrap();
        let mut prev = f64::INFINITY;
        for (i, y) in states.iter().enumerate() {
            let v = plan.lyapunov(y) * (2.0 * lambda * 0.02 * i as f64).exp();
            prop_assert!(v <= prev * (1.0 + 1e-9));
            prev = v;
        }
    }

    #[test]
    fn shift_places_rate(seed in any::<u64>(), target in -8.0f64..-0.5) {
        let mut src = NormalSource::new(seed);
        let sys = controllable(&mut src, 4);
        let plan = complete_stabilization_via_shift(&sys, target, 1.0, 1.0).unwrap();
        let abscissa = plan
            .closed_loop(&sys)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(abscissa <= target + 1e-3);
        prop_assert!((plan.certified_rate - abscissa).abs() < 1e-8);
        let (_, omega) = plan.lyapunov_bound();
        prop_assert!((omega - (target - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn feedback_certificate_contracts() {
    let sys = scalar_unstable();
    let plan = komornik_feedback(&sys, 1.0, 1.0).unwrap();
    let cert = feedback_certificate(&plan, 0.5).unwrap();
    let y0 = DVector::from_vec(vec![1.0]);
    let (_, states) = simulate_feedback(&sys, &plan.gain, &y0, cert.period, 10).unwrap();
    assert!(states.last().unwrap().norm() <= 0.5 + 1e-12);
    // ‖u‖ = |K| ‖y0‖ (1 - e^{2ρT})^{1/2} / (-2ρ)^{1/2} with the exact pole ρ.
    let rho = plan.certified_rate;
    let k = plan.gain[(0, 0)].abs();
    let energy = k * ((1.0 - (2.0 * rho * cert.period).exp()) / (-2.0 * rho)).sqrt();
    assert!(energy <= cert.constant + 1e-12);
}

#[test]
fn uncontrollable_unstable_mode_blocks_everything() {
    let sys = LinearSystem::from_row_major(2, 1, &[-1.0, 0.0, 0.0, 0.5], &[1.0, 0.0]).unwrap();
    assert!(matches!(concatenation_plan(&sys, 0.5, 1.0), Err(Error::NotStabilizable(_))));
    assert!(matches!(
        complete_stabilization_via_shift(&sys, -2.0, 1.0, 1.0),
        Err(Error::NotStabilizable(_))
    ));
    assert!(matches!(komornik_feedback(&sys, 1.0, 1.0), Err(Error::Uncontrollable { .. })));
    let est = sweep_omega_star(&sys, &[0.3, 0.6, 0.9], &[0.5, 1.0, 2.0]).unwrap();
    assert!(est.omega_star_upper.is_none());
    assert!(!est.null_controllable);
    assert!(est.grid.iter().all(|c| !c.is_finite()));
}

#[test]
fn stable_uncontrolled_mode_limits_the_rate() {
    // The blind mode decays like e^{-t}; no pair beats ln(α)/T < -1 for long.
    let sys = LinearSystem::from_row_major(2, 1, &[0.0, 0.0, 0.0, -1.0], &[1.0, 0.0]).unwrap();
    let alphas = [0.05, 0.2, 0.4, 0.6, 0.8];
    let horizons = [0.5, 1.0, 2.0, 4.0];
    let est = sweep_omega_star(&sys, &alphas, &horizons).unwrap();
    let best = est.omega_star_upper.unwrap();
    assert!(best >= -1.0 - 1e-9, "{best}");
    assert!(!est.unbounded_below);
    assert!(!est.null_controllable);
    for c in &est.grid {
        // Finite exactly when e^{-T} ≤ α.
        assert_eq!(c.is_finite(), (-c.horizon).exp() <= c.alpha, "{c:?}");
    }
}

#[test]
fn controllable_system_looks_unbounded() {
    let est = sweep_omega_star(&integrator(), &[0.1, 0.5, 0.9], &[0.25, 1.0]).unwrap();
    assert!(est.unbounded_below);
    assert!(est.null_controllable);
    assert_eq!(est.argmin, Some((0.1, 0.25)));
    let opts = SweepOptions { floor: -5.0, ..SweepOptions::default() };
    let est = sweep_omega_star_with(&rotation(), &[0.5, 0.9], &[0.5, 1.0], &opts).unwrap();
    assert!(est.null_controllable);
    assert_eq!(est.grid.len(), 4);
}

#[test]
fn sweep_rejects_bad_grids() {
    let sys = integrator();
    for (a, t) in [(vec![], vec![1.0]), (vec![0.5], vec![]), (vec![1.0], vec![1.0]), (vec![0.5], vec![-1.0])] {
        assert!(matches!(sweep_omega_star(&sys, &a, &t), Err(Error::InvalidArgument(_))));
    }
}

#[test]
fn feedback_run_matches_design_on_random_system() {
    let mut src = NormalSource::new(17);
    let sys = controllable(&mut src, 4);
    let plan = komornik_feedback(&sys, 1.0, 1.5).unwrap();
    let y0 = src.normal_vector(sys.n());
    let (times, states) = simulate_feedback(&sys, &plan.gain, &y0, 3.0, 30).unwrap();
    let cl = plan.closed_loop(&sys);
    for (t, y) in times.iter().zip(&states) {
        let want = expm(&(&cl * *t)) * &y0;
        assert!((y - want).norm() < 1e-10 * y0.norm());
    }
    let zero = DMatrix::zeros(sys.m(), sys.n());
    let (_, free) = simulate_feedback(&sys, &zero, &y0, 1.0, 4).unwrap();
    assert!((free[4].clone() - sys.semigroup(1.0).unwrap() * &y0).norm() < 1e-10);
}
