mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use stabcert_core::gramian::{block_step, gramian_by_quadrature, semigroup_and_gramian};
use stabcert_core::linalg::expm;
use stabcert_core::quadrature::composite;
use stabcert_core::sampling::NormalSource;
use stabcert_core::{gramian, wave_heat, LinearSystem};

fn kalman_svd_rank(sys: &LinearSystem) -> usize {
    let k = sys.kalman_matrix();
    let sv = k.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn semigroup_composes(seed in any::<u64>(), t in 0.0f64..2.0, s in 0.0f64..2.0) {
        let mut src = NormalSource::new(seed);
        let sys = random_case(&mut src, 6);
        let lhs = sys.semigroup(t + s).unwrap();
        let rhs = sys.semigroup(t).unwrap() * sys.semigroup(s).unwrap();
        prop_assert!((&lhs - &rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn shift_scales_semigroup(seed in any::<u64>(), omega in -2.0f64..2.0, t in 0.0f64..2.0) {
        let mut src = NormalSource::new(seed);
        let sys = random_case(&mut src, 5);
        let shifted = sys.shift(omega).semigroup(t).unwrap();
        let want = sys.semigroup(t).unwrap() * (omega * t).exp();
        prop_assert!((&shifted - &want).norm() <= 1e-10 * want.norm().max(1.0));
    }

    #[test]
    fn kalman_rank_matches_construction(seed in any::<u64>(), n in 2usize..6, m in 1usize..3, r_frac in 0.0f64..1.0) {
        let mut src = NormalSource::new(seed);
        let r = ((r_frac * n as f64) as usize).min(n);
        let (sys, a22) = system_with_rank(&mut src, n, m, r);
        let dec = sys.kalman_decompose().unwrap();
        prop_assert_eq!(dec.rank, r);
        prop_assert_eq!(dec.rank, kalman_svd_rank(&sys));
        prop_assert_eq!(sys.shift(0.75).kalman_decompose().unwrap().rank, r);

        let mut want: Vec<_> = a22.clone().complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        let mut got = dec.uncontrollable_spectrum.clone();
        let key = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
        want.sort_by(key);
        got.sort_by(key);
        prop_assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g.0 - w.0).abs() < 1e-8 && (g.1 - w.1).abs() < 1e-8, "{:?} vs {:?}", got, want);
        }
        let basis = &dec.basis;
        prop_assert!((basis.transpose() * basis - DMatrix::identity(n, n)).norm() < 1e-10);
        // The complement is A-invariantly blind to B.
        let q2 = basis.columns(r, n - r);
        prop_assert!((q2.transpose() * sys.b()).norm() <= 1e-10 * sys.b().norm());
        prop_assert!((q2.transpose() * sys.a() * basis.columns(0, r)).norm() < 1e-9);
    }

    #[test]
    fn gramian_rank_is_kalman_rank(seed in any::<u64>(), n in 2usize..5, r_frac in 0.0f64..1.0) {
        let mut src = NormalSource::new(seed);
        let r = ((r_frac * n as f64) as usize).min(n);
        let (sys, _) = system_with_rank(&mut src, n, n.min(2), r);
        let g = gramian(&sys, 1.0).unwrap();
        prop_assert_eq!(g.rank(1e-9), r);
    }

    #[test]
    fn quadratic_form_is_output_energy(seed in any::<u64>(), t in 0.2f64..2.0) {
        let mut src = NormalSource::new(seed);
        let sys = random_case(&mut src, 5);
        let psi = src.normal_vector(sys.n());
        let g = gramian(&sys, t).unwrap();
        let energy = composite(
            |s| {
                let out = sys.b().transpose() * expm(&(sys.a().transpose() * (t - s))) * &psi;
                DMatrix::from_element(1, 1, out.norm_squared())
            },
            0.0, t, 16, 12,
        )[(0, 0)];
        prop_assert!(rel_err(g.quadratic_form(&psi), energy) < 1e-10);
    }

    #[test]
    fn gramian_grows_with_horizon(seed in any::<u64>(), t in 0.1f64..2.0, dt in 0.01f64..1.0) {
        let mut src = NormalSource::new(seed);
        let sys = random_case(&mut src, 5);
        let g1 = gramian(&sys, t).unwrap();
        let g2 = gramian(&sys, t + dt).unwrap();
        let diff = g2.matrix() - g1.matrix();
        prop_assert!(is_psd(&diff, 1e-12 * g2.max_eigenvalue()));
    }

    #[test]
    fn block_method_matches_quadrature(seed in any::<u64>(), t in 0.1f64..3.0) {
        let mut src = NormalSource::new(seed);
        let sys = random_case(&mut src, 8);
        let g = gramian(&sys, t).unwrap();
        let q = gramian_by_quadrature(&sys, t, 24, 12).unwrap();
        prop_assert!((g.matrix() - q.matrix()).norm() <= 1e-8 * q.matrix().norm());
    }
}

#[test]
fn single_step_matches_doubling() {
    let mut src = NormalSource::new(5);
    let sys = random_case_n(&mut src, 4);
    let (s, g) = block_step(&sys, 0.25);
    let (s2, g2) = semigroup_and_gramian(&sys, 0.25).unwrap();
    assert!((&s - &s2).norm() < 1e-13);
    assert!((&g - &g2).norm() < 1e-13);
}

#[test]
fn wave_heat_structure() {
    let np = 12;
    let sys = wave_heat(np, 0.25, 0.75).unwrap();
    assert_eq!(sys.n(), 3 * np);
    assert_eq!(sys.m(), np);
    let wave = sys.a().view((0, 0), (2 * np, 2 * np)).into_owned();
    assert!((&wave + wave.transpose()).norm() < 1e-10);
    let active: usize = (0..np).filter(|&j| sys.b()[(np + j, j)] == 1.0).count();
    let h = 1.0 / 13.0;
    let expect = (1..=np).filter(|&j| (j as f64 * h) > 0.25 && (j as f64 * h) < 0.75).count();
    assert_eq!(active, expect);
    assert_eq!(sys.b().iter().filter(|x| **x != 0.0).count(), expect);
    // The heat block is the 3-point Laplacian.
    let heat = sys.a().view((2 * np, 2 * np), (np, np)).into_owned();
    assert!((heat[(0, 0)] + 2.0 / (h * h)).abs() < 1e-9);
    assert!((heat[(0, 1)] - 1.0 / (h * h)).abs() < 1e-9);
    // (L^{1/2})² = L.
    let root = sys.a().view((0, np), (np, np)).into_owned();
    assert!((&root * &root + &heat).norm() < 1e-8 * heat.norm());
}

#[test]
fn wave_heat_rejects_empty_control_set() {
    assert!(wave_heat(3, 0.3, 0.45).is_err());
    assert!(wave_heat(2, 0.1, 0.9).is_err());
    assert!(wave_heat(10, 0.7, 0.3).is_err());
}
