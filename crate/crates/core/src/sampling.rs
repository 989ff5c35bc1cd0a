//! Deterministic point sets on the unit sphere.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Seeded source of standard normal variates.
pub struct NormalSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(seed: u64) -> Self {
        NormalSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform_open()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform_open();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(2.0 * PI * u2);
        self.spare = Some(r * s);
        r * c
    }

    pub fn normal_vector(&mut self, n: usize) -> DVector<f64> {
        DVector::from_iterator(n, (0..n).map(|_| self.normal()))
    }

    /// Uniformly distributed point on the unit sphere of ℝⁿ.
    pub fn unit_vector(&mut self, n: usize) -> DVector<f64> {
        loop {
            let v = self.normal_vector(n);
            let norm = v.norm();
            if norm > 1e-12 {
                return v / norm;
            }
        }
    }
}

/// `count` equally spaced points on the unit circle.
pub fn circle(count: usize) -> Vec<DVector<f64>> {
    (0..count)
        .map(|k| {
            let (s, c) = libm::sincos(2.0 * PI * k as f64 / count as f64);
            DVector::from_vec(alloc::vec![c, s])
        })
        .collect()
}

/// Fibonacci lattice of `count` nearly uniform points on the unit 2-sphere.
pub fn fibonacci_sphere(count: usize) -> Vec<DVector<f64>> {
    let golden = PI * (3.0 - libm::sqrt(5.0));
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let (s, c) = libm::sincos(golden * k as f64);
            DVector::from_vec(alloc::vec![r * c, r * s, z])
        })
        .collect()
}
