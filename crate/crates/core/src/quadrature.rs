//! Gauss–Legendre rules for matrix-valued integrands.

use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for i in 0..order {
        // Tricomi initial guess, then Newton on P_order.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (order as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

// Returns (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel<F>(f: &F, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc: Option<DMatrix<f64>> = None;
    for (x, w) in nodes.iter().zip(weights) {
        let v = f(mid + half * x) * (w * half);
        acc = Some(match acc {
            Some(s) => s + v,
            None => v,
        });
    }
    acc.expect("rule has at least one node")
}

/// Composite rule with `panels` equal panels of `order` points each.
pub fn composite<F>(f: F, a: f64, b: f64, panels: usize, order: usize) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = panel(&f, a, a + h, &nodes, &weights);
    for k in 1..panels {
        let lo = a + k as f64 * h;
        total += panel(&f, lo, lo + h, &nodes, &weights);
    }
    total
}

const ADAPTIVE_ORDER: usize = 10;
const MAX_DEPTH: u32 = 40;

/// Adaptive Gauss–Legendre integration of a smooth matrix-valued function.
///
/// Panels are bisected until the whole-panel and two-half estimates agree to
/// `rtol` times the magnitude of the integral, apportioned by panel length.
/// Split points in `breaks` are honored exactly.
pub fn adaptive<F>(f: F, breaks: &[f64], rtol: f64) -> DMatrix<f64>
where
    F: Fn(f64) -> DMatrix<f64>,
{
    assert!(breaks.len() >= 2);
    let (nodes, weights) = gauss_legendre(ADAPTIVE_ORDER);
    let span = breaks[breaks.len() - 1] - breaks[0];

    let coarse = breaks
        .windows(2)
        .map(|w| composite(&f, w[0], w[1], 4, ADAPTIVE_ORDER))
        .reduce(|a, b| a + b)
        .expect("at least one interval");
    let scale = coarse.norm().max(f64::MIN_POSITIVE);

    let mut total = DMatrix::zeros(coarse.nrows(), coarse.ncols());
    let mut stack: Vec<(f64, f64, DMatrix<f64>, u32)> = breaks
        .windows(2)
        .map(|w| (w[0], w[1], panel(&f, w[0], w[1], &nodes, &weights), 0))
        .collect();
    while let Some((a, b, whole, depth)) = stack.pop() {
        let mid = 0.5 * (a + b);
        let left = panel(&f, a, mid, &nodes, &weights);
        let right = panel(&f, mid, b, &nodes, &weights);
        let refined = &left + &right;
        let err = (&refined - &whole).norm();
        if err <= rtol * scale * (b - a) / span || depth >= MAX_DEPTH {
            total += refined;
        } else {
            stack.push((a, mid, left, depth + 1));
            stack.push((mid, b, right, depth + 1));
        }
    }
    total
}
