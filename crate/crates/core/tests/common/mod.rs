#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapewave::ShapeFunction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Direct O(n²) sum over ω = −n/2 .. n/2−1.
pub fn naive_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len() as i64;
    (-n / 2..n / 2)
        .map(|w| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| {
                    v * Complex64::from_polar(1.0, -2.0 * PI * (w * j as i64) as f64 / n as f64)
                })
                .sum()
        })
        .collect()
}

/// Alternating least squares for min ‖M − a bᵀ‖², from several starts.
pub fn als_rank_one(m: &DMatrix<f64>, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut best = f64::INFINITY;
    for _ in 0..4 {
        let mut b = DMatrix::from_vec(m.ncols(), 1, uniform_vec(&mut rng, m.ncols()));
        let mut prev = f64::INFINITY;
        for _ in 0..200_000 {
            let a = m * &b / b.norm_squared();
            b = m.transpose() * &a / a.norm_squared();
            let obj = (m - &a * b.transpose()).norm_squared();
            if (prev - obj).abs() <= 1e-16 * obj.max(1e-300) {
                prev = obj;
                break;
            }
            prev = obj;
        }
        best = best.min(prev);
    }
    best
}

/// Pearson correlation.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

pub const GRID: usize = 1024;

pub fn tau_grid() -> Vec<f64> {
    (0..GRID).map(|i| 2.0 * PI * i as f64 / GRID as f64).collect()
}

/// Correlation of s(τ) against reference(τ + offset) on the τ grid.
pub fn shape_correlation(s: &ShapeFunction, reference: impl Fn(f64) -> f64, offset: f64) -> f64 {
    let taus = tau_grid();
    let a: Vec<f64> = taus.iter().map(|&t| s.eval(t)).collect();
    let b: Vec<f64> = taus.iter().map(|&t| reference(t + offset)).collect();
    correlation(&a, &b)
}

/// Best correlation over circular shifts of the τ grid.
pub fn best_shift_correlation(s: &ShapeFunction, reference: impl Fn(f64) -> f64) -> f64 {
    let taus = tau_grid();
    let a: Vec<f64> = taus.iter().map(|&t| s.eval(t)).collect();
    let b: Vec<f64> = taus.iter().map(|&t| reference(t)).collect();
    (0..GRID)
        .map(|shift| {
            let rotated: Vec<f64> = (0..GRID).map(|i| b[(i + shift) % GRID]).collect();
            correlation(&a, &rotated)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Uniform samples on [0, 1] and the linear phase 2π·f·t.
pub fn tone(freq: usize, samples: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    let theta: Vec<f64> = t.iter().map(|t| 2.0 * PI * freq as f64 * t).collect();
    let f = theta.iter().map(|th| th.cos()).collect();
    (t, f, theta)
}
