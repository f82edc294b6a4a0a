//! Deterministic signal generators and CSV ingestion.
//!
//! Noise streams come from `ChaCha8Rng::seed_from_u64(seed)` feeding the
//! `rand_distr::StandardNormal` sampler, one draw per sample in time order.

mod csvio;
mod duffing;

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::signal::Signal;

pub use csvio::{load_phase_csv, load_signal_csv, write_columns_csv, write_phase_csv, write_signal_csv};
pub use duffing::{duffing_energy, gen_duffing, integrate_rk4, DuffingParams, Trajectory};

/// Additive white Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn clean() -> Self {
        NoiseSpec { sigma: 0.0, seed: 0 }
    }

    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise sigma must be >= 0, got {sigma}")));
        }
        Ok(NoiseSpec { sigma, seed })
    }

    /// Adds `sigma` times standard-normal draws in place. A zero sigma
    /// leaves the values untouched.
    pub fn apply(&self, values: &mut [f64]) {
        if self.sigma == 0.0 {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for v in values {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += self.sigma * z;
        }
    }
}

/// Example 1 ingredients: signal, exact phase and exact envelope.
#[derive(Debug, Clone)]
pub struct Example1 {
    pub signal: Signal,
    pub phases: Vec<f64>,
    pub envelope: Vec<f64>,
}

/// θ(t) = 40πt + 2cos(6πt).
pub fn example1_phase(t: f64) -> f64 {
    40.0 * PI * t + 2.0 * (6.0 * PI * t).cos()
}

/// a(t) = 1/(2 + sin 2πt).
pub fn example1_envelope(t: f64) -> f64 {
    1.0 / (2.0 + (2.0 * PI * t).sin())
}

/// s*(τ) = 1/(1.1 + cos(τ + cos 2τ)).
pub fn example1_shape(tau: f64) -> f64 {
    1.0 / (1.1 + (tau + (2.0 * tau).cos()).cos())
}

/// Example 1 on a uniform grid over [0, 1].
pub fn gen_example1(n_samples: usize, noise: NoiseSpec) -> Result<Example1> {
    if n_samples < 512 {
        return Err(Error::InvalidParameter(format!(
            "example 1 needs at least 512 samples, got {n_samples}"
        )));
    }
    let times: Vec<f64> = (0..n_samples)
        .map(|i| i as f64 / (n_samples - 1) as f64)
        .collect();
    let phases: Vec<f64> = times.iter().map(|&t| example1_phase(t)).collect();
    let envelope: Vec<f64> = times.iter().map(|&t| example1_envelope(t)).collect();
    let mut values: Vec<f64> = phases
        .iter()
        .zip(&envelope)
        .map(|(&th, &a)| a * example1_shape(th))
        .collect();
    noise.apply(&mut values);
    Ok(Example1 {
        signal: Signal::new(times, values)?,
        phases,
        envelope,
    })
}

/// f(t) = (1−t)·a(θ) + t·b(θ) with θ = 2π·l_theta·t on [0, 1]. Returns the
/// signal and its exact phase.
pub fn gen_morphing_shape(
    n_samples: usize,
    shape_a: impl Fn(f64) -> f64,
    shape_b: impl Fn(f64) -> f64,
    l_theta: usize,
) -> Result<(Signal, Vec<f64>)> {
    if l_theta == 0 {
        return Err(Error::InvalidParameter("l_theta must be positive".into()));
    }
    let times: Vec<f64> = (0..n_samples)
        .map(|i| i as f64 / (n_samples.max(2) - 1) as f64)
        .collect();
    let phases: Vec<f64> = times.iter().map(|t| 2.0 * PI * l_theta as f64 * t).collect();
    let values = times
        .iter()
        .zip(&phases)
        .map(|(&t, &th)| (1.0 - t) * shape_a(th) + t * shape_b(th))
        .collect();
    Ok((Signal::new(times, values)?, phases))
}
