//! Phase-space resampling, spectrum, and harmonic band demodulation.
//!
//! The signal is resampled onto the uniform normalized-phase grid
//! φ_j = j/n, where φ = (θ − θ₀)/(θ_end − θ₀). On this grid the fundamental
//! of a signal with `l_theta` periods sits exactly at bin `l_theta`, and the
//! k-th harmonic band is centered at `k * l_theta`.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{NormalizedPhaseGrid, PhaseFunction, Signal};
use crate::spline::NaturalSpline;

/// Default envelope cutoff λ, as a fraction of `l_theta`.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Spectrum indexed by signed frequency ω = −n/2 .. n/2−1.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.bins.len()
    }

    pub fn at(&self, omega: i64) -> Complex64 {
        self.bins[self.slot(omega)]
    }

    /// Bins in ascending ω order, starting at −n/2.
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn omegas(&self) -> RangeInclusive<i64> {
        let half = (self.n() / 2) as i64;
        -half..=half - 1
    }

    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|c| c.norm_sqr()).sum()
    }

    fn slot(&self, omega: i64) -> usize {
        let half = (self.n() / 2) as i64;
        assert!(
            (-half..half).contains(&omega),
            "frequency {omega} out of range"
        );
        (omega + half) as usize
    }
}

/// Forward transform f̂(ω) = Σ_j x_j e^{−2πiωj/n}, ω = −n/2 .. n/2−1.
pub fn forward_spectrum(values: &[f64]) -> Result<Spectrum> {
    let n = values.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { n });
    }
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // fftshift: slot s holds ω = s − n/2
    buf.rotate_left(n / 2);
    Ok(Spectrum { bins: buf })
}

/// A signal resampled to the uniform normalized-phase grid, with its spectrum.
#[derive(Debug, Clone)]
pub struct PhaseDomainSignal {
    pub grid: NormalizedPhaseGrid,
    pub values: Vec<f64>,
    pub spectrum: Spectrum,
    pub l_theta: usize,
}

/// Smallest power of two ≥ max(samples, 8·l_theta).
pub fn default_grid_size(samples: usize, l_theta: usize) -> usize {
    samples.max(8 * l_theta).next_power_of_two()
}

/// Cubic-spline resampling of `signal` onto the φ grid of size `n`.
pub fn resample_to_phase(
    signal: &Signal,
    phase: &PhaseFunction,
    n: usize,
) -> Result<PhaseDomainSignal> {
    if phase.len() != signal.len() {
        return Err(Error::LengthMismatch {
            left: signal.len(),
            right: phase.len(),
        });
    }
    let grid = NormalizedPhaseGrid::new(n, phase.l_theta())?;
    let spline = NaturalSpline::new(&phase.normalized(), signal.values());
    let values = spline.eval_sorted(&grid.nodes());
    let spectrum = forward_spectrum(&values)?;
    Ok(PhaseDomainSignal {
        grid,
        values,
        spectrum,
        l_theta: phase.l_theta(),
    })
}

/// Closed band `[k·L − ⌊L/2⌋, k·L + ⌈L/2⌉ − 1]` around the k-th harmonic.
pub fn band_indices(k: usize, l_theta: usize, n: usize) -> Result<RangeInclusive<i64>> {
    let (kl, lo_half, hi_half) = (
        (k * l_theta) as i64,
        (l_theta / 2) as i64,
        l_theta.div_ceil(2) as i64,
    );
    if kl + hi_half > (n / 2) as i64 {
        return Err(Error::BandExceedsNyquist { k, l_theta, n });
    }
    Ok(kl - lo_half..=kl + hi_half - 1)
}

/// Offsets ω − k·L kept when fitting band k: `|ω − k·L| < λ·L`, inside
/// [`band_indices`].
///
/// With λ = 1/2 and even L this drops the bin at `k·L − L/2`, which is
/// shared with the conjugate of band −1 and lies outside the envelope space.
pub fn fit_offsets(l_theta: usize, lambda: f64) -> RangeInclusive<i64> {
    let cutoff = lambda * l_theta as f64;
    let lo_half = (l_theta / 2) as i64;
    let hi_half = l_theta.div_ceil(2) as i64 - 1;
    // largest integer strictly below the cutoff
    let reach = (cutoff.ceil() as i64 - 1).max(0);
    -(reach.min(lo_half))..=reach.min(hi_half)
}

/// Band k shifted to baseband.
#[derive(Debug, Clone, PartialEq)]
pub struct DemodulatedBand {
    pub k: usize,
    pub values: Vec<Complex64>,
}

/// g_k(φ_j) = (1/n) Σ_{ω ∈ band k} f̂(ω) e^{2πi(ω − k·L)j/n}, with the
/// default cutoff λ = 1/2.
pub fn extract_demodulated_band(pds: &PhaseDomainSignal, k: usize) -> Result<DemodulatedBand> {
    extract_demodulated_band_with_cutoff(pds, k, DEFAULT_LAMBDA)
}

pub fn extract_demodulated_band_with_cutoff(
    pds: &PhaseDomainSignal,
    k: usize,
    lambda: f64,
) -> Result<DemodulatedBand> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "envelope cutoff must lie in (0, 0.5], got {lambda}"
        )));
    }
    let n = pds.grid.n();
    band_indices(k, pds.l_theta, n)?;
    let center = (k * pds.l_theta) as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for offset in fit_offsets(pds.l_theta, lambda) {
        buf[offset.rem_euclid(n as i64) as usize] = pds.spectrum.at(center + offset);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Ok(DemodulatedBand { k, values: buf })
}

/// Re(g₀) + Σ_{k≥1} 2 Re(g_k e^{2πik·L·φ_j}): the part of the phase-domain
/// signal covered by `bands`.
pub fn remodulate(bands: &[DemodulatedBand], l_theta: usize) -> Vec<f64> {
    let n = bands.first().map_or(0, |b| b.values.len());
    let mut out = vec![0.0; n];
    for band in bands {
        let weight = if band.k == 0 { 1.0 } else { 2.0 };
        for (j, (o, g)) in out.iter_mut().zip(&band.values).enumerate() {
            // reduce j·k·L mod n before forming the angle
            let turns = ((j * band.k * l_theta) % n) as f64 / n as f64;
            let carrier = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * turns);
            *o += weight * (g * carrier).re;
        }
    }
    out
}

/// Interpolates values on the φ grid back to the time grid of `phase`.
///
/// The values are treated as one period of a 1-periodic function: a few
/// wrapped nodes are added on both sides so the natural end conditions fall
/// outside [0, 1].
pub fn interp_phase_to_time(values_phase: &[f64], phase: &PhaseFunction) -> Vec<f64> {
    const PAD: usize = 8;
    let n = values_phase.len();
    let pad = PAD.min(n);
    let mut xs = Vec::with_capacity(n + 2 * pad + 1);
    let mut ys = Vec::with_capacity(n + 2 * pad + 1);
    for j in (1..=pad).rev() {
        xs.push(-(j as f64) / n as f64);
        ys.push(values_phase[n - j]);
    }
    for (j, v) in values_phase.iter().enumerate() {
        xs.push(j as f64 / n as f64);
        ys.push(*v);
    }
    for j in 0..=pad {
        xs.push(1.0 + j as f64 / n as f64);
        ys.push(values_phase[j % n]);
    }
    NaturalSpline::new(&xs, &ys).eval_sorted(&phase.normalized())
}
