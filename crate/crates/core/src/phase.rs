//! Phase functions for extraction: validated user phases, or a band-isolation
//! estimate built from the analytic signal of the fundamental.
//!
//! The estimator is a surrogate, not a sparse time-frequency solver. It
//! finds the dominant fundamental, keeps the spectral band around it, takes
//! the unwrapped angle of the one-sided signal, and low-passes that angle's
//! deviation from a linear trend. Angles near both record ends are less
//! reliable than in the interior.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{validate_phase, PhaseFunction, Signal, MIN_PERIODS, PERIOD_TOLERANCE};
use crate::spline::NaturalSpline;

/// A peak must beat the median bin power by this factor.
const SIGNIFICANCE: f64 = 10.0;
/// A peak must beat every unrelated competitor by this factor.
const UNIQUENESS_MARGIN: f64 = 1.05;
/// Relative power a subharmonic needs to be taken as the fundamental.
const SUBHARMONIC_SHARE: f64 = 0.25;
/// Lowest bin searched for the fundamental. Slower lines (envelope and
/// baseline drift) cannot be the carrier of a valid phase.
const LOWEST_BIN: usize = MIN_PERIODS - 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEstimateConfig {
    /// Expected number of cycles over the record.
    pub fundamental_hint: Option<f64>,
    /// Half-width of the isolated band, as a fraction of the fundamental.
    pub bandwidth: f64,
    /// Cutoff λ for the phase deviation, as a fraction of the cycle count.
    pub smoothing_cutoff: f64,
}

impl Default for PhaseEstimateConfig {
    fn default() -> Self {
        PhaseEstimateConfig {
            fundamental_hint: None,
            bandwidth: 0.5,
            smoothing_cutoff: 0.5,
        }
    }
}

impl PhaseEstimateConfig {
    fn check(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must lie in (0, 1), got {}",
                self.bandwidth
            )));
        }
        if !(self.smoothing_cutoff > 0.0 && self.smoothing_cutoff <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "smoothing cutoff must lie in (0, 0.5], got {}",
                self.smoothing_cutoff
            )));
        }
        if let Some(h) = self.fundamental_hint {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!("bad fundamental hint {h}")));
            }
        }
        Ok(())
    }
}

/// Validates caller-supplied phase samples.
pub fn exact_phase_from_samples(signal: &Signal, phases: Vec<f64>) -> Result<PhaseFunction> {
    validate_phase(signal, phases)
}

/// Estimates θ and validates it as a [`PhaseFunction`].
pub fn estimate_phase(signal: &Signal, config: &PhaseEstimateConfig) -> Result<PhaseFunction> {
    let raw = estimate_raw_phase(signal, config)?;
    validate_phase(signal, raw)
}

/// Estimated θ at every sample, strictly increasing but not checked for a
/// whole number of periods.
pub fn estimate_raw_phase(signal: &Signal, config: &PhaseEstimateConfig) -> Result<Vec<f64>> {
    config.check()?;
    let times = signal.times();
    if is_uniform(times) {
        return estimate_uniform(signal.values(), config);
    }
    let n = times.len();
    let (t0, t1) = (times[0], times[n - 1]);
    let grid: Vec<f64> = (0..n)
        .map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64)
        .collect();
    let resampled = NaturalSpline::new(times, signal.values()).eval_sorted(&grid);
    let theta = estimate_uniform(&resampled, config)?;
    let back = NaturalSpline::new(&grid, &theta).eval_sorted(times);
    check_monotone(&back)?;
    Ok(back)
}

/// Cuts the record at the last sample completing a whole number of periods
/// of `phases`, so the result passes the period-count check. Records already
/// within tolerance of a whole number are returned unchanged.
pub fn trim_to_whole_periods(signal: &Signal, phases: &[f64]) -> Result<(Signal, Vec<f64>)> {
    if phases.len() != signal.len() {
        return Err(Error::LengthMismatch {
            left: signal.len(),
            right: phases.len(),
        });
    }
    let span = phases[phases.len() - 1] - phases[0];
    let periods = span / (2.0 * PI);
    if (periods - periods.round()).abs() <= PERIOD_TOLERANCE {
        return Ok((signal.clone(), phases.to_vec()));
    }
    let whole = periods.floor();
    let target = phases[0] + 2.0 * PI * whole;
    let after = phases.partition_point(|&p| p < target).min(phases.len() - 1);
    let end = if after > 0 && (target - phases[after - 1]) < (phases[after] - target) {
        after - 1
    } else {
        after
    };
    let sig = Signal::new(
        signal.times()[..=end].to_vec(),
        signal.values()[..=end].to_vec(),
    )?;
    Ok((sig, phases[..=end].to_vec()))
}

fn is_uniform(times: &[f64]) -> bool {
    let n = times.len();
    let mean = (times[n - 1] - times[0]) / (n - 1) as f64;
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - mean).abs() <= 1e-6 * mean)
}

fn check_monotone(theta: &[f64]) -> Result<()> {
    match theta.windows(2).position(|w| w[1] <= w[0]) {
        Some(i) => Err(Error::NonMonotoneEstimate { index: i + 1 }),
        None => Ok(()),
    }
}

fn estimate_uniform(values: &[f64], config: &PhaseEstimateConfig) -> Result<Vec<f64>> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut spec: Vec<Complex64> = values.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spec);

    let power: Vec<f64> = spec[..=n / 2].iter().map(|c| c.norm_sqr()).collect();
    let f0 = find_fundamental(&power, config)?;

    // one-sided band around the fundamental
    let reach = config.bandwidth * f0;
    let mut analytic = vec![Complex64::new(0.0, 0.0); n];
    for (b, slot) in analytic.iter_mut().enumerate().take(n / 2 + 1).skip(1) {
        if (b as f64 - f0).abs() < reach {
            *slot = spec[b] * 2.0;
        }
    }
    planner.plan_fft_inverse(n).process(&mut analytic);
    let unwrapped = unwrap(analytic.iter().map(|z| z.arg()));

    let theta = smooth_phase(&unwrapped, config.smoothing_cutoff * f0, &mut planner);
    check_monotone(&theta)?;
    Ok(theta)
}

/// Mean power over the window of half-width r(b) = max(1, round(bw·b/2)).
fn band_scores(power: &[f64], bandwidth: f64) -> Vec<(f64, usize)> {
    let top = power.len() - 1;
    let mut prefix = vec![0.0; power.len() + 1];
    for (i, p) in power.iter().enumerate() {
        prefix[i + 1] = prefix[i] + p;
    }
    (0..=top)
        .map(|b| {
            if b == 0 {
                return (0.0, 0);
            }
            let r = ((bandwidth * b as f64 / 2.0).round() as usize).max(1);
            let lo = b.saturating_sub(r).max(1);
            let hi = (b + r).min(top);
            ((prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64, r)
        })
        .collect()
}

fn find_fundamental(power: &[f64], config: &PhaseEstimateConfig) -> Result<f64> {
    let top = power.len() - 1;
    if top < LOWEST_BIN + 1 {
        return Err(Error::AmbiguousFundamental("record too short".into()));
    }
    let scores = band_scores(power, config.bandwidth);
    let argmax = |range: std::ops::RangeInclusive<usize>| {
        range
            .filter(|&b| b >= LOWEST_BIN && b <= top)
            .max_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0))
    };

    let peak = match config.fundamental_hint {
        Some(h) => {
            let lo = (h * (1.0 - config.bandwidth / 2.0)).floor() as usize;
            let hi = (h * (1.0 + config.bandwidth / 2.0)).ceil() as usize;
            argmax(lo..=hi.min(top))
                .ok_or_else(|| Error::AmbiguousFundamental("hint outside the spectrum".into()))?
        }
        None => {
            let peak = argmax(LOWEST_BIN..=top).unwrap_or(LOWEST_BIN);
            let mut sorted: Vec<f64> = power[1..].to_vec();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[sorted.len() / 2];
            let best = scores[peak].0;
            if !(best > 0.0) || best < SIGNIFICANCE * median {
                return Err(Error::AmbiguousFundamental(format!(
                    "peak power {best:.3e} is not {SIGNIFICANCE}x the median {median:.3e}"
                )));
            }
            let lobe = 2 * scores[peak].1;
            let rival = (LOWEST_BIN..=top)
                .filter(|b| b.abs_diff(peak) > lobe)
                .map(|b| scores[b].0)
                .fold(0.0, f64::max);
            if best < UNIQUENESS_MARGIN * rival {
                return Err(Error::AmbiguousFundamental(format!(
                    "peak near bin {peak} is not unique (rival power ratio {:.3})",
                    rival / best
                )));
            }
            // prefer the lowest strong subharmonic
            (2..=4)
                .rev()
                .map(|m| (peak as f64 / m as f64).round() as usize)
                .find(|&b| {
                    b >= LOWEST_BIN
                        && scores[b].0 >= SUBHARMONIC_SHARE * best
                        && scores[b].0 >= SIGNIFICANCE * median
                })
                .unwrap_or(peak)
        }
    };

    // power-weighted centroid over the peak's window
    let r = scores[peak].1;
    let (mut num, mut den) = (0.0, 0.0);
    for b in peak.saturating_sub(r).max(1)..=(peak + r).min(top) {
        num += b as f64 * power[b];
        den += power[b];
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Ok(peak as f64)
    }
}

fn unwrap(angles: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for a in angles {
        if let Some(p) = prev {
            let mut d = a - p;
            while d > PI {
                d -= 2.0 * PI;
                offset -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
                offset += 2.0 * PI;
            }
        }
        prev = Some(a);
        out.push(a + offset);
    }
    out
}

/// Least-squares linear trend plus the deviation low-passed below
/// `cutoff_cycles` cycles per record. The deviation is evenly extended
/// before filtering so that both record ends stay continuous.
fn smooth_phase(psi: &[f64], cutoff_cycles: f64, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = psi.len();
    let xm = (n - 1) as f64 / 2.0;
    let ym = psi.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in psi.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    let trend = |i: usize| ym + slope * (i as f64 - xm);

    let m = 2 * (n - 1);
    let mut ext: Vec<Complex64> = (0..m)
        .map(|i| {
            let j = if i < n { i } else { m - i };
            Complex64::new(psi[j] - trend(j), 0.0)
        })
        .collect();
    planner.plan_fft_forward(m).process(&mut ext);
    // bin q of the extended sequence is q/2 cycles over the record
    let keep = 2.0 * cutoff_cycles;
    for (q, c) in ext.iter_mut().enumerate() {
        let freq = q.min(m - q) as f64;
        if freq >= keep {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(m).process(&mut ext);
    (0..n).map(|i| trend(i) + ext[i].re / m as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, n: usize) -> Signal {
        let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let v = t.iter().map(|t| (2.0 * PI * freq * t).cos()).collect();
        Signal::new(t, v).unwrap()
    }

    #[test]
    fn pure_tone_frequency() {
        let sig = tone(20.0, 2048);
        let p = estimate_phase(&sig, &PhaseEstimateConfig::default()).unwrap();
        assert_eq!(p.l_theta(), 20);
        let th = p.phases();
        let dt = sig.times()[1] - sig.times()[0];
        for i in 103..1945 {
            let inst = (th[i + 1] - th[i - 1]) / (2.0 * dt) / (2.0 * PI);
            assert!((inst - 20.0).abs() < 0.2, "i={i} f={inst}");
        }
    }

    #[test]
    fn hint_selects_a_component() {
        let n = 2048;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let v = t
            .iter()
            .map(|t| (2.0 * PI * 12.0 * t).cos() + 1.2 * (2.0 * PI * 40.0 * t).cos())
            .collect();
        let sig = Signal::new(t, v).unwrap();
        let cfg = PhaseEstimateConfig {
            fundamental_hint: Some(12.0),
            bandwidth: 0.3,
            ..Default::default()
        };
        assert_eq!(estimate_phase(&sig, &cfg).unwrap().l_theta(), 12);
    }

    #[test]
    fn constant_signal_is_ambiguous() {
        let t: Vec<f64> = (0..256).map(|i| i as f64).collect();
        let sig = Signal::new(t, vec![1.0; 256]).unwrap();
        assert!(matches!(
            estimate_phase(&sig, &PhaseEstimateConfig::default()),
            Err(Error::AmbiguousFundamental(_))
        ));
    }

    #[test]
    fn white_noise_is_ambiguous() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        for seed in 0..10 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let t: Vec<f64> = (0..2048).map(|i| i as f64).collect();
            let v = (0..2048).map(|_| StandardNormal.sample(&mut rng)).collect();
            let sig = Signal::new(t, v).unwrap();
            assert!(matches!(
                estimate_phase(&sig, &PhaseEstimateConfig::default()),
                Err(Error::AmbiguousFundamental(_))
            ));
        }
    }

    #[test]
    fn bad_config() {
        let sig = tone(20.0, 512);
        let cfg = PhaseEstimateConfig {
            bandwidth: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            estimate_phase(&sig, &cfg),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn trim_to_whole_periods_cuts_the_tail() {
        let n = 1000;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let ph: Vec<f64> = t.iter().map(|t| 2.0 * PI * 10.4 * t).collect();
        let sig = Signal::new(t, vec![0.0; n]).unwrap();
        let (s2, p2) = trim_to_whole_periods(&sig, &ph).unwrap();
        let p = validate_phase(&s2, p2).unwrap();
        assert_eq!(p.l_theta(), 10);
        assert!((p.span() / (2.0 * PI) - 10.0).abs() < 0.01);
    }

    #[test]
    fn nonuniform_times_are_resampled() {
        let n = 2048;
        let t: Vec<f64> = (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                u + 0.002 * (2.0 * PI * u).sin()
            })
            .collect();
        let v = t.iter().map(|t| (2.0 * PI * 16.0 * t).cos()).collect();
        let sig = Signal::new(t, v).unwrap();
        assert_eq!(
            estimate_phase(&sig, &PhaseEstimateConfig::default()).unwrap().l_theta(),
            16
        );
    }
}
