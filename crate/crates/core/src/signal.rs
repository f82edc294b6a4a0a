//! Core domain types shared by the whole pipeline.
//!
//! Everything here is immutable after construction. Constructors validate
//! their invariants and report the first offending index.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples in a [`Signal`].
pub const MIN_SAMPLES: usize = 16;

/// Minimum number of whole periods spanned by a [`PhaseFunction`].
pub const MIN_PERIODS: usize = 4;

/// Largest accepted distance of the period count from an integer.
pub const PERIOD_TOLERANCE: f64 = 0.1;

/// Size of the τ grid used for shape normalization and sampling.
pub const SHAPE_GRID: usize = 1024;

/// A real signal sampled on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_signal(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Returns a copy with every value multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Signal> {
        Signal::new(
            self.times.clone(),
            self.values.iter().map(|v| v * gain).collect(),
        )
    }
}

/// Validates raw time/value sequences into a [`Signal`].
pub fn validate_signal(times: Vec<f64>, values: Vec<f64>) -> Result<Signal> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: times.len(),
            right: values.len(),
        });
    }
    if times.len() < MIN_SAMPLES {
        return Err(Error::TooShort {
            len: times.len(),
            min: MIN_SAMPLES,
        });
    }
    for (index, (t, v)) in times.iter().zip(&values).enumerate() {
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::NonFiniteValue { index });
        }
    }
    if let Some(index) = first_non_increasing(&times) {
        return Err(Error::NonIncreasingTimes { index });
    }
    Ok(Signal { times, values })
}

fn first_non_increasing(xs: &[f64]) -> Option<usize> {
    xs.windows(2).position(|w| w[1] <= w[0]).map(|i| i + 1)
}

/// Strictly increasing phase θ(t), aligned with a signal's time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction {
    phases: Vec<f64>,
    l_theta: usize,
}

impl PhaseFunction {
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Number of whole periods spanned by the phase.
    pub fn l_theta(&self) -> usize {
        self.l_theta
    }

    /// θ at the first sample.
    pub fn phase_origin(&self) -> f64 {
        self.phases[0]
    }

    pub fn span(&self) -> f64 {
        self.phases[self.phases.len() - 1] - self.phases[0]
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Normalized phase φ = (θ − θ₀)/(θ_end − θ₀) ∈ [0, 1] at every sample.
    pub fn normalized(&self) -> Vec<f64> {
        let origin = self.phase_origin();
        let span = self.span();
        let last = self.phases.len() - 1;
        self.phases
            .iter()
            .enumerate()
            .map(|(i, p)| if i == last { 1.0 } else { (p - origin) / span })
            .collect()
    }
}

/// Validates a raw phase sequence against `signal`'s time grid.
pub fn validate_phase(signal: &Signal, phases: Vec<f64>) -> Result<PhaseFunction> {
    if phases.len() != signal.len() {
        return Err(Error::LengthMismatch {
            left: signal.len(),
            right: phases.len(),
        });
    }
    if let Some(index) = phases.iter().position(|p| !p.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    if let Some(index) = first_non_increasing(&phases) {
        return Err(Error::NonMonotonePhase { index });
    }
    let periods = (phases[phases.len() - 1] - phases[0]) / (2.0 * PI);
    let l_theta = periods.round();
    if (periods - l_theta).abs() > PERIOD_TOLERANCE {
        return Err(Error::NotNearIntegerPeriods { periods });
    }
    let l_theta = l_theta as usize;
    if l_theta < MIN_PERIODS {
        return Err(Error::TooFewPeriods {
            l_theta,
            min: MIN_PERIODS,
        });
    }
    Ok(PhaseFunction { phases, l_theta })
}

/// Uniform grid φ_j = j/n on [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizedPhaseGrid {
    n: usize,
}

impl NormalizedPhaseGrid {
    /// `n` must be a power of two and at least `4 * l_theta`.
    pub fn new(n: usize, l_theta: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { n });
        }
        if n < 4 * l_theta {
            return Err(Error::GridTooCoarse {
                n,
                min: 4 * l_theta,
            });
        }
        Ok(NormalizedPhaseGrid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}

/// How the sign of the rank-1 factors was fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignConvention {
    /// Envelope mean is non-negative.
    NonNegativeEnvelopeMean,
    /// Coefficients taken as given.
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalization {
    /// max |s(τ)| over the [`SHAPE_GRID`] grid equals 1.
    pub peak_abs_one: bool,
    pub sign: SignConvention,
}

/// A real 2π-periodic shape function stored as one-sided Fourier coefficients.
///
/// `s(τ) = c₀ + 2 Σ_{k=1..K} Re(c_k e^{ikτ})`, the conjugate-symmetric
/// expansion `Σ_{k=-K..K} c_k e^{ikτ}` with `c_{-k} = conj(c_k)`.
///
/// τ is measured from `phase_origin`: the shape seen at absolute phase θ is
/// `s(θ − phase_origin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFunction {
    coeffs: Vec<Complex64>,
    normalization: Normalization,
    phase_origin: f64,
}

impl ShapeFunction {
    /// Builds an unnormalized shape. The imaginary part of `c₀` is dropped.
    pub fn from_coeffs(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("shape needs at least c0".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite shape coefficient".into()));
        }
        coeffs[0].im = 0.0;
        Ok(ShapeFunction {
            coeffs,
            normalization: Normalization {
                peak_abs_one: false,
                sign: SignConvention::Unspecified,
            },
            phase_origin: 0.0,
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// The band limit K.
    pub fn band_limit(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn phase_origin(&self) -> f64 {
        self.phase_origin
    }

    pub fn with_phase_origin(mut self, origin: f64) -> Self {
        self.phase_origin = origin;
        self
    }

    pub fn eval(&self, tau: f64) -> f64 {
        eval_coeffs(&self.coeffs, tau)
    }

    /// Evaluates at absolute phase θ.
    pub fn eval_at_phase(&self, theta: f64) -> f64 {
        self.eval(theta - self.phase_origin)
    }

    /// Samples on τ_i = 2πi/m, i = 0..m.
    pub fn sample(&self, m: usize) -> Vec<f64> {
        (0..m).map(|i| self.eval(tau_node(i, m))).collect()
    }

    /// max |s| on the [`SHAPE_GRID`] grid.
    pub fn peak_abs(&self) -> f64 {
        grid_peak(&self.coeffs)
    }
}

pub(crate) fn tau_node(i: usize, m: usize) -> f64 {
    2.0 * PI * i as f64 / m as f64
}

pub(crate) fn eval_coeffs(coeffs: &[Complex64], tau: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, tau);
    let mut e = rot;
    let mut acc = 0.0;
    for c in &coeffs[1..] {
        acc += (c * e).re;
        e *= rot;
    }
    coeffs[0].re + 2.0 * acc
}

fn grid_peak(coeffs: &[Complex64]) -> f64 {
    (0..SHAPE_GRID)
        .map(|i| eval_coeffs(coeffs, tau_node(i, SHAPE_GRID)).abs())
        .fold(0.0, f64::max)
}

/// Envelope a(t), on the phase grid and on the signal's time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub values_phase: Vec<f64>,
    pub values_time: Vec<f64>,
}

/// Diagnostics of the rank-1 fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub singular_values: Vec<f64>,
    /// s₁² / Σ sᵢ²; close to 1 when the band matrix is nearly rank 1.
    pub rank1_energy_fraction: f64,
    /// ‖F − s₁ u₁ v₁ᵀ‖²_F.
    pub objective_value: f64,
}

/// Output of a shape extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub shape: ShapeFunction,
    pub envelope: Envelope,
    /// r = f − a·s(θ) on the signal's time grid.
    pub residual: Vec<f64>,
    pub fit: FitDiagnostics,
    pub l_theta: usize,
    /// Phase-grid size used.
    pub n: usize,
}

impl ExtractionResult {
    /// ‖r‖₂ / ‖f‖₂.
    pub fn relative_residual(&self, signal: &Signal) -> f64 {
        let rn = norm(&self.residual);
        let fnorm = norm(signal.values());
        if fnorm == 0.0 {
            rn
        } else {
            rn / fnorm
        }
    }
}

pub(crate) fn norm(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fixes the scale and sign of a rank-1 pair.
///
/// The singular value is folded into the envelope, the shape is rescaled so
/// that max |s| = 1 on the τ grid, and the sign is chosen so the envelope
/// mean is non-negative. The product `envelope · s` is unchanged.
pub fn normalize_rank1_factors(
    a_raw: &[f64],
    c_raw: &[Complex64],
    s1: f64,
) -> Result<(Vec<f64>, ShapeFunction)> {
    if !(s1 > 0.0) || !s1.is_finite() {
        return Err(Error::DegenerateFactors("singular value is not positive"));
    }
    if a_raw.is_empty() || c_raw.is_empty() {
        return Err(Error::DegenerateFactors("empty factor"));
    }
    let mut coeffs = c_raw.to_vec();
    coeffs[0].im = 0.0;
    let beta = grid_peak(&coeffs);
    if !(beta > 0.0) {
        return Err(Error::DegenerateFactors("shape vanishes on the grid"));
    }
    let sign = envelope_sign(a_raw);
    let scale = sign * s1 * beta;
    let envelope = a_raw.iter().map(|a| a * scale).collect();
    for c in coeffs.iter_mut() {
        *c *= sign / beta;
    }
    let shape = ShapeFunction {
        coeffs,
        normalization: Normalization {
            peak_abs_one: true,
            sign: SignConvention::NonNegativeEnvelopeMean,
        },
        phase_origin: 0.0,
    };
    Ok((envelope, shape))
}

/// +1 or −1 such that `sign * mean(a) >= 0`. A vanishing mean falls back to
/// the sign of the largest-magnitude entry so that `a` and `-a` agree.
fn envelope_sign(a: &[f64]) -> f64 {
    let sum: f64 = a.iter().sum();
    let scale: f64 = a.iter().map(|x| x.abs()).sum();
    if sum.abs() > 1e-12 * scale {
        return sum.signum();
    }
    let mut best = 0.0f64;
    for &x in a {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn too_short_signal() {
        let err = validate_signal(vec![0.0, 0.5, 1.0], vec![1.0, 2.0, 3.0]).unwrap_err();
        assert_eq!(err, Error::TooShort { len: 3, min: 16 });
    }

    #[test]
    fn pure_tone_signal_is_valid() {
        let t = uniform(1024);
        let v = t.iter().map(|t| (2.0 * PI * 20.0 * t).cos()).collect();
        assert_eq!(Signal::new(t, v).unwrap().len(), 1024);
    }

    #[test]
    fn nan_reports_index() {
        let t = uniform(32);
        let mut v = vec![0.0; 32];
        v[7] = f64::NAN;
        assert_eq!(
            Signal::new(t, v).unwrap_err(),
            Error::NonFiniteValue { index: 7 }
        );
    }

    #[test]
    fn repeated_time_reports_index() {
        let mut t = uniform(32);
        t[10] = t[9];
        assert_eq!(
            Signal::new(t, vec![0.0; 32]).unwrap_err(),
            Error::NonIncreasingTimes { index: 10 }
        );
    }

    #[test]
    fn linear_phase_period_count() {
        let t = uniform(512);
        let s = Signal::new(t.clone(), vec![0.0; 512]).unwrap();
        let p = validate_phase(&s, t.iter().map(|t| 40.0 * PI * t).collect()).unwrap();
        assert_eq!(p.l_theta(), 20);
        assert_eq!(p.phase_origin(), 0.0);
    }

    #[test]
    fn modulated_phase_period_count() {
        let t = uniform(512);
        let s = Signal::new(t.clone(), vec![0.0; 512]).unwrap();
        let p = validate_phase(
            &s,
            t.iter()
                .map(|t| 40.0 * PI * t + 2.0 * (6.0 * PI * t).cos())
                .collect(),
        )
        .unwrap();
        assert_eq!(p.l_theta(), 20);
    }

    #[test]
    fn phase_errors() {
        let t = uniform(64);
        let s = Signal::new(t.clone(), vec![0.0; 64]).unwrap();
        let mut ph: Vec<f64> = t.iter().map(|t| 40.0 * PI * t).collect();
        ph[30] = ph[28];
        assert_eq!(
            validate_phase(&s, ph).unwrap_err(),
            Error::NonMonotonePhase { index: 30 }
        );
        let ph = t.iter().map(|t| 6.0 * PI * t).collect();
        assert!(matches!(
            validate_phase(&s, ph),
            Err(Error::TooFewPeriods { l_theta: 3, .. })
        ));
        let ph = t.iter().map(|t| 2.0 * PI * 10.5 * t).collect();
        assert!(matches!(
            validate_phase(&s, ph),
            Err(Error::NotNearIntegerPeriods { .. })
        ));
    }

    #[test]
    fn grid_checks() {
        assert!(NormalizedPhaseGrid::new(1000, 20).is_err());
        assert_eq!(
            NormalizedPhaseGrid::new(64, 20).unwrap_err(),
            Error::GridTooCoarse { n: 64, min: 80 }
        );
        let g = NormalizedPhaseGrid::new(128, 20).unwrap();
        assert_eq!(g.nodes()[64], 0.5);
    }

    #[test]
    fn single_harmonic_normalization() {
        let n = 64;
        let a_raw = vec![1.0 / (n as f64).sqrt(); n];
        let mut c_raw = vec![Complex64::new(0.0, 0.0); 4];
        c_raw[1] = Complex64::new(1.0, 0.0);
        let (env, shape) = normalize_rank1_factors(&a_raw, &c_raw, 5.0).unwrap();
        assert!((shape.peak_abs() - 1.0).abs() < 1e-12);
        // s_raw = 2 cos τ, so β = 2.
        let expected = 5.0 * 2.0 / (n as f64).sqrt();
        assert!(env.iter().all(|e| (e - expected).abs() < 1e-12));
        for i in 0..n {
            for tau in [0.0, 0.7, 2.1] {
                let before = 5.0 * a_raw[i] * eval_coeffs(&c_raw, tau);
                let after = env[i] * shape.eval(tau);
                assert!((before - after).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sign_flip_invariance() {
        let a_raw: Vec<f64> = (0..32).map(|i| 0.3 + (i as f64 * 0.4).sin()).collect();
        let c_raw = vec![
            Complex64::new(0.1, 0.0),
            Complex64::new(0.5, -0.2),
            Complex64::new(-0.1, 0.3),
        ];
        let (e1, s1) = normalize_rank1_factors(&a_raw, &c_raw, 2.0).unwrap();
        let neg_a: Vec<f64> = a_raw.iter().map(|x| -x).collect();
        let neg_c: Vec<Complex64> = c_raw.iter().map(|c| -c).collect();
        let (e2, s2) = normalize_rank1_factors(&neg_a, &neg_c, 2.0).unwrap();
        assert_eq!(e1, e2);
        assert_eq!(s1, s2);
        assert!(e1.iter().sum::<f64>() >= 0.0);
    }

    #[test]
    fn zero_mean_envelope_sign_is_stable() {
        let a_raw = vec![1.0, -1.0, 2.0, -2.0];
        let c_raw = vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)];
        let (e1, _) = normalize_rank1_factors(&a_raw, &c_raw, 1.0).unwrap();
        let neg: Vec<f64> = a_raw.iter().map(|x| -x).collect();
        let neg_c: Vec<Complex64> = c_raw.iter().map(|c| -c).collect();
        let (e2, _) = normalize_rank1_factors(&neg, &neg_c, 1.0).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn zero_singular_value_is_degenerate() {
        let c = vec![Complex64::new(1.0, 0.0)];
        assert!(matches!(
            normalize_rank1_factors(&[1.0], &c, 0.0),
            Err(Error::DegenerateFactors(_))
        ));
    }
}
