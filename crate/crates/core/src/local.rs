//! Windowed extraction: one shape function per center, tracked over time.
//!
//! Around a center sample m the window keeps every sample with
//! `|θ(t_j) − θ(t_m)| ≤ 2π·⌊μ⌋`, i.e. ⌊μ⌋ periods on each side, and tapers
//! it with the raised cosine `½(1 + cos((θ − θ_m)/(2⌊μ⌋)))`, which is 1 at
//! the center and 0 at the window edges.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::distance::shape_distance;
use crate::error::{Error, Result};
use crate::extract::{default_band_limit, extract_shape, ExtractOptions, MAX_DEFAULT_BAND_LIMIT};
use crate::signal::{validate_phase, PhaseFunction, ShapeFunction, Signal, PERIOD_TOLERANCE};
use crate::theta::default_grid_size;

pub const DEFAULT_MU: f64 = 3.0;

/// Minimum number of periods a window must hold before fitting.
pub const MIN_WINDOW_PERIODS: f64 = 2.0;

/// Local extraction settings.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    /// Half-width in periods; only the integer part is used.
    pub mu: f64,
    /// Center sample indices, ascending.
    pub centers: Vec<usize>,
    pub taper: bool,
}

/// A tapered slice of the signal around one center.
#[derive(Debug, Clone)]
pub struct Segment {
    pub signal: Signal,
    pub phase: PhaseFunction,
    /// Taper weights χ, one per segment sample.
    pub taper: Vec<f64>,
    /// Index of the first segment sample in the parent signal.
    pub start: usize,
    /// Index of the center within the segment.
    pub center: usize,
}

fn half_width_periods(mu: f64) -> Result<usize> {
    if !(mu >= 1.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("mu must be at least 1, got {mu}")));
    }
    Ok(mu.floor() as usize)
}

/// χ at phase offset `d` from the center, for a half-width of `h` periods.
pub fn taper_weight(d: f64, h: usize) -> f64 {
    0.5 * (1.0 + (d / (2.0 * h as f64)).cos())
}

/// Cuts the window around sample `m` and applies the taper.
///
/// Windows clipped by the record boundary are shortened to a whole number
/// of periods, measured from the unclipped side.
pub fn window_segment(
    signal: &Signal,
    phase: &PhaseFunction,
    m: usize,
    mu: f64,
) -> Result<Segment> {
    cut_window(signal, phase, m, mu, true)
}

fn cut_window(
    signal: &Signal,
    phase: &PhaseFunction,
    m: usize,
    mu: f64,
    taper_on: bool,
) -> Result<Segment> {
    let h = half_width_periods(mu)?;
    let theta = phase.phases();
    if m >= theta.len() {
        return Err(Error::InvalidParameter(format!(
            "center {m} outside a signal of {} samples",
            theta.len()
        )));
    }
    let center = theta[m];
    let half = 2.0 * PI * h as f64;
    let tol = 1e-12 * (half + center.abs());
    let mut lo = theta.partition_point(|&x| x < center - half - tol);
    let mut hi = theta.partition_point(|&x| x <= center + half + tol) - 1;

    let periods = (theta[hi] - theta[lo]) / (2.0 * PI);
    if periods < MIN_WINDOW_PERIODS {
        return Err(Error::WindowTooShort { center: m, periods });
    }
    if (periods - periods.round()).abs() > PERIOD_TOLERANCE {
        let whole = 2.0 * PI * periods.floor();
        let clipped_left = lo == 0;
        let clipped_right = hi == theta.len() - 1;
        if clipped_left && !clipped_right {
            lo = theta.partition_point(|&x| x < theta[hi] - whole - tol);
        } else {
            hi = theta.partition_point(|&x| x <= theta[lo] + whole + tol) - 1;
        }
    }

    let taper: Vec<f64> = theta[lo..=hi]
        .iter()
        .map(|t| if taper_on { taper_weight(t - center, h) } else { 1.0 })
        .collect();
    let values = signal.values()[lo..=hi]
        .iter()
        .zip(&taper)
        .map(|(f, w)| f * w)
        .collect();
    let seg = Signal::new(signal.times()[lo..=hi].to_vec(), values)?;
    let seg_phase = validate_phase(&seg, theta[lo..=hi].to_vec())?;
    Ok(Segment {
        signal: seg,
        phase: seg_phase,
        taper,
        start: lo,
        center: m - lo,
    })
}

/// Divides a tapered-window envelope by the taper where χ > 0.1; other
/// samples are unreliable and come back as `None`.
pub fn debias_envelope(values_time: &[f64], taper: &[f64]) -> Vec<Option<f64>> {
    values_time
        .iter()
        .zip(taper)
        .map(|(a, w)| (*w > 0.1).then(|| a / w))
        .collect()
}

/// Successful extraction at one center.
#[derive(Debug, Clone)]
pub struct LocalShape {
    pub shape: ShapeFunction,
    /// Envelope at the center, divided by the taper.
    pub center_envelope: f64,
    pub l_theta: usize,
    pub band_limit: usize,
    pub rank1_energy_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct TrackEntry {
    pub center_index: usize,
    pub time: f64,
    pub outcome: std::result::Result<LocalShape, Error>,
}

/// Shapes along a list of centers, with the drift between neighbours.
#[derive(Debug, Clone)]
pub struct ShapeTrack {
    pub entries: Vec<TrackEntry>,
    /// `drift[i]` = distance from entry i−1 to entry i; `None` for the first
    /// entry or when either side failed.
    pub drift: Vec<Option<f64>>,
}

impl ShapeTrack {
    pub fn centers(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.time).collect()
    }

    pub fn shapes(&self) -> Vec<Option<&ShapeFunction>> {
        self.entries
            .iter()
            .map(|e| e.outcome.as_ref().ok().map(|l| &l.shape))
            .collect()
    }

    /// True when at least one center failed.
    pub fn is_partial(&self) -> bool {
        self.entries.iter().any(|e| e.outcome.is_err())
    }

    /// Distance between the first and last successful shapes.
    pub fn cumulative_drift(&self) -> Option<f64> {
        let ok: Vec<&ShapeFunction> = self.shapes().into_iter().flatten().collect();
        match (ok.first(), ok.last()) {
            (Some(a), Some(b)) => Some(shape_distance(a, b)),
            _ => None,
        }
    }
}

fn extract_at(
    signal: &Signal,
    phase: &PhaseFunction,
    m: usize,
    spec: &WindowSpec,
    band_limit: Option<usize>,
) -> std::result::Result<LocalShape, Error> {
    let seg = cut_window(signal, phase, m, spec.mu, spec.taper)?;
    let l_theta = seg.phase.l_theta();
    let n = default_grid_size(seg.signal.len(), l_theta);
    let feasible = default_band_limit(n, l_theta).max(1);
    let k = band_limit.unwrap_or(MAX_DEFAULT_BAND_LIMIT).min(feasible);
    let opts = ExtractOptions {
        band_limit: Some(k),
        grid_size: Some(n),
        ..Default::default()
    };
    let res = extract_shape(&seg.signal, &seg.phase, &opts)?;
    let center_envelope = res.envelope.values_time[seg.center] / seg.taper[seg.center];
    Ok(LocalShape {
        shape: res.shape,
        center_envelope,
        l_theta,
        band_limit: k,
        rank1_energy_fraction: res.fit.rank1_energy_fraction,
    })
}

/// Runs a tapered windowed extraction at every center. Per-center failures
/// are recorded in the track; only invalid arguments abort.
pub fn extract_shape_track(
    signal: &Signal,
    phase: &PhaseFunction,
    centers: &[usize],
    mu: f64,
    band_limit: Option<usize>,
) -> Result<ShapeTrack> {
    let spec = WindowSpec {
        mu,
        centers: centers.to_vec(),
        taper: true,
    };
    extract_shape_track_with(signal, phase, &spec, band_limit)
}

pub fn extract_shape_track_with(
    signal: &Signal,
    phase: &PhaseFunction,
    spec: &WindowSpec,
    band_limit: Option<usize>,
) -> Result<ShapeTrack> {
    half_width_periods(spec.mu)?;
    let centers = &spec.centers;
    if centers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("centers must be strictly ascending".into()));
    }
    if let Some(&last) = centers.last() {
        if last >= signal.len() {
            return Err(Error::InvalidParameter(format!(
                "center {last} outside a signal of {} samples",
                signal.len()
            )));
        }
    }
    if band_limit == Some(0) {
        return Err(Error::InvalidParameter("band limit K must be at least 1".into()));
    }

    let entries: Vec<TrackEntry> = centers
        .par_iter()
        .map(|&m| TrackEntry {
            center_index: m,
            time: signal.times()[m],
            outcome: extract_at(signal, phase, m, spec, band_limit),
        })
        .collect();

    let mut drift = vec![None; entries.len()];
    for i in 1..entries.len() {
        if let (Ok(a), Ok(b)) = (&entries[i - 1].outcome, &entries[i].outcome) {
            drift[i] = Some(shape_distance(&a.shape, &b.shape));
        }
    }
    Ok(ShapeTrack { entries, drift })
}

/// Centers spaced eight per period of travel, restricted to samples whose
/// full window lies inside the record.
pub fn default_centers(signal: &Signal, phase: &PhaseFunction, mu: f64) -> Result<Vec<usize>> {
    let h = half_width_periods(mu)?;
    let step = signal.len().div_ceil(8 * phase.l_theta()).max(1);
    let theta = phase.phases();
    let half = 2.0 * PI * h as f64;
    let (first, last) = (theta[0], theta[theta.len() - 1]);
    Ok((0..signal.len())
        .step_by(step)
        .filter(|&m| theta[m] - half >= first && theta[m] + half <= last)
        .collect())
}
