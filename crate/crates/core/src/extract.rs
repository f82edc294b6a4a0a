//! Band matrix assembly, rank-1 fitting, and the full extraction pipeline.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{
    normalize_rank1_factors, Envelope, ExtractionResult, FitDiagnostics, PhaseFunction, Signal,
};
use crate::theta::{
    band_indices, default_grid_size, extract_demodulated_band_with_cutoff, interp_phase_to_time,
    resample_to_phase, DemodulatedBand, DEFAULT_LAMBDA,
};

/// Upper bound on the automatically chosen band limit.
pub const MAX_DEFAULT_BAND_LIMIT: usize = 20;

const SVD_MAX_ITERATIONS: usize = 10_000;

/// Real n × (2K+1) matrix with columns `[Re g₀, Re g₁..Re g_K, Im g₁..Im g_K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    entries: DMatrix<f64>,
    band_limit: usize,
}

impl BandMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }
}

/// Builds the band matrix from bands `k = 0..=K`, given in order.
pub fn assemble_band_matrix(bands: &[DemodulatedBand]) -> Result<BandMatrix> {
    let first = bands
        .first()
        .ok_or_else(|| Error::InvalidParameter("no bands to assemble".into()))?;
    let n = first.values.len();
    for (i, band) in bands.iter().enumerate() {
        if band.k != i {
            return Err(Error::InvalidParameter(format!(
                "band at position {i} has harmonic index {}",
                band.k
            )));
        }
        if band.values.len() != n {
            return Err(Error::MismatchedLengths {
                expected: n,
                found: band.values.len(),
            });
        }
    }
    let k_max = bands.len() - 1;
    let entries = DMatrix::from_fn(n, 2 * k_max + 1, |row, col| {
        if col <= k_max {
            bands[col].values[row].re
        } else {
            bands[col - k_max].values[row].im
        }
    });
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteValue { index: 0 });
    }
    Ok(BandMatrix {
        entries,
        band_limit: k_max,
    })
}

/// Best rank-1 approximation σ₁·u₁v₁ᵀ of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Fit {
    /// u₁, unit norm.
    pub left: Vec<f64>,
    /// v₁, unit norm.
    pub right: Vec<f64>,
    pub sigma1: f64,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    /// ‖F − σ₁u₁v₁ᵀ‖²_F, evaluated directly.
    pub objective: f64,
}

impl Rank1Fit {
    pub fn rank1_energy_fraction(&self) -> f64 {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        if total > 0.0 {
            (self.sigma1 * self.sigma1 / total).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

/// Top singular triplet of `matrix`. Ties in σ₁ resolve to whichever pair
/// the decomposition reports first.
pub fn rank_one_fit(matrix: &DMatrix<f64>) -> Result<Rank1Fit> {
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteValue { index: 0 });
    }
    if matrix.is_empty() || matrix.norm() == 0.0 {
        return Err(Error::DegenerateInput);
    }
    let svd = matrix
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::NonConvergence)?;
    let (u, v_t) = match (svd.u.as_ref(), svd.v_t.as_ref()) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NonConvergence),
    };
    let sv = &svd.singular_values;
    let top = sv.imax();
    let sigma1 = sv[top];
    let left: Vec<f64> = u.column(top).iter().copied().collect();
    let right: Vec<f64> = v_t.row(top).iter().copied().collect();
    let mut singular_values: Vec<f64> = sv.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));

    let mut objective = 0.0;
    for (c, vc) in right.iter().enumerate() {
        for (r, ur) in left.iter().enumerate() {
            let d = matrix[(r, c)] - sigma1 * ur * vc;
            objective += d * d;
        }
    }
    Ok(Rank1Fit {
        left,
        right,
        sigma1,
        singular_values,
        objective,
    })
}

/// Maps the right singular vector `(Re c₀..Re c_K, Im c₁..Im c_K)` to
/// complex coefficients.
pub fn coefficients_from_right(right: &[f64]) -> Vec<Complex64> {
    let k_max = right.len() / 2;
    (0..=k_max)
        .map(|k| {
            if k == 0 {
                Complex64::new(right[0], 0.0)
            } else {
                Complex64::new(right[k], right[k_max + k])
            }
        })
        .collect()
}

/// Pipeline options. `None` fields take their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOptions {
    /// Band limit K of the shape function.
    pub band_limit: Option<usize>,
    /// Phase-grid size n (power of two).
    pub grid_size: Option<usize>,
    /// Remove band 0 before fitting, forcing c₀ = 0.
    pub zero_dc: bool,
    /// Envelope cutoff λ ∈ (0, 1/2] as a fraction of `l_theta`.
    pub envelope_cutoff: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            band_limit: None,
            grid_size: None,
            zero_dc: false,
            envelope_cutoff: DEFAULT_LAMBDA,
        }
    }
}

/// ⌊(n/2 − ⌈L/2⌉)/L⌋ capped at [`MAX_DEFAULT_BAND_LIMIT`].
pub fn default_band_limit(n: usize, l_theta: usize) -> usize {
    let room = (n / 2).saturating_sub(l_theta.div_ceil(2));
    (room / l_theta).min(MAX_DEFAULT_BAND_LIMIT)
}

/// Grid size and band limit the pipeline will use for these inputs.
pub fn resolve_sizes(samples: usize, l_theta: usize, options: &ExtractOptions) -> Result<(usize, usize)> {
    let n = options
        .grid_size
        .unwrap_or_else(|| default_grid_size(samples, l_theta));
    let k = match options.band_limit {
        Some(0) => {
            return Err(Error::InvalidParameter("band limit K must be at least 1".into()))
        }
        Some(k) => k,
        None => default_band_limit(n, l_theta).max(1),
    };
    band_indices(k, l_theta, n)?;
    Ok((n, k))
}

/// Extracts shape function, envelope, and residual for a known phase.
pub fn extract_shape(
    signal: &Signal,
    phase: &PhaseFunction,
    options: &ExtractOptions,
) -> Result<ExtractionResult> {
    let l_theta = phase.l_theta();
    let (n, k_max) = resolve_sizes(signal.len(), l_theta, options)?;
    let pds = resample_to_phase(signal, phase, n)?;

    let mut bands = (0..=k_max)
        .map(|k| extract_demodulated_band_with_cutoff(&pds, k, options.envelope_cutoff))
        .collect::<Result<Vec<_>>>()?;
    if options.zero_dc {
        bands[0].values.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    }
    let matrix = assemble_band_matrix(&bands)?;
    let fit = rank_one_fit(matrix.entries())?;

    let c_raw = coefficients_from_right(&fit.right);
    let (values_phase, shape) = normalize_rank1_factors(&fit.left, &c_raw, fit.sigma1)?;
    let shape = shape.with_phase_origin(phase.phase_origin());
    let values_time = interp_phase_to_time(&values_phase, phase);

    let carrier = 2.0 * PI * l_theta as f64;
    let residual = signal
        .values()
        .iter()
        .zip(&values_time)
        .zip(phase.normalized())
        .map(|((f, a), phi)| f - a * shape.eval(carrier * phi))
        .collect();

    Ok(ExtractionResult {
        shape,
        envelope: Envelope {
            values_phase,
            values_time,
        },
        residual,
        fit: FitDiagnostics {
            rank1_energy_fraction: fit.rank1_energy_fraction(),
            singular_values: fit.singular_values,
            objective_value: fit.objective,
        },
        l_theta,
        n,
    })
}
