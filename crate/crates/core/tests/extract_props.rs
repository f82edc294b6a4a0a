mod common;

use std::f64::consts::PI;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use shapewave::datasets::{example1_shape, gen_example1, NoiseSpec};
use shapewave::extract::{assemble_band_matrix, coefficients_from_right, rank_one_fit};
use shapewave::signal::normalize_rank1_factors;
use shapewave::theta::{extract_demodulated_band, resample_to_phase, Spectrum};
use shapewave::{
    extract_shape, shape_distance, validate_phase, ExtractOptions, ShapeFunction, Signal,
};

fn objective(m: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            acc += (m[(r, c)] - a[r] * b[c]).powi(2);
        }
    }
    acc
}

#[test]
fn svd_beats_random_rank_one_candidates() {
    let mut r = rng(11);
    for trial in 0..100 {
        let rows = r.random_range(1..=32);
        let cols = r.random_range(1..=9);
        let m = DMatrix::from_vec(rows, cols, uniform_vec(&mut r, rows * cols));
        let fit = rank_one_fit(&m).unwrap();
        let a: Vec<f64> = fit.left.iter().map(|u| u * fit.sigma1).collect();
        let best = objective(&m, &a, &fit.right);
        assert!((best - fit.objective).abs() <= 1e-9 * m.norm_squared().max(1.0));
        for _ in 0..1000 {
            let ca = uniform_vec(&mut r, rows);
            let cb = uniform_vec(&mut r, cols);
            assert!(best <= objective(&m, &ca, &cb) + 1e-12, "trial {trial}");
        }
        assert!((best - als_rank_one(&m, trial)).abs() <= 1e-8 * m.norm_squared().max(1.0));
    }
}

#[test]
fn identity_tie_still_gives_a_unit_pair() {
    let fit = rank_one_fit(&DMatrix::identity(3, 3)).unwrap();
    assert!((fit.sigma1 - 1.0).abs() < 1e-12);
    let nu: f64 = fit.left.iter().map(|x| x * x).sum();
    let nv: f64 = fit.right.iter().map(|x| x * x).sum();
    assert!((nu - 1.0).abs() < 1e-12 && (nv - 1.0).abs() < 1e-12);
    assert!((fit.objective - 2.0).abs() < 1e-12);
}

/// Band matrix of the clean Example 1 at N = 2048 with bands 0..=k_max.
fn example1_bands(n: usize, k_max: usize) -> DMatrix<f64> {
    let ex = gen_example1(4096, NoiseSpec::clean()).unwrap();
    let phase = validate_phase(&ex.signal, ex.phases).unwrap();
    let pds = resample_to_phase(&ex.signal, &phase, n).unwrap();
    let bands: Vec<_> = (0..=k_max)
        .map(|k| extract_demodulated_band(&pds, k).unwrap())
        .collect();
    assemble_band_matrix(&bands).unwrap().entries().clone()
}

fn columns_for(k: usize, k_max: usize) -> Vec<usize> {
    (0..=k).chain(k_max + 1..=k_max + k).collect()
}

#[test]
fn larger_band_limit_never_increases_misfit() {
    let k_max = 40;
    let full = example1_bands(2048, k_max);
    let mut prev = f64::INFINITY;
    for k in 0..=k_max {
        let keep = columns_for(k, k_max);
        let sub = full.select_columns(&keep);
        let dropped: f64 = (0..full.ncols())
            .filter(|c| !keep.contains(c))
            .map(|c| full.column(c).norm_squared())
            .sum();
        let total = rank_one_fit(&sub).unwrap().objective + dropped;
        assert!(total <= prev + 1e-9, "K = {k}: {total} > {prev}");
        prev = total;
    }
}

#[test]
fn residual_is_orthogonal_to_the_fit() {
    let m = example1_bands(2048, 20);
    let fit = rank_one_fit(&m).unwrap();
    let mut inner = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let uv = fit.left[r] * fit.right[c];
            inner += (m[(r, c)] - fit.sigma1 * uv) * uv;
        }
    }
    assert!(inner.abs() <= 1e-9 * m.norm(), "{inner:e}");
}

fn example1_with_gain(gain: f64) -> (Signal, shapewave::PhaseFunction) {
    let ex = gen_example1(4096, NoiseSpec::clean()).unwrap();
    let sig = ex.signal.scaled(gain).unwrap();
    let phase = validate_phase(&sig, ex.phases).unwrap();
    (sig, phase)
}

fn envelope_spectrum(values: &[f64]) -> Spectrum {
    shapewave::theta::forward_spectrum(values).unwrap()
}

#[test]
fn envelope_is_band_limited() {
    let (sig, phase) = example1_with_gain(1.0);
    let res = extract_shape(&sig, &phase, &ExtractOptions::default()).unwrap();
    let s = envelope_spectrum(&res.envelope.values_phase);
    let limit = res.l_theta.div_ceil(2) as i64;
    let outside: f64 = s
        .omegas()
        .filter(|w| w.abs() >= limit)
        .map(|w| s.at(w).norm_sqr())
        .sum();
    assert!(outside.sqrt() <= 1e-8 * s.energy().sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn amplitude_scaling_is_carried_by_the_envelope(gain in 0.05f64..20.0) {
        let (base_sig, phase) = example1_with_gain(1.0);
        let (sig, _) = example1_with_gain(gain);
        let opts = ExtractOptions::default();
        let base = extract_shape(&base_sig, &phase, &opts).unwrap();
        let scaled = extract_shape(&sig, &phase, &opts).unwrap();
        for (a, b) in base.shape.coeffs().iter().zip(scaled.shape.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-9);
        }
        for (a, b) in base.envelope.values_phase.iter().zip(&scaled.envelope.values_phase) {
            prop_assert!((gain * a - b).abs() <= 1e-9 * gain);
        }
        for (a, b) in base.residual.iter().zip(&scaled.residual) {
            prop_assert!((gain * a - b).abs() <= 1e-9 * gain);
        }
    }

    #[test]
    fn normalization_preserves_the_product(
        seed in any::<u64>(),
        rows in 4usize..64,
        k in 1usize..8,
        s1 in 0.01f64..100.0,
    ) {
        let mut r = rng(seed);
        let a = uniform_vec(&mut r, rows);
        let right = uniform_vec(&mut r, 2 * k + 1);
        let c = coefficients_from_right(&right);
        let raw = ShapeFunction::from_coeffs(c.clone()).unwrap();
        let (env, shape) = normalize_rank1_factors(&a, &c, s1).unwrap();

        let peak = shape.sample(shapewave::signal::SHAPE_GRID).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((peak - 1.0).abs() <= 1e-9);
        prop_assert!(env.iter().sum::<f64>() >= 0.0);
        for (j, (ar, ae)) in a.iter().zip(&env).enumerate() {
            let tau = 2.0 * PI * j as f64 / rows as f64;
            let before = s1 * ar * raw.eval(tau);
            let after = ae * shape.eval(tau);
            prop_assert!((before - after).abs() <= 1e-12 * (1.0 + before.abs()) * s1);
        }
    }

    #[test]
    fn extraction_invariants_hold_for_random_shapes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = 4;
        let c: Vec<Complex64> = (0..=k)
            .map(|i| {
                let v = uniform_vec(&mut r, 2);
                Complex64::new(v[0], if i == 0 { 0.0 } else { v[1] })
            })
            .collect();
        let raw = ShapeFunction::from_coeffs(c.clone()).unwrap();
        let truth = ShapeFunction::from_coeffs(c.iter().map(|x| x / raw.peak_abs()).collect()).unwrap();
        let t: Vec<f64> = (0..3000).map(|i| i as f64 / 2999.0).collect();
        let theta: Vec<f64> = t.iter().map(|t| 2.0 * PI * (16.0 * t + 0.3 * t * t)).collect();
        // 16.3 periods is not an integer; rescale to 16
        let theta: Vec<f64> = theta.iter().map(|th| th * 16.0 / 16.3).collect();
        let f: Vec<f64> = t
            .iter()
            .zip(&theta)
            .map(|(t, th)| (1.2 + 0.3 * (2.0 * PI * t).cos()) * truth.eval(*th))
            .collect();
        let sig = Signal::new(t, f).unwrap();
        let phase = validate_phase(&sig, theta).unwrap();
        let res = extract_shape(&sig, &phase, &ExtractOptions { band_limit: Some(k), ..Default::default() }).unwrap();
        prop_assert!((res.shape.peak_abs() - 1.0).abs() <= 1e-9);
        prop_assert!(res.envelope.values_phase.iter().sum::<f64>() >= 0.0);
        let d = shape_distance(&res.shape, &truth);
        prop_assert!(d <= 1e-3, "d = {d}, sv = {:?}", &res.fit.singular_values[..3]);
    }
}

/// Coefficients of a 2π-periodic function from M equispaced samples.
fn shape_from_samples(f: impl Fn(f64) -> f64, m: usize, k: usize) -> ShapeFunction {
    let xs: Vec<f64> = (0..m).map(|i| f(2.0 * PI * i as f64 / m as f64)).collect();
    let c = (0..=k)
        .map(|w| {
            xs.iter()
                .enumerate()
                .map(|(i, x)| x * Complex64::from_polar(1.0, -2.0 * PI * (w * i) as f64 / m as f64))
                .sum::<Complex64>()
                / m as f64
        })
        .collect();
    ShapeFunction::from_coeffs(c).unwrap()
}

/// Mean-square distance on a sample grid, brute force over offsets and sign,
/// then ternary refinement around the best grid offset.
fn brute_distance(a: &ShapeFunction, b: &ShapeFunction) -> f64 {
    let m = 256;
    let taus: Vec<f64> = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect();
    let xa: Vec<f64> = taus.iter().map(|&t| a.eval(t)).collect();
    let msq = |off: f64, sign: f64| {
        taus.iter()
            .zip(&xa)
            .map(|(&t, x)| (x - sign * b.eval(t + off)).powi(2))
            .sum::<f64>()
            / m as f64
    };
    let pa = xa.iter().map(|x| x * x).sum::<f64>() / m as f64;
    let pb = taus.iter().map(|&t| b.eval(t).powi(2)).sum::<f64>() / m as f64;
    let offsets = 4096;
    let h = 2.0 * PI / offsets as f64;
    let mut best = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let (mut arg, mut val) = (0.0, f64::INFINITY);
        for i in 0..offsets {
            let v = msq(i as f64 * h, sign);
            if v < val {
                (arg, val) = (i as f64 * h, v);
            }
        }
        let (mut lo, mut hi) = (arg - h, arg + h);
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if msq(m1, sign) < msq(m2, sign) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(msq((lo + hi) / 2.0, sign));
    }
    best.max(0.0).sqrt() / ((pa + pb) / 2.0).sqrt()
}

#[test]
fn distance_matches_brute_force() {
    let mean = {
        let m = 4096;
        (0..m).map(|i| example1_shape(2.0 * PI * i as f64 / m as f64)).sum::<f64>() / m as f64
    };
    let a = shape_from_samples(|t| t.cos(), 256, 20);
    let b = shape_from_samples(|t| example1_shape(t) - mean, 4096, 20);
    let fast = shape_distance(&a, &b);
    let slow = brute_distance(&a, &b);
    assert!((fast - slow).abs() <= 1e-9, "{fast} vs {slow}");

    let c = shape_from_samples(|t| (2.0 * t + 0.4).sin() + 0.5 * (t - 1.0).cos(), 256, 3);
    let d = shape_from_samples(|t| -(3.0 * t).cos() + 0.2 * t.sin(), 256, 3);
    let fast = shape_distance(&c, &d);
    let slow = brute_distance(&c, &d);
    assert!((fast - slow).abs() <= 1e-9, "{fast} vs {slow}");
}
