//! Rotation- and sign-invariant distance between shape functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::signal::ShapeFunction;

/// Number of coarse circular offsets searched before refinement.
pub const OFFSET_GRID: usize = 512;

const CANDIDATES: usize = 3;
const GOLDEN_STEPS: usize = 80;

/// Relative L² distance between `a(·)` and `±b(· + τ₀)`, minimized over the
/// offset τ₀ and the sign.
///
/// Distances are mean-square norms over one period, normalized by the RMS
/// of the two shapes' powers. The offset search covers a 512-point grid and
/// then refines the best candidates by golden-section search, so exact
/// rotations give zero up to round-off.
pub fn shape_distance(a: &ShapeFunction, b: &ShapeFunction) -> f64 {
    let k = a.band_limit().max(b.band_limit());
    let ca = padded(a.coeffs(), k);
    let cb = padded(b.coeffs(), k);
    let scale = ((power(&ca) + power(&cb)) / 2.0).sqrt();
    if scale == 0.0 {
        return 0.0;
    }
    let d = min_offset_distance(&ca, &cb).min(min_offset_distance(&cb, &ca));
    d.sqrt() / scale
}

fn padded(c: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut v = c.to_vec();
    v.resize(k + 1, Complex64::new(0.0, 0.0));
    v
}

fn power(c: &[Complex64]) -> f64 {
    c[0].norm_sqr() + 2.0 * c[1..].iter().map(|x| x.norm_sqr()).sum::<f64>()
}

/// Mean-square distance between `a` and `sign · b(· + offset)`.
fn sq_distance(a: &[Complex64], b: &[Complex64], offset: f64, sign: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, offset);
    let mut e = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        let d = (x - sign * y * e).norm_sqr();
        acc += if k == 0 { d } else { 2.0 * d };
        e *= rot;
    }
    acc
}

fn min_offset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let step = 2.0 * PI / OFFSET_GRID as f64;
    let mut best = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let mut coarse: Vec<(f64, f64)> = (0..OFFSET_GRID)
            .map(|i| {
                let tau = i as f64 * step;
                (sq_distance(a, b, tau, sign), tau)
            })
            .collect();
        coarse.sort_by(|x, y| x.0.total_cmp(&y.0));
        for &(d0, tau) in coarse.iter().take(CANDIDATES) {
            let refined = golden_min(|t| sq_distance(a, b, t, sign), tau - step, tau + step);
            best = best.min(d0).min(refined);
        }
    }
    best.max(0.0)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}
