//! Forced Duffing oscillator u'' + u + ε·sign(u)|u|^{1+ω} = γ·cos(βt),
//! integrated with classical fixed-step RK4.

use crate::error::{Error, Result};
use crate::signal::Signal;

use super::NoiseSpec;

/// States beyond this magnitude count as a blow-up.
const BLOWUP: f64 = 1e100;

#[derive(Debug, Clone, PartialEq)]
pub struct DuffingParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub beta: f64,
    pub omega_exponent: f64,
    pub u0: f64,
    pub v0: f64,
    pub t_span: f64,
    pub dt: f64,
    /// Number of output samples, uniform on [0, t_span].
    pub samples: usize,
}

impl Default for DuffingParams {
    fn default() -> Self {
        DuffingParams {
            epsilon: -1.0,
            gamma: 0.1,
            beta: 1.0 / 25.0,
            omega_exponent: 2.0,
            u0: 1.0,
            v0: 1.0,
            t_span: 400.0,
            dt: 0.01,
            samples: 8192,
        }
    }
}

impl DuffingParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.epsilon,
            self.gamma,
            self.beta,
            self.omega_exponent,
            self.u0,
            self.v0,
            self.t_span,
            self.dt,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("duffing parameters must be finite".into()));
        }
        if self.dt <= 0.0 || self.t_span / self.dt < 1000.0 - 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0 and t_span/dt >= 1000 (dt = {}, t_span = {})",
                self.dt, self.t_span
            )));
        }
        if self.omega_exponent <= 0.0 {
            return Err(Error::InvalidParameter("omega exponent must be positive".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter("need at least 2 output samples".into()));
        }
        Ok(())
    }

    fn power(&self, u: f64) -> f64 {
        let p = 1.0 + self.omega_exponent;
        if p.fract() == 0.0 && p <= 16.0 {
            u.abs().powi(p as i32) * u.signum()
        } else {
            u.abs().powf(p) * u.signum()
        }
    }

    /// Right-hand side of the first-order system (u, v)' = (v, v').
    pub fn rhs(&self, t: f64, u: f64, v: f64) -> (f64, f64) {
        (
            v,
            -u - self.epsilon * self.power(u) + self.gamma * (self.beta * t).cos(),
        )
    }
}

/// Hamiltonian v²/2 + u²/2 + ε|u|^{2+ω}/(2+ω), conserved when γ = 0.
pub fn duffing_energy(params: &DuffingParams, u: f64, v: f64) -> f64 {
    let q = 2.0 + params.omega_exponent;
    0.5 * v * v + 0.5 * u * u + params.epsilon * u.abs().powf(q) / q
}

/// RK4 states at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn integrate_rk4(params: &DuffingParams) -> Result<Trajectory> {
    params.validate()?;
    let steps = (params.t_span / params.dt).round() as usize;
    let h = params.dt;
    let mut out = Trajectory {
        times: Vec::with_capacity(steps + 1),
        u: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps + 1),
    };
    let (mut u, mut v) = (params.u0, params.v0);
    out.times.push(0.0);
    out.u.push(u);
    out.v.push(v);
    for i in 0..steps {
        let t = i as f64 * h;
        let (k1u, k1v) = params.rhs(t, u, v);
        let (k2u, k2v) = params.rhs(t + h / 2.0, u + h * k1u / 2.0, v + h * k1v / 2.0);
        let (k3u, k3v) = params.rhs(t + h / 2.0, u + h * k2u / 2.0, v + h * k2v / 2.0);
        let (k4u, k4v) = params.rhs(t + h, u + h * k3u, v + h * k3v);
        u += h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0;
        v += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0;
        let t_next = (i + 1) as f64 * h;
        if !(u.abs() < BLOWUP && v.abs() < BLOWUP) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        out.times.push(t_next);
        out.u.push(u);
        out.v.push(v);
    }
    Ok(out)
}

/// Integrates and resamples u onto `samples` uniform times with cubic
/// Hermite interpolation (u' = v is known at every step).
pub fn gen_duffing(params: &DuffingParams, noise: NoiseSpec) -> Result<Signal> {
    let traj = integrate_rk4(params)?;
    let last = traj.times.len() - 1;
    let t_end = traj.times[last];
    let h = params.dt;
    let times: Vec<f64> = (0..params.samples)
        .map(|i| t_end * i as f64 / (params.samples - 1) as f64)
        .collect();
    let mut values: Vec<f64> = times
        .iter()
        .map(|&t| {
            let i = ((t / h).floor() as usize).min(last.saturating_sub(1));
            let s = (t - traj.times[i]) / h;
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * traj.u[i]
                + (s3 - 2.0 * s2 + s) * h * traj.v[i]
                + (-2.0 * s3 + 3.0 * s2) * traj.u[i + 1]
                + (s3 - s2) * h * traj.v[i + 1]
        })
        .collect();
    noise.apply(&mut values);
    Signal::new(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(t_span: f64, dt: f64) -> DuffingParams {
        DuffingParams {
            epsilon: 0.0,
            gamma: 0.0,
            t_span,
            dt,
            ..Default::default()
        }
    }

    #[test]
    fn harmonic_limit_matches_analytic() {
        let traj = integrate_rk4(&linear(50.0, 1e-3)).unwrap();
        let err = traj
            .times
            .iter()
            .zip(&traj.u)
            .map(|(t, u)| (u - (t.cos() + t.sin())).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "err = {err:e}");
    }

    #[test]
    fn fourth_order_self_convergence() {
        let base = DuffingParams {
            u0: 0.5,
            v0: 0.0,
            t_span: 100.0,
            dt: 0.05,
            ..Default::default()
        };
        let run = |dt: f64| integrate_rk4(&DuffingParams { dt, ..base.clone() }).unwrap().u;
        let (c, m, f) = (run(0.05), run(0.025), run(0.0125));
        let dev = |x: &[f64], stride: usize| {
            (0..c.len())
                .map(|i| (x[i * stride] - f[i * 4]).abs())
                .fold(0.0, f64::max)
        };
        let ratio = dev(&c, 1) / dev(&m, 2);
        assert!((12.0..=20.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn conservative_energy_drift() {
        let p = DuffingParams {
            gamma: 0.0,
            u0: 0.5,
            v0: 0.0,
            t_span: 100.0,
            dt: 1e-3,
            ..Default::default()
        };
        let traj = integrate_rk4(&p).unwrap();
        let h0 = duffing_energy(&p, p.u0, p.v0);
        let drift = traj
            .u
            .iter()
            .zip(&traj.v)
            .map(|(&u, &v)| ((duffing_energy(&p, u, v) - h0) / h0).abs())
            .fold(0.0, f64::max);
        assert!(drift <= 1e-6, "drift = {drift:e}");
    }

    #[test]
    fn softening_spring_from_unit_state_escapes() {
        let err = integrate_rk4(&DuffingParams::default()).unwrap_err();
        match err {
            Error::NonFiniteState { t } => assert!(t > 1.0 && t < 2.0, "t = {t}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hardening_spring_stays_bounded() {
        let p = DuffingParams {
            epsilon: 1.0,
            ..Default::default()
        };
        let sig = gen_duffing(&p, NoiseSpec::clean()).unwrap();
        assert_eq!(sig.len(), 8192);
        assert!(sig.values().iter().all(|u| u.abs() < 2.0));
    }

    #[test]
    fn resampling_hits_step_values() {
        let p = DuffingParams {
            epsilon: 1.0,
            t_span: 10.0,
            dt: 0.01,
            samples: 21,
            ..Default::default()
        };
        let traj = integrate_rk4(&p).unwrap();
        let sig = gen_duffing(&p, NoiseSpec::clean()).unwrap();
        for (i, v) in sig.values().iter().enumerate() {
            assert!((v - traj.u[i * 50]).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_params() {
        assert!(integrate_rk4(&linear(1.0, 0.01)).is_err());
        assert!(integrate_rk4(&linear(100.0, 0.0)).is_err());
    }
}
