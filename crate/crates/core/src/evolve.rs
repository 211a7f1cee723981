//! Time integration of the mode equations
//! `∂_t η_m = Σ_{l≠0} sgn(l)(1 - q^{|l|}) η_{-l} η_{m+l}` (the flow of
//! `η_0`), truncated to `|m| ≤ N`, with fixed-step RK4.
//!
//! Modes outside the window are treated as zero. The quadratic right side is
//! a direct `O(N^2)` convolution.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{to_f64, ParamPoint, Scalar};
use crate::soliton::{choose_amplitudes, dyadic_approx, eta_modes, ExpansionSpec, ModeVector};

/// `q = e^{2πiγ}`.
pub fn q_from_gamma(gamma: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * gamma).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub n: usize,
    /// `modes[m + N]` is `η_m`.
    pub modes: Vec<Complex64>,
    pub t: f64,
    pub q: Complex64,
}

impl State {
    pub fn new(n: usize, modes: Vec<Complex64>, q: Complex64) -> Result<State> {
        if modes.len() != 2 * n + 1 {
            return Err(Error::Argument(format!("expected {} modes, got {}", 2 * n + 1, modes.len())));
        }
        if !(q.norm() <= 1.0 + 1e-12) || !q.is_finite() {
            return Err(Error::Argument(format!("|q| = {} exceeds 1", q.norm())));
        }
        let s = State { n, modes, t: 0.0, q };
        s.check_finite(0)?;
        Ok(s)
    }

    pub fn zeros(n: usize, q: Complex64) -> Result<State> {
        State::new(n, vec![Complex64::new(0.0, 0.0); 2 * n + 1], q)
    }

    pub fn get(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.n {
            Complex64::new(0.0, 0.0)
        } else {
            self.modes[(m + self.n as i64) as usize]
        }
    }

    fn check_finite(&self, step: usize) -> Result<()> {
        if self.modes.iter().all(|z| z.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(step))
        }
    }

    fn with_modes(&self, modes: Vec<Complex64>, t: f64) -> State {
        State { n: self.n, modes, t, q: self.q }
    }
}

/// `c_l = sgn(l)(1 - q^{|l|})` for `l ∈ [-L, L]`, indexed by `l + L`.
fn structure_constants(q: Complex64, l_max: usize) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut pows = vec![one];
    for i in 1..=l_max {
        pows.push(pows[i - 1] * q);
    }
    (-(l_max as i64)..=l_max as i64)
        .map(|l| match l.signum() {
            0 => Complex64::new(0.0, 0.0),
            1 => one - pows[l as usize],
            _ => -(one - pows[(-l) as usize]),
        })
        .collect()
}

fn rhs_with(n: usize, c: &[Complex64], modes: &[Complex64]) -> Vec<Complex64> {
    let n = n as i64;
    let l_max = (c.len() as i64 - 1) / 2;
    let at = |m: i64| modes[(m + n) as usize];
    let mut out = vec![Complex64::new(0.0, 0.0); modes.len()];
    for m in -n..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        // both -l and m + l inside the window
        let lo = (-n).max(-n - m);
        let hi = n.min(n - m);
        for l in lo..=hi {
            if l == 0 {
                continue;
            }
            acc += c[(l + l_max) as usize] * at(-l) * at(m + l);
        }
        out[(m + n) as usize] = acc;
    }
    out
}

/// Derivative of every mode under the truncated flow.
pub fn bo_rhs(s: &State) -> Vec<Complex64> {
    rhs_with(s.n, &structure_constants(s.q, 2 * s.n), &s.modes)
}

fn axpy(x: &[Complex64], a: f64, y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(u, v)| u + v * a).collect()
}

/// One classical Runge–Kutta step.
pub fn rk4_step(s: &State, dt: f64) -> Result<State> {
    let c = structure_constants(s.q, 2 * s.n);
    let out = rk4_with(s, dt, &c)?;
    out.check_finite(1)?;
    Ok(out)
}

fn rk4_with(s: &State, dt: f64, c: &[Complex64]) -> Result<State> {
    let f = |m: &[Complex64]| rhs_with(s.n, c, m);
    let k1 = f(&s.modes);
    let k2 = f(&axpy(&s.modes, dt / 2.0, &k1));
    let k3 = f(&axpy(&s.modes, dt / 2.0, &k2));
    let k4 = f(&axpy(&s.modes, dt, &k3));
    let modes = (0..s.modes.len())
        .map(|i| s.modes[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
        .collect();
    Ok(s.with_modes(modes, s.t + dt))
}

/// Integrates `steps` steps of size `dt`.
pub fn integrate(s: &State, dt: f64, steps: usize) -> Result<State> {
    let c = structure_constants(s.q, 2 * s.n);
    let mut cur = s.clone();
    for step in 1..=steps {
        cur = rk4_with(&cur, dt, &c)?;
        cur.check_finite(step)?;
    }
    Ok(cur)
}

/// `I_1 = η_0`.
pub fn i1(s: &State) -> Complex64 {
    s.get(0)
}

/// `I_2 = Σ_{m≥0} κ_m η_{-m} η_m` with `κ_0 = 1`, `κ_m = (1 - 1/q) q^m`.
pub fn i2(s: &State) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let lead = one - one / s.q;
    let mut acc = s.get(0) * s.get(0);
    let mut qm = one;
    for m in 1..=s.n as i64 {
        qm *= s.q;
        acc += lead * qm * s.get(-m) * s.get(m);
    }
    acc
}

/// Initial data of a run.
#[derive(Clone, Debug)]
pub enum Init {
    /// A soliton point with its amplitudes at `t = 0`; the run uses the
    /// point's `q`.
    Soliton { point: ParamPoint, b: Vec<Scalar> },
    /// `η_0 = 1`, `η_m = decay^{|m|} u_m` with `u_m` uniform in the unit
    /// square of the complex plane.
    Random { seed: u64, decay: f64 },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    /// Steps between recorded samples.
    pub check_interval: usize,
    /// Used by random initial data.
    pub q: Complex64,
    pub init: Init,
    /// A run aborts when the largest mode exceeds this bound.
    pub blowup: f64,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.steps == 0 || self.check_interval == 0 {
            return Err(Error::Argument("need dt > 0, steps >= 1 and check_interval >= 1".into()));
        }
        Ok(())
    }
}

/// One sampled point of a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub t: f64,
    /// `[re, im]` of `η_m` for `m = -N..=N`.
    pub modes: Vec<[f64; 2]>,
    #[serde(rename = "I1")]
    pub i1: [f64; 2],
    #[serde(rename = "I2")]
    pub i2: [f64; 2],
    /// Largest `|η_m - analytic|` for soliton runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub i1_drift: f64,
    pub i2_relative_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_mode_error: Option<f64>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Modes of the soliton at time `t`: amplitudes `b_k e^{(1-q) a_k t}`.
pub fn soliton_state(point: &ParamPoint, b: &[Scalar], n: usize, t: f64) -> Result<Vec<Complex64>> {
    let q = to_f64(&point.q);
    let bt: Vec<Scalar> = b
        .iter()
        .zip(&point.a)
        .map(|(bk, ak)| dyadic_approx(to_f64(bk) * ((1.0 - q) * to_f64(ak) * t).exp(), 52))
        .collect();
    let spec = ExpansionSpec {
        bits: 128,
        ..ExpansionSpec::default()
    };
    let modes: ModeVector = eta_modes(point, &bt, n, spec)?;
    Ok(modes.to_complex())
}

/// Soliton initial data with amplitudes chosen for fast mode decay.
pub fn soliton_init(point: &ParamPoint) -> Result<Init> {
    let (b, _) = choose_amplitudes(point, ExpansionSpec::default().max_rate)?;
    Ok(Init::Soliton { point: point.clone(), b })
}

fn initial_state(cfg: &RunConfig) -> Result<State> {
    match &cfg.init {
        Init::Soliton { point, b } => {
            let q = Complex64::new(to_f64(&point.q), 0.0);
            State::new(cfg.n, soliton_state(point, b, cfg.n, 0.0)?, q)
        }
        Init::Random { seed, decay } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let n = cfg.n as i64;
            let modes = (-n..=n)
                .map(|m| {
                    if m == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        let u = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        u * decay.powi(m.abs() as i32)
                    }
                })
                .collect();
            State::new(cfg.n, modes, cfg.q)
        }
    }
}

/// Runs the integration, passing one record per sample (including `t = 0`
/// and the final time) to `sink`.
pub fn run(cfg: &RunConfig, mut sink: impl FnMut(&Record) -> Result<()>) -> Result<RunSummary> {
    cfg.validate()?;
    let mut s = initial_state(cfg)?;
    let c = structure_constants(s.q, 2 * s.n);
    let (i1_0, i2_0) = (i1(&s), i2(&s));
    let mut i1_drift = 0.0f64;
    let mut i2_drift = 0.0f64;
    let mut max_err: Option<f64> = None;
    let mut record = |s: &State| -> Result<()> {
        i1_drift = i1_drift.max((i1(s) - i1_0).norm());
        i2_drift = i2_drift.max((i2(s) - i2_0).norm() / i2_0.norm().max(f64::MIN_POSITIVE));
        let mode_error = match &cfg.init {
            Init::Soliton { point, b } => {
                let exact = soliton_state(point, b, cfg.n, s.t)?;
                let e = s.modes.iter().zip(&exact).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
                max_err = Some(max_err.map_or(e, |m: f64| m.max(e)));
                Some(e)
            }
            Init::Random { .. } => None,
        };
        sink(&Record {
            t: s.t,
            modes: s.modes.iter().map(|z| pair(*z)).collect(),
            i1: pair(i1(s)),
            i2: pair(i2(s)),
            mode_error,
        })
    };
    record(&s)?;
    for step in 1..=cfg.steps {
        s = rk4_with(&s, cfg.dt, &c)?;
        s.t = step as f64 * cfg.dt;
        s.check_finite(step)?;
        let largest = s.modes.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if largest > cfg.blowup {
            return Err(Error::BlowUp { step, norm: largest });
        }
        if step % cfg.check_interval == 0 || step == cfg.steps {
            record(&s)?;
        }
    }
    Ok(RunSummary {
        steps: cfg.steps,
        t_final: s.t,
        i1_drift,
        i2_relative_drift: i2_drift,
        max_mode_error: max_err,
    })
}

/// Step-halving order estimate: with `u_h` the state at `t = steps·dt`,
/// returns `|u_dt - u_ref| / |u_{dt/2} - u_ref|` where `u_ref` uses
/// `dt/16`. Fourth order gives a ratio near 16.
pub fn order_ratio(s: &State, dt: f64, steps: usize) -> Result<f64> {
    let coarse = integrate(s, dt, steps)?;
    let fine = integrate(s, dt / 2.0, 2 * steps)?;
    let reference = integrate(s, dt / 16.0, 16 * steps)?;
    let dist = |a: &State, b: &State| {
        a.modes.iter().zip(&b.modes).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
    };
    Ok(dist(&coarse, &reference) / dist(&fine, &reference))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Complex64 {
        q_from_gamma(Complex64::new(0.1, 0.05))
    }

    #[test]
    fn constant_state_is_stationary() {
        let mut s = State::zeros(4, q()).unwrap();
        s.modes[4] = Complex64::new(0.3, 0.0);
        assert!(bo_rhs(&s).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn two_mode_brute_force() {
        let mut s = State::zeros(2, q()).unwrap();
        let (a, b, c) = (Complex64::new(0.5, 0.1), Complex64::new(0.2, -0.3), Complex64::new(1.0, 0.0));
        s.modes[3] = a; // η_1
        s.modes[1] = b; // η_-1
        s.modes[2] = c; // η_0
        let r = bo_rhs(&s);
        let sc = |l: i64| {
            let v = Complex64::new(1.0, 0.0) - s.q.powi(l.abs() as i32);
            if l < 0 {
                -v
            } else {
                v
            }
        };
        for m in -2i64..=2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in -4i64..=4 {
                if l != 0 {
                    acc += sc(l) * s.get(-l) * s.get(m + l);
                }
            }
            assert!((r[(m + 2) as usize] - acc).norm() < 1e-15, "m = {m}");
        }
        assert!(r[2].norm() < 1e-15);
    }

    #[test]
    fn zero_state_stays_zero() {
        let s = State::zeros(3, q()).unwrap();
        assert_eq!(integrate(&s, 0.1, 5).unwrap().modes, s.modes);
    }

    #[test]
    fn rejects_large_q() {
        assert!(State::zeros(2, Complex64::new(1.5, 0.0)).is_err());
    }
}
