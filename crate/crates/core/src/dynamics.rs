//! Time-domain integration of the slow-amplitude equation
//!
//! ```text
//! dA/dt = i (delta A + eps A* + alpha |A|^2 A) - Gamma A - i sqrt(2 Gamma_0) B(t)
//! ```
//!
//! in the frame rotating at half the pump frequency. `|A|^2` is the
//! intracavity photon number and `|B|^2` the incident photon flux.
//!
//! The deterministic path is fixed-step RK4. With a positive noise amplitude
//! the integrator switches to Euler-Maruyama with independent Gaussian
//! increments on both quadratures.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};

/// Largest allowed `dt * Gamma`.
pub const MAX_DT_GAMMA: f64 = 0.01;

/// Magnitude of the default seed amplitude.
pub const DEFAULT_SEED_AMPLITUDE: f64 = 1e-6;

/// Photon numbers below this are treated as an empty cavity by
/// [`steady_state_detect`].
pub const EMPTY_CAVITY_PHOTONS: f64 = 1e-18;

/// Probe amplitude `B(t)` in sqrt(photons/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drive {
    #[default]
    Zero,
    Constant {
        amplitude: Complex64,
    },
    /// `amplitude` for `t_start <= t < t_end`, zero otherwise.
    Pulse {
        amplitude: Complex64,
        t_start: f64,
        t_end: f64,
    },
}

impl Drive {
    pub fn at(&self, t: f64) -> Complex64 {
        match *self {
            Drive::Zero => Complex64::new(0.0, 0.0),
            Drive::Constant { amplitude } => amplitude,
            Drive::Pulse { amplitude, t_start, t_end } => {
                if t >= t_start && t < t_end {
                    amplitude
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Initial amplitude; `None` draws a seed of magnitude
    /// [`DEFAULT_SEED_AMPLITUDE`] with a phase from `seed`.
    #[serde(default)]
    pub a0: Option<Complex64>,
    #[serde(default)]
    pub drive: Drive,
    #[serde(default)]
    pub noise_amplitude: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Record every `stride`-th step (the final step is always kept).
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

impl SimConfig {
    pub fn new(dt: f64, t_max: f64) -> Self {
        SimConfig {
            dt,
            t_max,
            a0: None,
            drive: Drive::Zero,
            noise_amplitude: None,
            seed: 0,
            stride: 1,
        }
    }

    pub fn with_a0(mut self, a0: Complex64) -> Self {
        self.a0 = Some(a0);
        self
    }

    pub fn with_drive(mut self, drive: Drive) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_noise(mut self, amplitude: f64, seed: u64) -> Self {
        self.noise_amplitude = Some(amplitude);
        self.seed = seed;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn validate(&self, gamma: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be >= dt, got {}",
                self.t_max
            )));
        }
        if self.dt * gamma > MAX_DT_GAMMA * (1.0 + 1e-12) {
            return Err(Error::StepGuard { dt_gamma: self.dt * gamma });
        }
        if let Some(s) = self.noise_amplitude {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParameter("noise amplitude must be >= 0".into()));
            }
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Initial amplitude, drawing the default seed if none was given.
    pub fn initial_amplitude(&self) -> Complex64 {
        self.a0.unwrap_or_else(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let phase: f64 = rng.random_range(0.0..2.0 * PI);
            Complex64::from_polar(DEFAULT_SEED_AMPLITUDE, phase)
        })
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Sampled solution of the slow-amplitude equation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub photon_numbers: Vec<f64>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Trajectory {
            times: Vec::with_capacity(n),
            amplitudes: Vec::with_capacity(n),
            photon_numbers: Vec::with_capacity(n),
        }
    }

    fn push(&mut self, t: f64, a: Complex64) {
        self.times.push(t);
        self.amplitudes.push(a);
        self.photon_numbers.push(a.norm_sqr());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, Complex64)> {
        Some((*self.times.last()?, *self.amplitudes.last()?))
    }

    /// Index of the last sample at or before `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// `ln(|A(t2)| / |A(t1)|) / (t2 - t1)` using the nearest recorded samples.
    pub fn log_slope(&self, t1: f64, t2: f64) -> f64 {
        let (i, j) = (self.index_at(t1), self.index_at(t2));
        (self.amplitudes[j].norm().ln() - self.amplitudes[i].norm().ln())
            / (self.times[j] - self.times[i])
    }
}

/// Coefficients of one integration.
#[derive(Debug, Clone, Copy)]
struct Rhs {
    delta: f64,
    eps: f64,
    alpha: f64,
    gamma: f64,
    coupling: f64,
    drive: Drive,
}

impl Rhs {
    #[inline]
    fn eval(&self, t: f64, a: Complex64) -> Complex64 {
        let i = Complex64::i();
        i * (self.delta * a + self.eps * a.conj() + self.alpha * a.norm_sqr() * a)
            - self.gamma * a
            - i * self.coupling * self.drive.at(t)
    }
}

/// Integrates the slow-amplitude equation for detuning `delta`, pump
/// strength `eps` and Duffing coefficient `alpha` (all rad/s).
pub fn integrate(
    p: &DeviceParams,
    delta: f64,
    eps: f64,
    alpha: f64,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    let gamma = p.gamma_total();
    cfg.validate(gamma)?;
    for (name, v) in [("delta", delta), ("eps", eps), ("alpha", alpha)] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be finite")));
        }
    }
    let rhs =
        Rhs { delta, eps, alpha, gamma, coupling: (2.0 * p.gamma_ext).sqrt(), drive: cfg.drive };
    let steps = cfg.steps();
    let dt = cfg.dt;
    let mut traj = Trajectory::with_capacity(steps / cfg.stride + 2);
    let mut a = cfg.initial_amplitude();
    traj.push(0.0, a);

    let noise = cfg.noise_amplitude.filter(|s| *s > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));

    for k in 0..steps {
        let t = k as f64 * dt;
        a = match noise {
            None => rk4_step(&rhs, t, a, dt),
            Some(sigma) => {
                let scale = sigma * dt.sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                a + rhs.eval(t, a) * dt + Complex64::new(scale * re, scale * im)
            }
        };
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::Diverged { index: k + 1 });
        }
        if (k + 1) % cfg.stride == 0 || k + 1 == steps {
            traj.push((k + 1) as f64 * dt, a);
        }
    }
    Ok(traj)
}

#[inline]
fn rk4_step(rhs: &Rhs, t: f64, a: Complex64, dt: f64) -> Complex64 {
    let h = 0.5 * dt;
    let k1 = rhs.eval(t, a);
    let k2 = rhs.eval(t + h, a + k1 * h);
    let k3 = rhs.eval(t + h, a + k2 * h);
    let k4 = rhs.eval(t + dt, a + k3 * dt);
    a + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0)
}

/// Exponential rate of the empty-cavity solution: `-Gamma + sqrt(eps^2 - delta^2)`
/// when `|eps| >= |delta|`, otherwise `-Gamma` (decaying envelope with
/// oscillation).
pub fn growth_rate(p: &DeviceParams, delta: f64, eps: f64) -> f64 {
    let gamma = p.gamma_total();
    let s = eps * eps - delta * delta;
    if s >= 0.0 {
        -gamma + s.sqrt()
    } else {
        -gamma
    }
}

/// Photon number of the pump-saturated oscillation state,
/// `(-delta + sign(alpha) sqrt(eps^2 - Gamma^2)) / alpha`, when positive.
pub fn saturated_photon_number(p: &DeviceParams, delta: f64, eps: f64, alpha: f64) -> Option<f64> {
    let gamma = p.gamma_total();
    let s = eps * eps - gamma * gamma;
    if s < 0.0 || alpha == 0.0 {
        return None;
    }
    let n = (-delta + alpha.signum() * s.sqrt()) / alpha;
    (n > 0.0).then_some(n)
}

/// Settled end state of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SettledState {
    pub n: f64,
    /// Phase of the final amplitude; `None` for an empty cavity.
    pub phase: Option<f64>,
}

/// Final photon number and phase when `|A|^2` varies by less than `tol`
/// (relative) over the trailing `window` seconds.
pub fn steady_state_detect(traj: &Trajectory, window: f64, tol: f64) -> Option<SettledState> {
    let (t_end, a_end) = traj.last()?;
    if window.is_nan() || window <= 0.0 || window >= t_end - traj.times[0] {
        return None;
    }
    let start = traj.index_at(t_end - window);
    let tail = &traj.photon_numbers[start..];
    let (lo, hi) =
        tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &n| (lo.min(n), hi.max(n)));
    if hi < EMPTY_CAVITY_PHOTONS {
        return Some(SettledState { n: 0.0, phase: None });
    }
    if hi - lo <= tol * hi {
        Some(SettledState { n: a_end.norm_sqr(), phase: Some(a_end.arg()) })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn device() -> DeviceParams {
        DeviceParams::from_hz(5.0e9, 0.09, 300e3, 200e3).unwrap()
    }

    #[test]
    fn linear_decay_closed_form() {
        let p = device();
        let g = p.gamma_total();
        let delta = 0.7 * g;
        let cfg = SimConfig::new(0.005 / g, 10.0 / g).with_a0(Complex64::new(1.0, 0.0));
        let traj = integrate(&p, delta, 0.0, 0.0, &cfg).unwrap();
        let (t, a) = traj.last().unwrap();
        let exact = Complex64::new(-g * t, delta * t).exp();
        assert_relative_eq!(a.norm(), (-g * t).exp(), max_relative = 1e-8);
        assert!((a - exact).norm() < 1e-8 * exact.norm());
    }

    #[test]
    fn step_guard() {
        let p = device();
        let g = p.gamma_total();
        let cfg = SimConfig::new(0.02 / g, 1.0 / g);
        assert!(matches!(integrate(&p, 0.0, 0.0, 0.0, &cfg), Err(Error::StepGuard { .. })));
        let cfg = SimConfig::new(0.01 / g, 0.001 / g);
        assert!(matches!(integrate(&p, 0.0, 0.0, 0.0, &cfg), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn divergence_reports_index() {
        let p = device();
        let g = p.gamma_total();
        // strong negative-feedback-free cubic growth blows up in finite time
        let cfg = SimConfig::new(0.01 / g, 1e4 / g).with_a0(Complex64::new(1e3, 0.0));
        match integrate(&p, 0.0, 0.0, 1e6 * g, &cfg) {
            Err(Error::Diverged { index }) => assert!(index > 0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn growth_rate_examples() {
        let p = device();
        let g = p.gamma_total();
        let d = 0.3 * g;
        assert_relative_eq!(growth_rate(&p, d, g.hypot(d)), 0.0, epsilon = 1e-9 * g);
        assert_eq!(growth_rate(&p, d, 0.0), -g);
        assert_relative_eq!(growth_rate(&p, 0.6 * g, g), -0.2 * g, max_relative = 1e-12);
    }

    #[test]
    fn photon_numbers_match_amplitudes() {
        let p = device();
        let g = p.gamma_total();
        let cfg = SimConfig::new(0.01 / g, 5.0 / g).with_seed(7);
        let traj = integrate(&p, 0.1 * g, 1.5 * g, 0.1 * g, &cfg).unwrap();
        assert_eq!(traj.times.len(), traj.amplitudes.len());
        for (a, n) in traj.amplitudes.iter().zip(&traj.photon_numbers) {
            assert_eq!(a.norm_sqr(), *n);
        }
    }

    #[test]
    fn default_seed_is_reproducible() {
        let cfg = SimConfig::new(1e-9, 1e-6).with_seed(42);
        let a = cfg.initial_amplitude();
        assert_eq!(a, cfg.initial_amplitude());
        assert_relative_eq!(a.norm(), DEFAULT_SEED_AMPLITUDE, max_relative = 1e-12);
        assert_ne!(a, SimConfig::new(1e-9, 1e-6).with_seed(43).initial_amplitude());
    }

    #[test]
    fn noisy_runs_are_seeded() {
        let p = device();
        let g = p.gamma_total();
        let cfg = SimConfig::new(0.01 / g, 2.0 / g).with_noise(1e-3 * g.sqrt(), 5);
        let a = integrate(&p, 0.0, 0.5 * g, 0.0, &cfg).unwrap();
        let b = integrate(&p, 0.0, 0.5 * g, 0.0, &cfg).unwrap();
        assert_eq!(a, b);
        let c = integrate(&p, 0.0, 0.5 * g, 0.0, &cfg.with_noise(1e-3 * g.sqrt(), 6)).unwrap();
        assert_ne!(a.last(), c.last());
    }

    #[test]
    fn pulsed_drive_switches_off() {
        let d = Drive::Pulse { amplitude: Complex64::new(2.0, 0.0), t_start: 1.0, t_end: 2.0 };
        assert_eq!(d.at(0.5), Complex64::new(0.0, 0.0));
        assert_eq!(d.at(1.0), Complex64::new(2.0, 0.0));
        assert_eq!(d.at(2.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn empty_and_unsettled_detection() {
        let p = device();
        let g = p.gamma_total();
        let cfg = SimConfig::new(0.01 / g, 30.0 / g).with_a0(Complex64::new(1.0, 0.0));
        let decayed = integrate(&p, 0.0, 0.0, 0.0, &cfg).unwrap();
        assert_eq!(
            steady_state_detect(&decayed, 2.0 / g, 1e-3),
            Some(SettledState { n: 0.0, phase: None })
        );
        // growing oscillation observed for less than 3 / lambda
        let short = SimConfig::new(0.01 / g, 2.5 / g).with_a0(Complex64::new(1e-6, 0.0));
        let growing = integrate(&p, 0.0, 2.0 * g, 0.1 * g, &short).unwrap();
        assert_eq!(steady_state_detect(&growing, 1.0 / g, 1e-3), None);
        // window longer than the trajectory
        assert_eq!(steady_state_detect(&growing, 10.0 / g, 1e-3), None);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: SimConfig = serde_json::from_str(r#"{"dt":1e-9,"t_max":1e-6}"#).unwrap();
        assert_eq!(cfg.stride, 1);
        assert_eq!(cfg.drive, Drive::Zero);
        let cfg: SimConfig = serde_json::from_str(
            r#"{"dt":1e-9,"t_max":1e-6,"a0":[1.0,0.5],
                "drive":{"kind":"constant","amplitude":[3.0,0.0]},"seed":4}"#,
        )
        .unwrap();
        assert_eq!(cfg.a0, Some(Complex64::new(1.0, 0.5)));
        assert_eq!(cfg.drive, Drive::Constant { amplitude: Complex64::new(3.0, 0.0) });
    }
}
