#![allow(dead_code)]

use std::f64::consts::PI;

use jpo::dynamics::{integrate, SimConfig};
use jpo::{Complex64, DeviceParams};

/// Device with Gamma/2pi = 0.5 MHz.
pub fn half_megahertz_device() -> DeviceParams {
    DeviceParams::from_hz(5.645e9, 0.0898, 300e3, 200e3).unwrap()
}

/// Measures the exponential rate of the empty-cavity solution from an RK4
/// trajectory, independent of the analytic formula.
///
/// Growing/overdamped cases are read off late enough for the subdominant
/// mode to have died out; oscillatory cases over an integer number of
/// oscillation periods, where the linear propagator is a pure scaling.
pub fn measured_rate(p: &DeviceParams, delta: f64, eps: f64, alpha: f64) -> f64 {
    let g = p.gamma_total();
    let a0 = Complex64::from_polar(1e-10, 0.3);
    let s = eps * eps - delta * delta;
    if s > 1e-12 * g * g {
        let kappa = s.sqrt();
        let t1 = 8.0 / kappa;
        let t2 = t1 + 4.0 / g;
        let cfg = SimConfig::new(0.01 / g, t2).with_a0(a0);
        let traj = integrate(p, delta, eps, alpha, &cfg).unwrap();
        traj.log_slope(t1, t2)
    } else if s < -1e-12 * g * g {
        let period = 2.0 * PI / (-s).sqrt();
        let per_period = (period * g / 0.01).ceil();
        let dt = period / per_period;
        let periods = (3.0 / (g * period)).ceil().max(1.0);
        let steps = (per_period * periods) as usize;
        let cfg = SimConfig::new(dt, steps as f64 * dt).with_a0(a0);
        let traj = integrate(p, delta, eps, alpha, &cfg).unwrap();
        let (t_end, a_end) = traj.last().unwrap();
        (a_end.norm() / a0.norm()).ln() / t_end
    } else {
        // eps = delta = 0: plain decay
        let cfg = SimConfig::new(0.01 / g, 5.0 / g).with_a0(a0);
        let traj = integrate(p, delta, eps, alpha, &cfg).unwrap();
        traj.log_slope(0.0, 5.0 / g)
    }
}

/// Zero-solution stability read from a linear trajectory: sign of the late
/// log-slope of `|A|`.
pub fn integrated_zero_solution_unstable(
    p: &DeviceParams,
    delta: f64,
    eps: f64,
    seed: u64,
) -> bool {
    let g = p.gamma_total();
    let cfg = SimConfig::new(0.01 / g, 40.0 / g).with_seed(seed);
    let traj = integrate(p, delta, eps, 0.0, &cfg).unwrap();
    traj.log_slope(20.0 / g, 40.0 / g) > 0.0
}
