//! Probe-driven steady state without parametric pumping.
//!
//! The intracavity photon number `n = |A|^2` at probe detuning `dw` and
//! incident photon flux `|B|^2` solves the self-consistency cubic
//!
//! ```text
//! n [ (dw + alpha n)^2 + Gamma^2 ] = 2 Gamma_0 |B|^2
//! ```
//!
//! which has one or three positive roots. In the scaled variable
//! `x = alpha n / Gamma` it reads `x^3 + 2 d x^2 + (d^2 + 1) x - k = 0` with
//! `d = dw / Gamma` and `k = 2 Gamma_0 |B|^2 alpha / Gamma^3`; that form is
//! what the closed-form solver works on.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::{duffing_alpha, DeviceParams, FluxBias};
use crate::error::{Error, Result};
use crate::stability::SlowFlow;

/// Roots closer than this (relative to the photon scale) are reported once,
/// flagged as a fold.
pub const FOLD_MERGE_TOL: f64 = 1e-6;

/// Coherent probe: detuning `dw = omega_B - omega_r` (rad/s) and incident
/// photon flux `|B|^2` (photons/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeDrive {
    pub delta_omega: f64,
    pub b_power: f64,
}

impl ProbeDrive {
    pub fn new(delta_omega: f64, b_power: f64) -> Result<Self> {
        if !(b_power.is_finite() && b_power >= 0.0) || !delta_omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "probe power must be finite and >= 0, got {b_power}"
            )));
        }
        Ok(ProbeDrive { delta_omega, b_power })
    }
}

/// One self-consistent photon-number solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateBranch {
    /// Photon number `|A|^2`.
    pub n: f64,
    pub stable: bool,
    /// Effective detuning `dw + alpha n`, rad/s.
    pub zeta: f64,
    /// Two roots merged at a saddle-node fold.
    pub fold: bool,
}

/// Self-consistency residual `n [(dw + alpha n)^2 + Gamma^2] - 2 Gamma_0 |B|^2`.
pub fn cubic_residual(alpha: f64, gamma: f64, gamma_ext: f64, d: &ProbeDrive, n: f64) -> f64 {
    let z = d.delta_omega + alpha * n;
    n * (z * z + gamma * gamma) - 2.0 * gamma_ext * d.b_power
}

/// All physical photon-number roots, sorted ascending, with stability from
/// the slow-flow Jacobian.
pub fn photon_number_roots(
    p: &DeviceParams,
    f: FluxBias,
    d: &ProbeDrive,
) -> Result<Vec<SteadyStateBranch>> {
    let alpha = duffing_alpha(p, f)?;
    Ok(roots_with_alpha(p, alpha, d))
}

/// [`photon_number_roots`] with an explicit Duffing coefficient.
pub fn roots_with_alpha(p: &DeviceParams, alpha: f64, d: &ProbeDrive) -> Vec<SteadyStateBranch> {
    let gamma = p.gamma_total();
    let drive = 2.0 * p.gamma_ext * d.b_power;
    let branch = |n: f64, fold: bool| {
        let zeta = d.delta_omega + alpha * n;
        let flow = SlowFlow { delta: d.delta_omega, eps: 0.0, alpha, gamma };
        let stable = !fold && flow.is_stable(intracavity_amplitude(p, d, zeta));
        SteadyStateBranch { n, stable, zeta, fold }
    };

    if drive == 0.0 {
        return vec![branch(0.0, false)];
    }
    let dd = d.delta_omega / gamma;
    let linear = drive / (d.delta_omega * d.delta_omega + gamma * gamma);
    // alpha so small that the cubic term cannot matter below double precision
    if alpha == 0.0 || (alpha * linear / gamma).abs() < 1e-14 {
        return vec![branch(polish(alpha, gamma, drive, d.delta_omega, linear), false)];
    }

    let k = drive * alpha / gamma.powi(3);
    let xs = solve_scaled_cubic(dd, k);
    // x and alpha share sign for non-negative n
    let mut ns: Vec<f64> = xs
        .into_iter()
        .map(|x| x * gamma / alpha)
        .filter(|n| *n >= 0.0)
        .map(|n| polish(alpha, gamma, drive, d.delta_omega, n))
        .collect();
    ns.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let scale = ns.iter().cloned().fold(drive / (gamma * gamma), f64::max);
    let mut out: Vec<SteadyStateBranch> = Vec::with_capacity(3);
    for n in ns {
        match out.last_mut() {
            Some(last) if (n - last.n).abs() <= FOLD_MERGE_TOL * scale => {
                *last = branch(0.5 * (n + last.n), true);
            }
            _ => out.push(branch(n, false)),
        }
    }
    out
}

/// Real roots of `x^3 + 2 d x^2 + (d^2 + 1) x - k`, trigonometric method for
/// three real roots, Cardano otherwise.
fn solve_scaled_cubic(d: f64, k: f64) -> Vec<f64> {
    let a = 2.0 * d;
    let b = d * d + 1.0;
    let c = -k;
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if disc < 0.0 {
        // p < 0 here
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3).map(|j| m * (theta - 2.0 * PI * j as f64 / 3.0).cos() - shift).collect()
    } else {
        let s = disc.sqrt();
        let u = (-q / 2.0 + s).cbrt();
        let v = (-q / 2.0 - s).cbrt();
        let mut roots = vec![u + v - shift];
        if disc == 0.0 {
            roots.push(-u / 2.0 - v / 2.0 - shift);
        }
        roots
    }
}

/// Newton refinement on the unscaled cubic; keeps the input when a step does
/// not reduce the residual (double roots).
fn polish(alpha: f64, gamma: f64, drive: f64, dw: f64, mut n: f64) -> f64 {
    let res = |n: f64| {
        let z = dw + alpha * n;
        n * (z * z + gamma * gamma) - drive
    };
    let mut r = res(n);
    for _ in 0..4 {
        let z = dw + alpha * n;
        let slope = z * z + gamma * gamma + 2.0 * alpha * n * z;
        if slope == 0.0 || r == 0.0 {
            break;
        }
        let trial = (n - r / slope).max(0.0);
        let rt = res(trial);
        if rt.abs() < r.abs() {
            n = trial;
            r = rt;
        } else {
            break;
        }
    }
    n
}

/// Intracavity field `sqrt(2 Gamma_0) B / (zeta + i Gamma)` for a real,
/// positive probe amplitude `B = sqrt(|B|^2)`.
pub fn intracavity_amplitude(p: &DeviceParams, d: &ProbeDrive, zeta: f64) -> Complex64 {
    let b = d.b_power.sqrt();
    Complex64::new((2.0 * p.gamma_ext).sqrt() * b, 0.0) / Complex64::new(zeta, p.gamma_total())
}

/// Reflected power ratio `|C|^2/|B|^2 = 1 - 4 Gamma_0 Gamma_R / (zeta^2 + Gamma^2)`.
pub fn reflection_coefficient(p: &DeviceParams, branch: &SteadyStateBranch) -> f64 {
    reflection_power_at(p, branch.zeta)
}

pub fn reflection_power_at(p: &DeviceParams, zeta: f64) -> f64 {
    let g = p.gamma_total();
    1.0 - 4.0 * p.gamma_ext * p.gamma_int / (zeta * zeta + g * g)
}

/// Complex reflection `C/B = 1 - 2 i Gamma_0 / (zeta + i Gamma)`.
pub fn reflection_amplitude(p: &DeviceParams, branch: &SteadyStateBranch) -> Complex64 {
    reflection_amplitude_at(p, branch.zeta)
}

pub fn reflection_amplitude_at(p: &DeviceParams, zeta: f64) -> Complex64 {
    Complex64::new(1.0, 0.0)
        - Complex64::new(0.0, 2.0 * p.gamma_ext) / Complex64::new(zeta, p.gamma_total())
}

/// Power-dependent displacement of the reflection minimum,
/// `-2 alpha Gamma_0 |B|^2 / Gamma^2`, rad/s.
pub fn duffing_shift(p: &DeviceParams, f: FluxBias, b_power: f64) -> Result<f64> {
    let alpha = duffing_alpha(p, f)?;
    Ok(duffing_shift_with_alpha(p, alpha, b_power))
}

pub fn duffing_shift_with_alpha(p: &DeviceParams, alpha: f64, b_power: f64) -> f64 {
    let g = p.gamma_total();
    -2.0 * alpha * p.gamma_ext * b_power / (g * g)
}

/// One CSV row of a detuning sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta_omega: f64,
    pub branch_index: usize,
    pub n_photons: f64,
    pub stable: bool,
    pub refl_power: f64,
    pub refl_phase_rad: f64,
}

/// Evaluates every branch at each probe detuning.
pub fn sweep(
    p: &DeviceParams,
    alpha: f64,
    detunings: &[f64],
    b_power: f64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &dw in detunings {
        let d = ProbeDrive::new(dw, b_power)?;
        for (i, br) in roots_with_alpha(p, alpha, &d).iter().enumerate() {
            rows.push(SweepRow {
                delta_omega: dw,
                branch_index: i,
                n_photons: br.n,
                stable: br.stable,
                refl_power: reflection_coefficient(p, br),
                refl_phase_rad: reflection_amplitude(p, br).arg(),
            });
        }
    }
    Ok(rows)
}
