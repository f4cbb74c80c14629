//! Two-tone, dc-offset pump waveforms that cancel the rectification and
//! second-harmonic content a curved tuning curve adds to a sinusoidal flux
//! pump.
//!
//! Expanding `omega(F)` to second order around the bias, a single-tone pump
//! `F_dc + df1 cos(wp t)` modulates the resonance with
//!
//! ```text
//! omega(F_dc) + omega' df1 cos(wp t) + (df1^2 / 4) omega'' (1 + cos(2 wp t))
//! ```
//!
//! i.e. a dc shift and a `2 wp` tone on top of the wanted fundamental. Adding
//! `df2 cos(2 wp t)` and moving the bias to `F'_dc = F_dc + F_rec` with
//!
//! ```text
//! df2 = F_rec = -(df1^2 / 4) omega''(F'_dc) / omega'(F'_dc)
//! ```
//!
//! cancels both to second order. Since the derivatives are evaluated at the
//! shifted bias, `F'_dc` is found by fixed-point iteration.

use std::f64::consts::PI;

use serde::Serialize;

use crate::device::{freq_d1, freq_d2, resonance_frequency, DeviceParams, FluxBias};
use crate::error::{Error, Result};

/// Maximum fixed-point iterations for the shifted bias.
pub const MAX_BIAS_ITERATIONS: usize = 50;
/// Convergence tolerance of the shifted bias, rad.
pub const BIAS_TOL: f64 = 1e-12;
/// Pump amplitudes above this (rad) leave the regime where second-order
/// compensation is adequate.
pub const DF1_COMPENSATION_WARN: f64 = 0.1;

/// Flux waveform `F_dc + F_rec + df1 cos(wp t) + df2 cos(2 wp t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompensatedPump {
    /// Requested dc bias, rad.
    pub f_dc: f64,
    /// dc correction, rad.
    pub f_rec: f64,
    pub df1: f64,
    /// Second-tone amplitude, rad.
    pub df2: f64,
    /// Pump angular frequency, rad/s.
    pub omega_p: f64,
    /// Fixed-point iterations spent on the shifted bias.
    pub iterations: usize,
}

impl CompensatedPump {
    /// Plain single-tone pump with no correction.
    pub fn single_tone(f_dc: f64, df1: f64, omega_p: f64) -> Self {
        CompensatedPump { f_dc, f_rec: 0.0, df1, df2: 0.0, omega_p, iterations: 0 }
    }

    /// Shifted bias `F'_dc = F_dc + F_rec`.
    pub fn f_dc_prime(&self) -> f64 {
        self.f_dc + self.f_rec
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_p
    }

    pub fn flux_at(&self, t: f64) -> f64 {
        let ph = self.omega_p * t;
        self.f_dc + self.f_rec + self.df1 * ph.cos() + self.df2 * (2.0 * ph).cos()
    }

    /// Instantaneous resonance `omega(F(t))`.
    pub fn omega_at(&self, p: &DeviceParams, t: f64) -> Result<f64> {
        resonance_frequency(p, FluxBias(self.flux_at(t)))
    }

    pub fn exceeds_small_signal(&self) -> bool {
        self.df1 > DF1_COMPENSATION_WARN
    }
}

/// Exact `omega'' / omega'` of the tuning curve.
pub fn derivative_ratio(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    let d1 = freq_d1(p, f)?;
    if d1 == 0.0 {
        return Err(Error::Domain { quantity: "curvature-to-slope ratio", flux: f.0 });
    }
    Ok(freq_d2(p, f)? / d1)
}

/// Small-`gamma0` closed form of `omega'' / omega'` as commonly quoted,
/// `(3 + 2 gamma0 cos F + cos 2F) / (2 sin F (gamma0 + cos F))`.
///
/// Differentiating the tuning curve gives `- cos 2F` in the numerator; the two
/// agree only where `cos 2F = 0`. Kept for comparison, [`derivative_ratio`] is
/// what the compensation uses.
pub fn derivative_ratio_small_gamma(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    let r = f.checked("curvature-to-slope ratio")?;
    let (s, c) = r.sin_cos();
    if s == 0.0 {
        return Err(Error::Domain { quantity: "curvature-to-slope ratio", flux: f.0 });
    }
    Ok((3.0 + 2.0 * p.gamma0 * c + (2.0 * r).cos()) / (2.0 * s * (p.gamma0 + c)))
}

/// Same ratio rewritten from the exact derivatives,
/// `(3 + 2 gamma0 cos F - cos 2F) / (2 sin F (gamma0 + cos F))`.
pub fn derivative_ratio_closed_form(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    let r = f.checked("curvature-to-slope ratio")?;
    let (s, c) = r.sin_cos();
    if s == 0.0 {
        return Err(Error::Domain { quantity: "curvature-to-slope ratio", flux: f.0 });
    }
    Ok((3.0 + 2.0 * p.gamma0 * c - (2.0 * r).cos()) / (2.0 * s * (p.gamma0 + c)))
}

/// Second-tone amplitude `-(df1^2 / 4) omega''/omega'` at the shifted bias.
pub fn second_tone_amplitude(p: &DeviceParams, f_dc_prime: FluxBias, df1: f64) -> Result<f64> {
    let ratio = derivative_ratio(p, f_dc_prime)?;
    Ok(-0.25 * df1 * df1 * ratio)
}

/// dc correction `F_rec`; same expression as [`second_tone_amplitude`].
pub fn rectification_offset(p: &DeviceParams, f_dc_prime: FluxBias, df1: f64) -> Result<f64> {
    second_tone_amplitude(p, f_dc_prime, df1)
}

/// Resolves the shifted bias self-consistently and returns the compensated
/// waveform.
pub fn build_compensated_pump(
    p: &DeviceParams,
    f_dc: f64,
    df1: f64,
    omega_p: f64,
) -> Result<CompensatedPump> {
    if !(df1.is_finite() && df1 >= 0.0) {
        return Err(Error::InvalidParameter(format!("df1 must be >= 0, got {df1}")));
    }
    if !(omega_p.is_finite() && omega_p > 0.0) {
        return Err(Error::InvalidParameter(format!("omega_p must be positive, got {omega_p}")));
    }
    FluxBias(f_dc).checked("compensated pump bias")?;
    if df1 == 0.0 {
        return Ok(CompensatedPump::single_tone(f_dc, 0.0, omega_p));
    }
    let mut f_rec = 0.0;
    for it in 1..=MAX_BIAS_ITERATIONS {
        let next = rectification_offset(p, FluxBias(f_dc + f_rec), df1)?;
        let change = (next - f_rec).abs();
        f_rec = next;
        if change <= BIAS_TOL {
            return Ok(CompensatedPump { f_dc, f_rec, df1, df2: f_rec, omega_p, iterations: it });
        }
    }
    Err(Error::NonConvergence { what: "compensated bias", iterations: MAX_BIAS_ITERATIONS })
}

/// Fourier content of `omega(F(t))` over one pump period, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Harmonics {
    /// Mean of `omega(F(t))` minus `omega(F_dc)`.
    pub dc_offset: f64,
    /// Cosine-amplitude magnitudes at `wp`, `2 wp`, `3 wp`.
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

/// Compensated spectrum next to the single-tone reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralReport {
    pub compensated: Harmonics,
    pub uncompensated: Harmonics,
    /// `20 log10(|h2 uncompensated| / |h2 compensated|)`; `None` when the
    /// reference has no second harmonic.
    pub h2_suppression_db: Option<f64>,
    pub dc_suppression_db: Option<f64>,
}

/// Samples `omega(F(t))` at `n_samples` points over exactly one period and
/// returns dc offset and the first three harmonic amplitudes.
pub fn harmonics(p: &DeviceParams, pump: &CompensatedPump, n_samples: usize) -> Result<Harmonics> {
    if n_samples < 256 || !n_samples.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "n_samples must be a power of two >= 256, got {n_samples}"
        )));
    }
    let reference = resonance_frequency(p, FluxBias(pump.f_dc))?;
    let dt = pump.period() / n_samples as f64;
    let samples = (0..n_samples)
        .map(|k| pump.omega_at(p, k as f64 * dt).map(|w| w - reference))
        .collect::<Result<Vec<f64>>>()?;
    let bins = dft_bins(&samples, 4);
    let n = n_samples as f64;
    Ok(Harmonics {
        dc_offset: bins[0].0 / n,
        h1: 2.0 * bins[1].0.hypot(bins[1].1) / n,
        h2: 2.0 * bins[2].0.hypot(bins[2].1) / n,
        h3: 2.0 * bins[3].0.hypot(bins[3].1) / n,
    })
}

/// First `count` DFT bins `(re, im)` of a real sequence.
fn dft_bins(x: &[f64], count: usize) -> Vec<(f64, f64)> {
    let n = x.len() as f64;
    (0..count)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (j, &v)| {
                let ph = -2.0 * PI * (k * j) as f64 / n;
                (re + v * ph.cos(), im + v * ph.sin())
            })
        })
        .collect()
}

fn suppression_db(reference: f64, residual: f64) -> Option<f64> {
    let reference = reference.abs();
    if reference == 0.0 {
        return None;
    }
    Some(20.0 * (reference / residual.abs().max(f64::MIN_POSITIVE)).log10())
}

/// Spectral check of a compensated pump against the single-tone pump with
/// the same bias and amplitude.
pub fn verify_cancelation(
    p: &DeviceParams,
    pump: &CompensatedPump,
    n_samples: usize,
) -> Result<SpectralReport> {
    let compensated = harmonics(p, pump, n_samples)?;
    let reference = CompensatedPump::single_tone(pump.f_dc, pump.df1, pump.omega_p);
    let uncompensated = harmonics(p, &reference, n_samples)?;
    Ok(SpectralReport {
        compensated,
        uncompensated,
        h2_suppression_db: suppression_db(uncompensated.h2, compensated.h2),
        dc_suppression_db: suppression_db(uncompensated.dc_offset, compensated.dc_offset),
    })
}
