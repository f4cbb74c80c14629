//! Closed-form device physics of a quarter-wave resonator terminated by a
//! flux-tunable SQUID.
//!
//! All frequencies and rates are angular (rad/s). Flux arguments are the
//! normalized dc flux `F = pi * Phi_dc / Phi_0` in radians. Every flux input is
//! first reduced into `(-pi/2, pi/2]` using the `pi` periodicity of `|cos F|`;
//! the branch points `F = +-pi/2`, where the SQUID inductance diverges, are
//! reported as [`Error::Domain`].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnetic flux quantum in Wb.
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;

/// von Klitzing constant `h / e^2` in ohm.
pub const RESISTANCE_QUANTUM: f64 = 25_812.807;

/// Default characteristic impedance of the resonator in ohm.
pub const DEFAULT_Z0: f64 = 50.0;

/// Pump flux amplitudes above this (rad) are outside the small-modulation
/// regime the coefficient expansions assume.
pub const DF1_WARN_THRESHOLD: f64 = 0.3;

const COS_FLOOR: f64 = 1e-9;

/// Normalized dc flux bias `F = pi * Phi_dc / Phi_0` in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FluxBias(pub f64);

impl FluxBias {
    pub fn new(f: f64) -> Self {
        FluxBias(f)
    }

    /// Flux given in units of pi, e.g. `FluxBias::from_pi(-0.25)`.
    pub fn from_pi(multiple: f64) -> Self {
        FluxBias(multiple * PI)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Representative of this flux in `(-pi/2, pi/2]`.
    pub fn reduced(self) -> f64 {
        let mut r = self.0 - PI * (self.0 / PI).round();
        if r <= -FRAC_PI_2 {
            r += PI;
        }
        r
    }

    /// Reduced flux, or a domain error when `|cos F|` vanishes.
    pub fn checked(self, quantity: &'static str) -> Result<f64> {
        if !self.0.is_finite() {
            return Err(Error::Domain { quantity, flux: self.0 });
        }
        let r = self.reduced();
        if r.cos().abs() <= COS_FLOOR {
            return Err(Error::Domain { quantity, flux: self.0 });
        }
        Ok(r)
    }
}

impl From<f64> for FluxBias {
    fn from(f: f64) -> Self {
        FluxBias(f)
    }
}

/// Static description of one resonator-SQUID device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Bare quarter-wave resonance, rad/s.
    pub omega_bare: f64,
    /// Inductive participation ratio of the SQUID at zero flux.
    pub gamma0: f64,
    /// Characteristic impedance, ohm.
    pub z0: f64,
    /// SQUID critical current, A. Only needed by [`squid_inductance`].
    pub i_c: Option<f64>,
    /// External (coupling) damping rate, rad/s.
    pub gamma_ext: f64,
    /// Internal damping rate, rad/s.
    pub gamma_int: f64,
}

impl DeviceParams {
    /// Builds and validates a device; rates in rad/s.
    pub fn new(
        omega_bare: f64,
        gamma0: f64,
        z0: f64,
        i_c: Option<f64>,
        gamma_ext: f64,
        gamma_int: f64,
    ) -> Result<Self> {
        let p = DeviceParams { omega_bare, gamma0, z0, i_c, gamma_ext, gamma_int };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`DeviceParams::new`] with frequencies and rates given in Hz
    /// (cyclic) and `Z0 = 50 ohm`.
    pub fn from_hz(
        omega_bare_hz: f64,
        gamma0: f64,
        gamma_ext_hz: f64,
        gamma_int_hz: f64,
    ) -> Result<Self> {
        Self::new(
            2.0 * PI * omega_bare_hz,
            gamma0,
            DEFAULT_Z0,
            None,
            2.0 * PI * gamma_ext_hz,
            2.0 * PI * gamma_int_hz,
        )
    }

    pub fn with_critical_current(mut self, i_c: f64) -> Self {
        self.i_c = Some(i_c);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let finite = [self.omega_bare, self.gamma0, self.z0, self.gamma_ext, self.gamma_int]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad("device parameters must be finite".into());
        }
        if self.omega_bare <= 0.0 {
            return bad(format!("omega_bare must be positive, got {}", self.omega_bare));
        }
        // gamma0 = 0 is the bare (untunable) resonator limit.
        if !(0.0..1.0).contains(&self.gamma0) {
            return bad(format!("gamma0 must lie in [0, 1), got {}", self.gamma0));
        }
        if self.z0 <= 0.0 {
            return bad(format!("z0 must be positive, got {}", self.z0));
        }
        if self.gamma_ext < 0.0 || self.gamma_int < 0.0 {
            return bad("damping rates must be non-negative".into());
        }
        if self.gamma_ext + self.gamma_int <= 0.0 {
            return bad("total damping must be positive".into());
        }
        if let Some(i_c) = self.i_c {
            if !(i_c.is_finite() && i_c > 0.0) {
                return bad(format!("i_c must be positive, got {i_c}"));
            }
        }
        Ok(())
    }

    /// Total damping rate `Gamma = Gamma_0 + Gamma_R`.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_ext + self.gamma_int
    }

    /// External quality factor `omega_r / Gamma_0` at flux `f`.
    pub fn q_ext(&self, f: FluxBias) -> Result<f64> {
        Ok(resonance_frequency(self, f)? / self.gamma_ext)
    }

    /// Internal quality factor `omega_r / Gamma_R` at flux `f`.
    pub fn q_int(&self, f: FluxBias) -> Result<f64> {
        Ok(resonance_frequency(self, f)? / self.gamma_int)
    }

    /// Duffing scale `alpha_0 = pi^2 omega_bare Z0 / R_K`, rad/s per photon.
    pub fn alpha0(&self) -> f64 {
        PI * PI * self.omega_bare * self.z0 / RESISTANCE_QUANTUM
    }

    /// `beta_0 = Gamma / omega_bare`.
    pub fn beta0(&self) -> f64 {
        self.gamma_total() / self.omega_bare
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: DeviceFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidData(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DeviceFile::from(*self)).expect("device file serializes")
    }
}

/// On-disk form of [`DeviceParams`]. Frequencies and rates are cyclic (Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceFile {
    pub omega_bare_hz: f64,
    pub gamma0: f64,
    pub z0_ohm: f64,
    pub i_c_amp: Option<f64>,
    pub gamma_ext_hz: f64,
    pub gamma_int_hz: f64,
}

impl TryFrom<DeviceFile> for DeviceParams {
    type Error = Error;

    fn try_from(f: DeviceFile) -> Result<Self> {
        DeviceParams::new(
            2.0 * PI * f.omega_bare_hz,
            f.gamma0,
            f.z0_ohm,
            f.i_c_amp,
            2.0 * PI * f.gamma_ext_hz,
            2.0 * PI * f.gamma_int_hz,
        )
    }
}

impl From<DeviceParams> for DeviceFile {
    fn from(p: DeviceParams) -> Self {
        DeviceFile {
            omega_bare_hz: p.omega_bare / (2.0 * PI),
            gamma0: p.gamma0,
            z0_ohm: p.z0,
            i_c_amp: p.i_c,
            gamma_ext_hz: p.gamma_ext / (2.0 * PI),
            gamma_int_hz: p.gamma_int / (2.0 * PI),
        }
    }
}

/// Parametric pump: detuning `delta = omega_p/2 - omega_r` and ac flux
/// amplitude `df1 = pi * Phi_1 / Phi_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpDrive {
    pub delta: f64,
    pub df1: f64,
    /// Effective pump strength (rad/s) used verbatim instead of the value
    /// derived from `df1`.
    #[serde(default)]
    pub epsilon_override: Option<f64>,
}

impl PumpDrive {
    pub fn new(delta: f64, df1: f64) -> Result<Self> {
        if !(df1.is_finite() && df1 >= 0.0) {
            return Err(Error::InvalidParameter(format!("df1 must be >= 0, got {df1}")));
        }
        Ok(PumpDrive { delta, df1, epsilon_override: None })
    }

    pub fn with_epsilon(delta: f64, epsilon: f64) -> Self {
        PumpDrive { delta, df1: 0.0, epsilon_override: Some(epsilon) }
    }

    /// True when `df1` is large enough that the small-modulation expansion is
    /// questionable.
    pub fn exceeds_expansion_range(&self) -> bool {
        self.df1 > DF1_WARN_THRESHOLD
    }

    /// Signed effective pump strength at flux `f`.
    pub fn epsilon(&self, p: &DeviceParams, f: FluxBias) -> Result<f64> {
        match self.epsilon_override {
            Some(eps) => Ok(eps),
            None => pump_epsilon(p, f, self.df1),
        }
    }
}

/// SQUID Josephson inductance `Phi_0 / (2 pi I_c |cos F|)` in henry.
pub fn squid_inductance(i_c: f64, f: FluxBias) -> Result<f64> {
    if !(i_c.is_finite() && i_c > 0.0) {
        return Err(Error::InvalidParameter(format!("i_c must be positive, got {i_c}")));
    }
    let f = f.checked("SQUID inductance")?;
    Ok(FLUX_QUANTUM / (2.0 * PI * i_c * f.cos().abs()))
}

/// Flux-tuned resonance `omega_bare / (1 + gamma0 / |cos F|)`.
pub fn resonance_frequency(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    let f = f.checked("resonance frequency")?;
    Ok(p.omega_bare / (1.0 + p.gamma0 / f.cos()))
}

/// First flux derivative of [`resonance_frequency`], rad/s per rad.
pub fn freq_d1(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    let f = f.checked("tuning-curve slope")?;
    let (s, c) = f.sin_cos();
    Ok(-p.omega_bare * p.gamma0 * s / (c + p.gamma0).powi(2))
}

/// Second flux derivative of [`resonance_frequency`], rad/s per rad^2.
pub fn freq_d2(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    let f = f.checked("tuning-curve curvature")?;
    let (s, c) = f.sin_cos();
    let g = p.gamma0;
    Ok(-p.omega_bare * g * (c * (c + g) + 2.0 * s * s) / (c + g).powi(3))
}

/// Duffing (Kerr) shift per photon `alpha_0 (gamma0 / cos F)^3`, rad/s.
pub fn duffing_alpha(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    Ok(p.alpha0() * alpha_ratio(p, f)?)
}

/// `alpha / alpha_0 = (gamma0 / cos F)^3`.
pub fn alpha_ratio(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    let f = f.checked("Duffing coefficient")?;
    Ok((p.gamma0 / f.cos()).powi(3))
}

/// Signed effective pump strength `(df1 omega_bare gamma0 / 2) sin F / cos^2 F`
/// for ac flux amplitude `df1`, rad/s.
pub fn pump_epsilon(p: &DeviceParams, f: FluxBias, df1: f64) -> Result<f64> {
    let f = f.checked("pump strength")?;
    let (s, c) = f.sin_cos();
    Ok(0.5 * df1 * p.omega_bare * p.gamma0 * s / (c * c))
}

/// Dimensionless pump-induced shift coefficient
/// `(beta_0 / gamma0) cos^3 F / sin^2 F`.
///
/// Diverges at zero flux, where it is reported as a domain error, and for
/// `gamma0 = 0`, where it is an invalid parameter.
pub fn beta_coefficient(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    let r = f.checked("pump-induced shift coefficient")?;
    let (s, c) = r.sin_cos();
    if s.abs() <= COS_FLOOR {
        return Err(Error::Domain { quantity: "pump-induced shift coefficient", flux: f.0 });
    }
    if p.gamma0 == 0.0 {
        return Err(Error::InvalidParameter(
            "pump-induced shift coefficient needs gamma0 > 0".into(),
        ));
    }
    Ok(p.beta0() / p.gamma0 * c.powi(3) / (s * s))
}

/// `beta / beta_0`.
pub fn beta_ratio(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    Ok(beta_coefficient(p, f)? / p.beta0())
}

/// Gradient of [`resonance_frequency`] with respect to `(omega_bare, gamma0)`.
pub fn tuning_param_gradient(p: &DeviceParams, f: FluxBias) -> Result<[f64; 2]> {
    let f = f.checked("resonance frequency")?;
    let c = f.cos();
    let denom = c + p.gamma0;
    Ok([c / denom, -p.omega_bare * c / (denom * denom)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_one() -> DeviceParams {
        DeviceParams::from_hz(5.645e9, 0.0898, 429e3, 354e3).unwrap()
    }

    #[test]
    fn flux_reduction_lands_in_half_open_interval() {
        for k in -3..=3 {
            let f = FluxBias(0.3 + k as f64 * PI);
            assert_relative_eq!(f.reduced(), 0.3, epsilon = 1e-12);
        }
        assert_relative_eq!(FluxBias(-FRAC_PI_2).reduced(), FRAC_PI_2);
        assert_relative_eq!(FluxBias(FRAC_PI_2).reduced(), FRAC_PI_2);
    }

    #[test]
    fn branch_points_are_domain_errors() {
        let p = sample_one();
        for f in [FRAC_PI_2, -FRAC_PI_2, 1.5 * PI] {
            assert!(matches!(resonance_frequency(&p, FluxBias(f)), Err(Error::Domain { .. })));
            assert!(matches!(duffing_alpha(&p, FluxBias(f)), Err(Error::Domain { .. })));
        }
        assert!(matches!(
            squid_inductance(2.18e-6, FluxBias(FRAC_PI_2)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(beta_coefficient(&p, FluxBias(0.0)), Err(Error::Domain { .. })));
    }

    #[test]
    fn squid_inductance_values() {
        let l = squid_inductance(2.18e-6, FluxBias(0.0)).unwrap();
        assert_relative_eq!(l, 1.510e-10, max_relative = 5e-4);
        let l3 = squid_inductance(2.18e-6, FluxBias(PI / 3.0)).unwrap();
        assert_relative_eq!(l3, 2.0 * l, max_relative = 1e-12);
        let l2 = squid_inductance(3.48e-6, FluxBias(0.0)).unwrap();
        assert_relative_eq!(l2, 9.456e-11, max_relative = 5e-4);
        assert!(squid_inductance(0.0, FluxBias(0.0)).is_err());
    }

    #[test]
    fn tuning_curve_values() {
        let p = sample_one();
        let w = resonance_frequency(&p, FluxBias(0.0)).unwrap() / (2.0 * PI);
        assert_relative_eq!(w, 5.180e9, max_relative = 1e-3);
        let p2 = DeviceParams::from_hz(5.626e9, 0.0563, 1e5, 1e5).unwrap();
        let w2 = resonance_frequency(&p2, FluxBias(0.0)).unwrap() / (2.0 * PI);
        assert_relative_eq!(w2, 5.326e9, max_relative = 1e-3);
    }

    #[test]
    fn bare_resonator_is_flat() {
        let p = DeviceParams::from_hz(5.0e9, 0.0, 1e5, 1e5).unwrap();
        for f in [-1.2, -0.4, 0.0, 0.7, 1.5] {
            assert_eq!(resonance_frequency(&p, FluxBias(f)).unwrap(), p.omega_bare);
            assert_eq!(freq_d2(&p, FluxBias(f)).unwrap(), 0.0);
        }
    }

    #[test]
    fn derivative_signs() {
        let p = sample_one();
        assert_eq!(freq_d1(&p, FluxBias(0.0)).unwrap(), 0.0);
        assert!(freq_d2(&p, FluxBias(0.0)).unwrap() < 0.0);
        for f in [-1.4, -0.6, -0.01, 0.01, 0.6, 1.4] {
            let d = freq_d1(&p, FluxBias(f)).unwrap();
            assert_eq!(d.signum(), -f.signum());
        }
    }

    #[test]
    fn epsilon_values_and_symmetry() {
        let p2 = DeviceParams::from_hz(5.626e9, 0.0563, 1e5, 1e5).unwrap();
        let eps = pump_epsilon(&p2, FluxBias::from_pi(0.25), 0.01 * PI).unwrap();
        assert_relative_eq!(eps / (2.0 * PI), 7.04e6, max_relative = 1e-3);
        assert_eq!(pump_epsilon(&p2, FluxBias(0.0), 0.01 * PI).unwrap(), 0.0);
        let f = FluxBias(0.37);
        assert_eq!(
            pump_epsilon(&p2, FluxBias(-0.37), 0.02).unwrap(),
            -pump_epsilon(&p2, f, 0.02).unwrap()
        );
    }

    #[test]
    fn alpha_minimum_at_sweet_spot() {
        let p = sample_one();
        assert_eq!(duffing_alpha(&p, FluxBias(0.0)).unwrap(), p.alpha0() * p.gamma0.powi(3));
    }

    #[test]
    fn beta_vanishes_towards_half_flux_quantum() {
        let p = sample_one();
        let b = beta_coefficient(&p, FluxBias(FRAC_PI_2 - 1e-6)).unwrap();
        assert!(b < 1e-20);
        assert_eq!(
            beta_coefficient(&p, FluxBias(-0.3)).unwrap(),
            beta_coefficient(&p, FluxBias(0.3)).unwrap()
        );
    }

    #[test]
    fn json_round_trip_and_rejects_unknown_keys() {
        let p = sample_one().with_critical_current(2.18e-6);
        let back = DeviceParams::from_json(&p.to_json()).unwrap();
        assert_relative_eq!(back.omega_bare, p.omega_bare, max_relative = 1e-15);
        assert_eq!(back.i_c, p.i_c);
        let bad = r#"{"omega_bare_hz":5e9,"gamma0":0.1,"z0_ohm":50,"i_c_amp":null,
                      "gamma_ext_hz":1e5,"gamma_int_hz":1e5,"extra":1}"#;
        assert!(DeviceParams::from_json(bad).is_err());
        let invalid = r#"{"omega_bare_hz":5e9,"gamma0":1.5,"z0_ohm":50,"i_c_amp":null,
                      "gamma_ext_hz":1e5,"gamma_int_hz":1e5}"#;
        assert!(matches!(DeviceParams::from_json(invalid), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn validation() {
        assert!(DeviceParams::from_hz(-1.0, 0.1, 1.0, 1.0).is_err());
        assert!(DeviceParams::from_hz(1e9, 0.1, 0.0, 0.0).is_err());
        assert!(DeviceParams::from_hz(1e9, 0.1, -1.0, 2.0).is_err());
        assert!(PumpDrive::new(0.0, -0.1).is_err());
        assert!(PumpDrive::new(0.0, 0.5).unwrap().exceeds_expansion_range());
    }
}
