//! Modeling, simulation and calibration of flux-pumped Josephson parametric
//! oscillators: a quarter-wave resonator shorted to ground through a dc-SQUID
//! whose flux is modulated near twice the resonance frequency.
//!
//! * [`device`] closed-form tuning curve, its derivatives and the flux
//!   dependent pump strength, Duffing and pump-induced shift coefficients.
//! * [`steady_state`] Duffing response to a coherent probe without pump.
//! * [`region`] parametric-instability thresholds in the detuning/pump plane.
//! * [`dynamics`] integration of the slow-amplitude equation.
//! * [`compensation`] two-tone pump waveforms cancelling rectification.
//! * [`calibration`] least-squares extraction of device parameters.
//!
//! Internally every frequency and rate is angular (rad/s).

pub mod calibration;
pub mod compensation;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod region;
pub mod stability;
pub mod steady_state;

pub use device::{DeviceParams, FluxBias, PumpDrive};
pub use error::{Error, Result};

pub use num_complex::Complex64;

/// The README and the chapters of the guide in `book/`, compiled so their code listings run as
/// doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/tuning_curve.md")]
    pub mod tuning_curve {}
    #[doc = include_str!("../../../book/src/duffing_response.md")]
    pub mod duffing_response {}
    #[doc = include_str!("../../../book/src/instability_region.md")]
    pub mod instability_region {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub mod dynamics {}
    #[doc = include_str!("../../../book/src/pump_compensation.md")]
    pub mod pump_compensation {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    pub mod calibration {}
}
