//! Parametric-oscillation region in the `(delta, eps)` plane.
//!
//! Without the pump-induced shift the zero-field solution becomes unstable
//! above `eps_th = sqrt(Gamma^2 + delta^2)`. A quadratic red shift
//! `-beta eps^2 / Gamma` of the resonance moves the effective detuning to
//! `delta + beta eps^2 / Gamma`, so the boundary solves
//!
//! ```text
//! eps^2 = Gamma^2 + (delta + beta eps^2 / Gamma)^2
//! ```
//!
//! a quadratic in `eps^2` with a lower and an upper root. The region closes
//! where its discriminant `1 - 4 beta (beta + delta / Gamma)` reaches zero.
//!
//! All pump strengths in this module are magnitudes.

use serde::Serialize;

use crate::device::{beta_coefficient, DeviceParams, FluxBias};
use crate::error::{Error, Result};

/// Sampled instability thresholds at one detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionBoundary {
    pub delta: f64,
    /// Lower threshold; NaN when the region does not exist at `delta`.
    pub eps_lower: f64,
    /// Upper threshold; `None` for `beta = 0` (unbounded) or when the region
    /// does not exist.
    pub eps_upper: Option<f64>,
    pub exists: bool,
}

/// Symmetric threshold `sqrt(Gamma^2 + delta^2)`.
pub fn threshold_symmetric(p: &DeviceParams, delta: f64) -> f64 {
    p.gamma_total().hypot(delta)
}

/// Inner discriminant `1 - 4 beta (beta + delta / Gamma)`.
pub fn discriminant(beta: f64, delta_over_gamma: f64) -> f64 {
    1.0 - 4.0 * beta * (beta + delta_over_gamma)
}

/// Detuning (in units of Gamma) where the skewed region closes,
/// `1 / (4 beta) - beta`.
pub fn closure_detuning(beta: f64) -> f64 {
    0.25 / beta - beta
}

/// Lower and upper thresholds for a pump-induced shift coefficient `beta`.
///
/// `beta = 0` falls back to the symmetric threshold with no upper bound.
pub fn threshold_skewed(p: &DeviceParams, beta: f64, delta: f64) -> Result<RegionBoundary> {
    Ok(skewed_normalized(beta, delta / p.gamma_total())?.scaled(p.gamma_total()))
}

/// [`threshold_skewed`] in units of Gamma: `delta` and the returned
/// thresholds are divided by the total damping rate.
pub fn skewed_normalized(beta: f64, d: f64) -> Result<RegionBoundary> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(RegionBoundary {
            delta: d,
            eps_lower: 1.0f64.hypot(d),
            eps_upper: None,
            exists: true,
        });
    }
    let disc = discriminant(beta, d);
    if disc < 0.0 {
        return Ok(RegionBoundary {
            delta: d,
            eps_lower: f64::NAN,
            eps_upper: None,
            exists: false,
        });
    }
    let root = disc.sqrt();
    let big = 1.0 - 2.0 * beta * d + root;
    // (1 - 2 beta d)^2 - disc = 4 beta^2 (1 + d^2): rationalized lower root
    // avoids cancellation for small beta
    let lower_sq = 2.0 * (1.0 + d * d) / big;
    let upper_sq = big / (2.0 * beta * beta);
    Ok(RegionBoundary {
        delta: d,
        eps_lower: lower_sq.sqrt(),
        eps_upper: Some(upper_sq.sqrt()),
        exists: true,
    })
}

impl RegionBoundary {
    fn scaled(self, gamma: f64) -> Self {
        RegionBoundary {
            delta: self.delta * gamma,
            eps_lower: self.eps_lower * gamma,
            eps_upper: self.eps_upper.map(|u| u * gamma),
            exists: self.exists,
        }
    }

    pub fn contains(&self, eps: f64) -> bool {
        self.exists && eps >= self.eps_lower && self.eps_upper.is_none_or(|u| eps <= u)
    }
}

/// Membership of `(delta, |eps|)` in the oscillation region.
pub fn region_contains(p: &DeviceParams, beta: f64, delta: f64, eps: f64) -> Result<bool> {
    Ok(threshold_skewed(p, beta, delta)?.contains(eps.abs()))
}

/// Pump-induced resonance shift `-beta eps^2 / Gamma`, rad/s.
pub fn pump_induced_shift(p: &DeviceParams, beta: f64, eps: f64) -> f64 {
    -beta * eps * eps / p.gamma_total()
}

/// `beta` from device parameters at flux `f`.
pub fn beta_from_device(p: &DeviceParams, f: FluxBias) -> Result<f64> {
    beta_coefficient(p, f)
}

/// Samples the boundary in units of Gamma on a uniform detuning grid.
///
/// When the closure point lies strictly inside the grid, the grid point
/// nearest to it is moved onto the closure so the region tip is drawn.
pub fn sample_region(
    beta: f64,
    delta_min: f64,
    delta_max: f64,
    points: usize,
) -> Result<Vec<RegionBoundary>> {
    if points < 2 || delta_min.is_nan() || delta_max.is_nan() || delta_max <= delta_min {
        return Err(Error::InvalidParameter(
            "need at least two points and delta_max > delta_min".into(),
        ));
    }
    let step = (delta_max - delta_min) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| delta_min + step * i as f64).collect();
    if beta > 0.0 {
        let closure = closure_point(beta);
        if closure > delta_min && closure < delta_max {
            let idx = ((closure - delta_min) / step).round() as usize;
            grid[idx.min(points - 1)] = closure;
        }
    }
    grid.into_iter().map(|d| skewed_normalized(beta, d)).collect()
}

/// Largest detuning (units of Gamma) with a non-negative discriminant,
/// refined by bisection to 1e-12 relative.
pub fn closure_point(beta: f64) -> f64 {
    let guess = closure_detuning(beta);
    let width = 1e-6 * guess.abs().max(1.0);
    let (mut lo, mut hi) = (guess - width, guess + width);
    while discriminant(beta, lo) < 0.0 {
        lo -= width;
    }
    while discriminant(beta, hi) >= 0.0 {
        hi += width;
    }
    while (hi - lo) > 1e-12 * lo.abs().max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if discriminant(beta, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn device() -> DeviceParams {
        DeviceParams::from_hz(5.626e9, 0.0563, 300e3, 200e3).unwrap()
    }

    #[test]
    fn symmetric_threshold() {
        let p = device();
        let g = p.gamma_total();
        assert_eq!(threshold_symmetric(&p, 0.0), g);
        assert_relative_eq!(threshold_symmetric(&p, g), 2f64.sqrt() * g, max_relative = 1e-15);
        assert_eq!(threshold_symmetric(&p, -0.7 * g), threshold_symmetric(&p, 0.7 * g));
    }

    #[test]
    fn skewed_reference_values() {
        let b = skewed_normalized(0.22, 0.0).unwrap();
        assert!(b.exists);
        assert_relative_eq!(b.eps_lower, 1.0265, max_relative = 1e-4);
        assert_relative_eq!(b.eps_upper.unwrap(), 4.428, max_relative = 1e-4);
        assert_relative_eq!(closure_detuning(0.22), 0.916_363_636, max_relative = 1e-9);
        assert!(!skewed_normalized(0.22, 0.92).unwrap().exists);
    }

    #[test]
    fn membership() {
        let p = device();
        let g = p.gamma_total();
        assert!(region_contains(&p, 0.0, 0.0, 1.01 * g).unwrap());
        assert!(!region_contains(&p, 0.0, 0.0, 0.99 * g).unwrap());
        assert!(!region_contains(&p, 0.22, 0.0, 5.0 * g).unwrap());
        assert!(region_contains(&p, 0.22, 0.0, 2.0 * g).unwrap());
        for eps in [0.0, 0.5, 1.0, 2.0, 4.0, 10.0] {
            assert!(!region_contains(&p, 0.22, 2.0 * g, eps * g).unwrap());
        }
        // negative strengths count by magnitude
        assert!(region_contains(&p, 0.22, 0.0, -2.0 * g).unwrap());
    }

    #[test]
    fn pump_shift() {
        let p = device();
        let g = p.gamma_total();
        assert_eq!(pump_induced_shift(&p, 0.22, 0.0), 0.0);
        assert_relative_eq!(pump_induced_shift(&p, 0.22, g), -0.22 * g, max_relative = 1e-15);
        assert_relative_eq!(
            pump_induced_shift(&p, 0.3, 2.0 * g),
            4.0 * pump_induced_shift(&p, 0.3, g),
            max_relative = 1e-15
        );
    }

    #[test]
    fn sampled_grid_hits_closure() {
        let rows = sample_region(0.22, -5.0, 5.0, 201).unwrap();
        assert_eq!(rows.len(), 201);
        let tip = rows.iter().filter(|r| r.exists).map(|r| r.delta).fold(f64::MIN, f64::max);
        assert_relative_eq!(tip, closure_detuning(0.22), max_relative = 1e-11);
        let tip_row = rows.iter().find(|r| r.delta == tip).unwrap();
        assert_relative_eq!(tip_row.eps_lower, tip_row.eps_upper.unwrap(), max_relative = 1e-5);
    }

    #[test]
    fn negative_beta_rejected() {
        assert!(skewed_normalized(-0.1, 0.0).is_err());
    }
}
