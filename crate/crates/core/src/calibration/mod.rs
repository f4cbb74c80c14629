//! Parameter extraction from measurement-style data.
//!
//! * [`fit_tuning_curve`]: `(omega_bare, gamma0)` from resonance frequency vs
//!   flux.
//! * [`fit_reflection_trace`]: `(omega_r, Gamma_0, Gamma_R)` from a low-power
//!   reflected-power trace.
//! * [`fit_duffing_alpha`]: Duffing coefficient from the shift of the
//!   reflection minimum vs probe power.

mod lm;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::{
    resonance_frequency, tuning_param_gradient, DeviceParams, FluxBias, DEFAULT_Z0,
};
use crate::error::{Error, Result};
use crate::steady_state::reflection_amplitude_at;

pub use lm::{LeastSquares, LevenbergMarquardt, LmOutcome};

/// Upper bound on the participation ratio during tuning-curve fits.
pub const GAMMA0_MAX: f64 = 0.5;

/// Minimum flux span of tuning-curve data, rad.
pub const MIN_FLUX_SPAN: f64 = 0.2 * PI;

/// Minimum reflection-trace span in units of the total linewidth.
pub const MIN_TRACE_SPAN: f64 = 6.0;

/// Reduced chi-square above which a linear shift-vs-power fit is flagged.
pub const CURVATURE_CHI2: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// Outcome of a fit. Parameters are in internal units (rad/s for rates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<NamedValue>,
    /// Norm of the weighted residual vector.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Per-parameter variance estimates, aligned with `params`.
    pub covariance_diag: Option<Vec<f64>>,
    /// Residual norms at the start point and after each accepted step.
    #[serde(default)]
    pub residual_history: Vec<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    fn named(names: &[&str], values: &[f64]) -> Vec<NamedValue> {
        names
            .iter()
            .zip(values)
            .map(|(n, v)| NamedValue { name: (*n).to_string(), value: *v })
            .collect()
    }
}

/// Paired samples for a fit. `x` is flux (rad), detuning (rad/s) or probe
/// power (photons/s) depending on the fit; `sigma` holds optional per-point
/// standard deviations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DataSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
}

impl DataSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        DataSeries { x, y, sigma: None }
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Checks lengths, finiteness and that there are more points than
    /// `free_params`.
    pub fn validate(&self, free_params: usize) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::InvalidData(format!(
                "x and y lengths differ ({} vs {})",
                self.x.len(),
                self.y.len()
            )));
        }
        if self.x.len() < free_params + 1 {
            return Err(Error::InvalidData(format!(
                "need at least {} points, got {}",
                free_params + 1,
                self.x.len()
            )));
        }
        if !self.x.iter().chain(&self.y).all(|v| v.is_finite()) {
            return Err(Error::InvalidData("non-finite sample".into()));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.x.len() {
                return Err(Error::InvalidData("sigma length differs from data".into()));
            }
            if !s.iter().all(|v| v.is_finite() && *v > 0.0) {
                return Err(Error::InvalidData("sigma entries must be positive".into()));
            }
        }
        Ok(())
    }

    /// Inverse standard deviations (all ones when no sigma is given).
    fn inv_sigma(&self) -> Vec<f64> {
        match &self.sigma {
            Some(s) => s.iter().map(|v| 1.0 / v).collect(),
            None => vec![1.0; self.x.len()],
        }
    }
}

/// Variance estimates from `(J^T J)^-1`, rescaled by the residual variance
/// when the data carried no sigma.
fn variance_diag(jtj: &DMatrix<f64>, rnorm: f64, data: &DataSeries, n: usize) -> Option<Vec<f64>> {
    let cov = lm::covariance(jtj)?;
    let dof = data.len().saturating_sub(n).max(1) as f64;
    let s2 = if data.sigma.is_some() { 1.0 } else { rnorm * rnorm / dof };
    Some((0..n).map(|i| cov[(i, i)] * s2).collect())
}

// ---------------------------------------------------------------------------
// tuning curve

struct TuningProblem<'a> {
    data: &'a DataSeries,
    w: Vec<f64>,
}

impl TuningProblem<'_> {
    fn device(x: &[f64]) -> DeviceParams {
        DeviceParams {
            omega_bare: x[0],
            gamma0: x[1],
            z0: DEFAULT_Z0,
            i_c: None,
            gamma_ext: 1.0,
            gamma_int: 0.0,
        }
    }
}

impl LeastSquares for TuningProblem<'_> {
    fn residuals(&self, x: &[f64]) -> DVector<f64> {
        let p = Self::device(x);
        DVector::from_iterator(
            self.data.len(),
            self.data.x.iter().zip(&self.data.y).zip(&self.w).map(|((&f, &y), &w)| {
                (resonance_frequency(&p, FluxBias(f)).expect("flux validated") - y) * w
            }),
        )
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let p = Self::device(x);
        let mut j = DMatrix::zeros(self.data.len(), 2);
        for (i, (&f, &w)) in self.data.x.iter().zip(&self.w).enumerate() {
            let g = tuning_param_gradient(&p, FluxBias(f)).expect("flux validated");
            j[(i, 0)] = g[0] * w;
            j[(i, 1)] = g[1] * w;
        }
        j
    }

    fn project(&self, x: &mut [f64]) {
        x[0] = x[0].max(f64::MIN_POSITIVE);
        x[1] = x[1].clamp(0.0, GAMMA0_MAX);
    }

    fn bounds(&self, _x: &[f64]) -> Vec<(f64, f64)> {
        vec![(0.0, f64::INFINITY), (0.0, GAMMA0_MAX)]
    }

    fn data_scale(&self) -> f64 {
        self.data.y.iter().zip(&self.w).map(|(y, w)| (y * w).powi(2)).sum::<f64>().sqrt()
    }
}

/// Fits `omega_r(F) = omega_bare / (1 + gamma0 / |cos F|)` to resonance
/// frequencies (rad/s) sampled at fluxes `data.x` (rad).
///
/// The start point comes from the exact linearization
/// `1/omega_r = 1/omega_bare + (gamma0/omega_bare) / |cos F|`.
pub fn fit_tuning_curve(data: &DataSeries) -> Result<FitResult> {
    data.validate(2)?;
    let reduced: Vec<f64> = data.x.iter().map(|&f| FluxBias(f).reduced()).collect();
    if reduced.iter().any(|f| f.abs() >= PI / 2.0 - 1e-9) {
        return Err(Error::InvalidData("flux samples must lie inside (-pi/2, pi/2)".into()));
    }
    if data.y.iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidData("resonance frequencies must be positive".into()));
    }
    let (lo, hi) =
        reduced.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &f| (l.min(f), h.max(f)));
    if hi - lo < MIN_FLUX_SPAN {
        return Err(Error::RankDeficient(format!(
            "flux span {:.4} rad is below the required {:.4} rad",
            hi - lo,
            MIN_FLUX_SPAN
        )));
    }

    let w = data.inv_sigma();
    let u: Vec<f64> = reduced.iter().map(|f| 1.0 / f.cos()).collect();
    let v: Vec<f64> = data.y.iter().map(|y| 1.0 / y).collect();
    let (intercept, slope) = weighted_line(&u, &v, &w)?;
    let x0 = if intercept > 0.0 {
        [1.0 / intercept, slope / intercept]
    } else {
        [data.y.iter().cloned().fold(0.0, f64::max), 0.05]
    };

    let problem = TuningProblem { data, w };
    let out = LevenbergMarquardt::default().minimize(&problem, &x0)?;
    finish(out, &["omega_bare", "gamma0"], data, "tuning-curve fit", Vec::new())
}

/// Weighted straight line `y = a + b x`; returns `(a, b)`.
fn weighted_line(x: &[f64], y: &[f64], inv_sigma: &[f64]) -> Result<(f64, f64)> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&xi, &yi), &s) in x.iter().zip(y).zip(inv_sigma) {
        let w = s * s;
        sw += w;
        sx += w * xi;
        sy += w * yi;
        sxx += w * xi * xi;
        sxy += w * xi * yi;
    }
    let det = sw * sxx - sx * sx;
    if det.abs() <= 1e-14 * sw * sxx {
        return Err(Error::RankDeficient("abscissa values do not vary".into()));
    }
    Ok(((sxx * sy - sx * sxy) / det, (sw * sxy - sx * sy) / det))
}

fn finish(
    out: LmOutcome,
    names: &[&str],
    data: &DataSeries,
    what: &'static str,
    warnings: Vec<String>,
) -> Result<FitResult> {
    if !out.converged && out.iterations >= LevenbergMarquardt::default().max_iterations {
        return Err(Error::NonConvergence { what, iterations: out.iterations });
    }
    let rnorm = out.residual_norm();
    Ok(FitResult {
        params: FitResult::named(names, &out.x),
        residual_norm: rnorm,
        iterations: out.iterations,
        converged: out.converged,
        covariance_diag: variance_diag(&out.normal_matrix, rnorm, data, names.len()),
        residual_history: out.residual_history,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// reflection trace

/// Which of the two rates in a magnitude-only reflection fit is the external
/// one. `|C|^2/|B|^2` is symmetric under `Gamma_0 <-> Gamma_R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `Gamma_0 >= Gamma_R`.
    Over,
    /// `Gamma_0 <= Gamma_R`.
    Under,
}

impl Coupling {
    /// Picks the assignment whose complex reflection `C/B` is closer to the
    /// measured samples at the fitted `omega_r`, `Gamma_0`, `Gamma_R`.
    pub fn from_phase(fit: &FitResult, detunings: &[f64], measured: &[Complex64]) -> Result<Self> {
        let (wr, g0, gr) = reflection_params(fit)?;
        let cost = |ext: f64, int: f64| -> Result<f64> {
            let p = DeviceParams::new(1.0, 0.0, DEFAULT_Z0, None, ext, int)?;
            Ok(detunings
                .iter()
                .zip(measured)
                .map(|(&x, c)| (reflection_amplitude_at(&p, x - wr) - c).norm_sqr())
                .sum())
        };
        let (hi, lo) = (g0.max(gr), g0.min(gr));
        if cost(hi, lo)? <= cost(lo, hi)? {
            Ok(Coupling::Over)
        } else {
            Ok(Coupling::Under)
        }
    }
}

fn reflection_params(fit: &FitResult) -> Result<(f64, f64, f64)> {
    match (fit.get("omega_r"), fit.get("gamma_ext"), fit.get("gamma_int")) {
        (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
        _ => Err(Error::InvalidParameter("not a reflection fit result".into())),
    }
}

/// Lorentzian dip `1 - depth Gamma^2 / ((x - omega_r)^2 + Gamma^2)` with
/// `depth = 4 Gamma_0 Gamma_R / Gamma^2`; parameters `[omega_r, Gamma, depth]`.
struct DipProblem<'a> {
    data: &'a DataSeries,
    w: Vec<f64>,
}

impl LeastSquares for DipProblem<'_> {
    fn residuals(&self, p: &[f64]) -> DVector<f64> {
        let (wr, g, d) = (p[0], p[1], p[2]);
        DVector::from_iterator(
            self.data.len(),
            self.data.x.iter().zip(&self.data.y).zip(&self.w).map(|((&x, &y), &w)| {
                let den = (x - wr).powi(2) + g * g;
                (1.0 - d * g * g / den - y) * w
            }),
        )
    }

    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let (wr, g, d) = (p[0], p[1], p[2]);
        let mut j = DMatrix::zeros(self.data.len(), 3);
        for (i, (&x, &w)) in self.data.x.iter().zip(&self.w).enumerate() {
            let dx = x - wr;
            let den = dx * dx + g * g;
            let den2 = den * den;
            j[(i, 0)] = -2.0 * d * g * g * dx / den2 * w;
            j[(i, 1)] = -2.0 * d * g * dx * dx / den2 * w;
            j[(i, 2)] = -g * g / den * w;
        }
        j
    }

    fn project(&self, p: &mut [f64]) {
        p[1] = p[1].abs().max(f64::MIN_POSITIVE);
        p[2] = p[2].clamp(0.0, 1.0);
    }

    fn bounds(&self, _x: &[f64]) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY), (0.0, f64::INFINITY), (0.0, 1.0)]
    }

    fn data_scale(&self) -> f64 {
        self.data.y.iter().zip(&self.w).map(|(y, w)| (y * w).powi(2)).sum::<f64>().sqrt()
    }
}

/// Fits a low-power reflected-power trace `|C|^2/|B|^2` sampled at detunings
/// `data.x` (rad/s). Returns `omega_r` (same frame as `data.x`),
/// `gamma_ext` and `gamma_int`; `coupling` decides which rate is which.
pub fn fit_reflection_trace(
    data: &DataSeries,
    omega_guess: Option<f64>,
    coupling: Coupling,
) -> Result<FitResult> {
    data.validate(3)?;
    let (imin, ymin) = data
        .y
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, by), (i, y)| if y < by { (i, y) } else { (bi, by) });
    let depth0 = 1.0 - ymin;
    if depth0 <= 1e-6 {
        return Err(Error::Degenerate("reflection trace has no resonance dip".into()));
    }
    let wr0 = omega_guess.unwrap_or(data.x[imin]);
    // half width at half depth equals Gamma
    let half = 1.0 - 0.5 * depth0;
    let mut pairs: Vec<(f64, f64)> = data.x.iter().cloned().zip(data.y.iter().cloned()).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let below: Vec<f64> = pairs.iter().filter(|(_, y)| *y <= half).map(|(x, _)| *x).collect();
    let span = pairs.last().unwrap().0 - pairs[0].0;
    let g0 = match (below.first(), below.last()) {
        (Some(a), Some(b)) if b > a => 0.5 * (b - a),
        _ => span / (4.0 * data.len() as f64),
    };
    if span < MIN_TRACE_SPAN * g0 {
        return Err(Error::InvalidData(format!(
            "trace spans {:.3} linewidths, need at least {MIN_TRACE_SPAN}",
            span / g0
        )));
    }

    let problem = DipProblem { data, w: data.inv_sigma() };
    let out = LevenbergMarquardt::default().minimize(&problem, &[wr0, g0, depth0.min(1.0)])?;
    let (wr, g, d) = (out.x[0], out.x[1], out.x[2]);
    if d <= 1e-9 {
        return Err(Error::Degenerate("fitted dip depth is zero".into()));
    }
    let s = (1.0 - d).max(0.0).sqrt();
    let (big, small) = (0.5 * g * (1.0 + s), 0.5 * g * (1.0 - s));
    let (g_ext, g_int) = match coupling {
        Coupling::Over => (big, small),
        Coupling::Under => (small, big),
    };

    let mut fit = finish(
        out.clone(),
        &["omega_r", "gamma_total", "depth"],
        data,
        "reflection fit",
        Vec::new(),
    )?;
    // propagate (omega_r, Gamma, depth) covariance onto (omega_r, Gamma_0, Gamma_R)
    fit.covariance_diag = lm::covariance(&out.normal_matrix).map(|cov| {
        let dof = data.len().saturating_sub(3).max(1) as f64;
        let s2 = if data.sigma.is_some() { 1.0 } else { fit.residual_norm.powi(2) / dof };
        let ds = if s > 0.0 { -0.25 * g / s } else { f64::INFINITY };
        let sign = |ext: bool| match (coupling, ext) {
            (Coupling::Over, true) | (Coupling::Under, false) => 1.0,
            _ => -1.0,
        };
        let row = |ext: bool| [0.0, 0.5 * (1.0 + sign(ext) * s), -sign(ext) * ds];
        let quad = |a: [f64; 3]| {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    if a[i] != 0.0 && a[j] != 0.0 {
                        acc += a[i] * cov[(i, j)] * a[j];
                    }
                }
            }
            acc * s2
        };
        vec![cov[(0, 0)] * s2, quad(row(true)), quad(row(false))]
    });
    fit.params = FitResult::named(&["omega_r", "gamma_ext", "gamma_int"], &[wr, g_ext, g_int]);
    Ok(fit)
}

// ---------------------------------------------------------------------------
// Duffing coefficient

/// Fits the Duffing coefficient from the displacement of the reflection
/// minimum (rad/s) vs incident photon flux `data.x` (photons/s), using
/// `shift = -2 alpha Gamma_0 |B|^2 / Gamma^2`.
///
/// A curvature warning is attached when the straight line leaves a reduced
/// chi-square above [`CURVATURE_CHI2`] and a quadratic term fits better.
pub fn fit_duffing_alpha(data: &DataSeries, gamma_ext: f64, gamma_tot: f64) -> Result<FitResult> {
    data.validate(1)?;
    if !(gamma_ext > 0.0 && gamma_tot >= gamma_ext) {
        return Err(Error::InvalidParameter(
            "need 0 < gamma_ext <= gamma_tot for the Duffing fit".into(),
        ));
    }
    if data.x.iter().any(|&p| p < 0.0) {
        return Err(Error::InvalidData("probe powers must be non-negative".into()));
    }
    let w: Vec<f64> = data.inv_sigma().iter().map(|s| s * s).collect();
    let sxx: f64 = data.x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
    if sxx == 0.0 {
        return Err(Error::RankDeficient("all probe powers are zero".into()));
    }
    let sxy: f64 = data.x.iter().zip(&data.y).zip(&w).map(|((x, y), w)| w * x * y).sum();
    let slope = sxy / sxx;
    let chi2_lin: f64 =
        data.x.iter().zip(&data.y).zip(&w).map(|((x, y), w)| w * (y - slope * x).powi(2)).sum();

    let m = data.len();
    let mut warnings = Vec::new();
    let syy: f64 = data.y.iter().zip(&w).map(|(y, w)| w * y * y).sum();
    if m > 2 && chi2_lin > 1e-20 * syy {
        let chi2_quad = quadratic_chi2(data, &w);
        let red_lin = chi2_lin / (m - 1) as f64;
        let red = if data.sigma.is_some() {
            red_lin
        } else if chi2_quad > 0.0 {
            red_lin / (chi2_quad / (m - 2) as f64)
        } else {
            f64::INFINITY
        };
        if red > CURVATURE_CHI2 && chi2_quad < chi2_lin {
            warnings.push(format!(
                "shift data curve away from the linear low-power law (reduced chi2 {red:.2}); \
                 restrict the fit to lower probe powers"
            ));
        }
    }

    let to_alpha = -gamma_tot * gamma_tot / (2.0 * gamma_ext);
    let alpha = slope * to_alpha;
    let s2 = if data.sigma.is_some() { 1.0 } else { chi2_lin / (m - 1) as f64 };
    Ok(FitResult {
        params: FitResult::named(&["alpha"], &[alpha]),
        residual_norm: chi2_lin.sqrt(),
        iterations: 1,
        converged: true,
        covariance_diag: Some(vec![s2 / sxx * to_alpha * to_alpha]),
        residual_history: vec![chi2_lin.sqrt()],
        warnings,
    })
}

/// Chi-square of the weighted fit `y = a x + b x^2`.
fn quadratic_chi2(data: &DataSeries, w: &[f64]) -> f64 {
    let (mut s2, mut s3, mut s4, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&x, &y), &w) in data.x.iter().zip(&data.y).zip(w) {
        s2 += w * x * x;
        s3 += w * x * x * x;
        s4 += w * x * x * x * x;
        sy1 += w * x * y;
        sy2 += w * x * x * y;
    }
    let det = s2 * s4 - s3 * s3;
    if det.abs() <= 1e-14 * s2 * s4 {
        return f64::INFINITY;
    }
    let a = (s4 * sy1 - s3 * sy2) / det;
    let b = (s2 * sy2 - s3 * sy1) / det;
    data.x
        .iter()
        .zip(&data.y)
        .zip(w)
        .map(|((&x, &y), &w)| w * (y - a * x - b * x * x).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tuning_data(omega_bare: f64, gamma0: f64, n: usize) -> DataSeries {
        let p = DeviceParams::new(omega_bare, gamma0, 50.0, None, 1.0, 1.0).unwrap();
        let x: Vec<f64> =
            (0..n).map(|i| -0.4 * PI + 0.8 * PI * i as f64 / (n - 1) as f64).collect();
        let y = x.iter().map(|&f| resonance_frequency(&p, FluxBias(f)).unwrap()).collect();
        DataSeries::new(x, y)
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            fit_tuning_curve(&DataSeries::new(vec![0.1, 0.2], vec![1.0])),
            Err(Error::InvalidData(_))
        ));
        assert!(matches!(
            fit_tuning_curve(&DataSeries::new(vec![0.1, 0.2], vec![1.0, 1.0])),
            Err(Error::InvalidData(_))
        ));
        let narrow = DataSeries::new(vec![0.1, 0.15, 0.2, 0.25], vec![1.0, 0.99, 0.98, 0.97]);
        assert!(matches!(fit_tuning_curve(&narrow), Err(Error::RankDeficient(_))));
        let bad_sigma = tuning_data(3e10, 0.09, 11).with_sigma(vec![0.0; 11]);
        assert!(fit_tuning_curve(&bad_sigma).is_err());
    }

    #[test]
    fn flat_curve_sits_on_bound() {
        let data = tuning_data(3.5e10, 0.0, 31);
        let fit = fit_tuning_curve(&data).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.get("gamma0"), Some(0.0));
        assert_relative_eq!(fit.get("omega_bare").unwrap(), 3.5e10, max_relative = 1e-12);
    }

    #[test]
    fn flat_reflection_is_degenerate() {
        let x: Vec<f64> = (0..101).map(|i| (i as f64 - 50.0) * 1e5).collect();
        let data = DataSeries::new(x, vec![1.0; 101]);
        assert!(matches!(
            fit_reflection_trace(&data, None, Coupling::Over),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn zero_shift_gives_zero_alpha() {
        let data = DataSeries::new(vec![1e5, 2e5, 3e5, 4e5], vec![0.0; 4]);
        let fit = fit_duffing_alpha(&data, 1e6, 2e6).unwrap();
        assert_eq!(fit.get("alpha"), Some(0.0));
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn curvature_warning() {
        let x: Vec<f64> = (1..=20).map(|i| i as f64 * 1e5).collect();
        let y: Vec<f64> = x.iter().map(|p| -1e-1 * p - 3e-7 * p * p).collect();
        let fit = fit_duffing_alpha(&DataSeries::new(x.clone(), y), 1e6, 2e6).unwrap();
        assert_eq!(fit.warnings.len(), 1);
        let y_lin: Vec<f64> = x.iter().map(|p| -1e-1 * p).collect();
        let fit = fit_duffing_alpha(&DataSeries::new(x, y_lin), 1e6, 2e6).unwrap();
        assert!(fit.warnings.is_empty());
    }
}
