use std::f64::consts::PI;

use approx::assert_relative_eq;
use jpo::compensation::*;
use jpo::device::{freq_d2, resonance_frequency, DeviceParams, FluxBias};
use rustfft::{num_complex::Complex, FftPlanner};

fn device() -> DeviceParams {
    DeviceParams::from_hz(5.645e9, 0.0898, 400e3, 300e3).unwrap()
}

const OMEGA_P: f64 = 2.0 * PI * 10.3e9;

fn fft_harmonics(p: &DeviceParams, pump: &CompensatedPump, n: usize) -> [f64; 4] {
    let reference = resonance_frequency(p, FluxBias(pump.f_dc)).unwrap();
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|k| {
            let t = k as f64 * pump.period() / n as f64;
            Complex::new(pump.omega_at(p, t).unwrap(), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let nf = n as f64;
    [
        buf[0].re / nf - reference,
        2.0 * buf[1].norm() / nf,
        2.0 * buf[2].norm() / nf,
        2.0 * buf[3].norm() / nf,
    ]
}

#[test]
fn dft_bins_agree_with_fft() {
    let p = device();
    for pump in [
        CompensatedPump::single_tone(0.25 * PI, 0.01 * PI, OMEGA_P),
        build_compensated_pump(&p, 0.25 * PI, 0.01 * PI, OMEGA_P).unwrap(),
        build_compensated_pump(&p, -0.31 * PI, 0.05, OMEGA_P).unwrap(),
    ] {
        let h = harmonics(&p, &pump, 1024).unwrap();
        let f = fft_harmonics(&p, &pump, 1024);
        let scale = h.h1;
        for (a, b) in [h.dc_offset, h.h1, h.h2, h.h3].iter().zip(f) {
            assert!((a - b).abs() < 1e-9 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn single_tone_second_harmonic_follows_curvature() {
    let p = device();
    let df1 = 0.01 * PI;
    let f_dc = 0.25 * PI;
    let h = harmonics(&p, &CompensatedPump::single_tone(f_dc, df1, OMEGA_P), 1024).unwrap();
    let w2 = freq_d2(&p, FluxBias(f_dc)).unwrap();
    let predicted = 0.25 * df1 * df1 * w2;
    assert!(h.h2 > 0.0);
    assert_relative_eq!(h.h2, predicted.abs(), max_relative = 5e-3);
    assert_relative_eq!(h.dc_offset, predicted, max_relative = 5e-3);
}

#[test]
fn compensation_suppresses_rectification_and_second_harmonic() {
    let p = device();
    let pump = build_compensated_pump(&p, 0.25 * PI, 0.01 * PI, OMEGA_P).unwrap();
    let report = verify_cancelation(&p, &pump, 1024).unwrap();
    assert!(report.h2_suppression_db.unwrap() >= 20.0);
    assert!(report.dc_suppression_db.unwrap() >= 20.0);
    // rectified mean returns to omega(F_dc) up to third order in df1
    let w2 = freq_d2(&p, FluxBias(0.25 * PI)).unwrap().abs();
    assert!(report.compensated.dc_offset.abs() < (0.01 * PI).powi(3) * w2);
}

#[test]
fn residual_falls_faster_than_square() {
    let p = device();
    let residual = |df1: f64| {
        let pump = build_compensated_pump(&p, 0.25 * PI, df1, OMEGA_P).unwrap();
        let h = harmonics(&p, &pump, 1024).unwrap();
        (h.h2, h.dc_offset.abs())
    };
    let (h2_big, dc_big) = residual(0.02 * PI);
    let (h2_small, dc_small) = residual(0.01 * PI);
    assert!(h2_big / h2_small >= 6.0);
    assert!(dc_big / dc_small >= 6.0);
}

#[test]
fn fundamental_changes_only_at_second_order() {
    let p = device();
    let change = |df1: f64| {
        let pump = build_compensated_pump(&p, 0.25 * PI, df1, OMEGA_P).unwrap();
        let r = verify_cancelation(&p, &pump, 1024).unwrap();
        (r.compensated.h1 - r.uncompensated.h1).abs() / r.uncompensated.h1
    };
    let (c1, c2) = (change(0.01 * PI), change(0.02 * PI));
    assert!(c1 < 4.0 * (0.01 * PI).powi(2));
    let ratio = c2 / c1;
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn printed_ratio_differs_by_cos_2f_term() {
    for g in [0.04, 0.0898, 0.14] {
        let p = DeviceParams::from_hz(5.645e9, g, 400e3, 300e3).unwrap();
        for k in 0..=40 {
            let f = (0.05 + 0.01 * k as f64) * PI;
            let exact = derivative_ratio(&p, FluxBias(f)).unwrap();
            let printed = derivative_ratio_small_gamma(&p, FluxBias(f)).unwrap();
            let rewritten = derivative_ratio_closed_form(&p, FluxBias(f)).unwrap();
            assert_relative_eq!(rewritten, exact, max_relative = 1e-12);
            let sign_term = (2.0 * f).cos() / (f.sin() * (g + f.cos()));
            assert!((printed - exact - sign_term).abs() < 1e-12 * exact.abs());
        }
    }
}

#[test]
fn second_tone_value_at_quarter_flux() {
    let p = device();
    let df1 = 0.01 * PI;
    let df2 = second_tone_amplitude(&p, FluxBias(0.25 * PI), df1).unwrap();
    assert_relative_eq!(df2, -df1 * df1 / 4.0 * 2.774_628_596, max_relative = 1e-8);
}
