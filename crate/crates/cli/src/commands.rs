use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::Args;
use jpo::calibration::{
    fit_duffing_alpha, fit_reflection_trace, fit_tuning_curve, Coupling, DataSeries, FitResult,
};
use jpo::compensation::{build_compensated_pump, verify_cancelation, Harmonics};
use jpo::device::*;
use jpo::dynamics::{integrate, SimConfig};
use jpo::region::sample_region;
use jpo::steady_state::sweep;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::output::{self, num, Cell, Format, Provenance, Rendered, Table};
use crate::{Command, CouplingArg, Failure, FitKind, Out};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    device: PathBuf,
    /// Bias point; sets alpha and converts --df1 into a pump strength.
    #[arg(long, value_parser = crate::parse_flux, allow_hyphen_values = true)]
    flux: Option<f64>,
    /// Detuning omega_p/2 - omega_r, Hz.
    #[arg(long, allow_hyphen_values = true)]
    delta_hz: f64,
    /// Pump flux amplitude, rad; requires --flux.
    #[arg(long, value_parser = crate::parse_flux, conflicts_with = "eps_hz", requires = "flux")]
    df1: Option<f64>,
    /// Effective pump strength, Hz.
    #[arg(long, allow_hyphen_values = true)]
    eps_hz: Option<f64>,
    /// Duffing shift per photon, Hz; overrides the value at --flux.
    #[arg(long, allow_hyphen_values = true)]
    alpha_hz: Option<f64>,
    /// SimConfig as JSON (dt and t_max in seconds).
    #[arg(long, conflicts_with_all = ["dt_s", "t_max_s", "seed", "stride"])]
    config: Option<PathBuf>,
    /// Step size; defaults to 0.01 / Gamma.
    #[arg(long)]
    dt_s: Option<f64>,
    /// Duration; defaults to 50 / Gamma.
    #[arg(long)]
    t_max_s: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    out: Out,
}

struct Device {
    params: DeviceParams,
    sha256: String,
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_device(path: &Path) -> Result<Device, Failure> {
    let bytes = read(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Failure::Usage(format!("{}: not UTF-8", path.display())))?;
    let params = DeviceParams::from_json(text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(Device { params, sha256: hex::encode(Sha256::digest(&bytes)) })
}

fn warn(msg: &str) {
    eprintln!("jpo: warning: {msg}");
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, Failure> {
    if points < 2 || !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Failure::Usage("need at least two points and max > min".into()));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect())
}

pub fn run(command: Command, argv: Vec<String>) -> Result<(), Failure> {
    let mut prov = Provenance {
        tool: "jpo",
        version: env!("CARGO_PKG_VERSION"),
        command: argv,
        device_sha256: None,
    };
    let (rendered, format, out) = match command {
        Command::TuneCurve { device, flux_min, flux_max, points, format, out } => {
            let dev = load_device(&device)?;
            prov.device_sha256 = Some(dev.sha256);
            (tune_curve(&dev.params, flux_min, flux_max, points)?, format, out)
        }
        Command::Coeffs { device, flux, out } => {
            let dev = load_device(&device)?;
            prov.device_sha256 = Some(dev.sha256);
            (coeffs(&dev.params, flux)?, Format::Json, out)
        }
        Command::Region { beta, device, flux, delta_span, points, format, out } => {
            let beta = match (beta, device, flux) {
                (Some(b), _, _) => b,
                (None, Some(d), Some(f)) => {
                    let dev = load_device(&d)?;
                    prov.device_sha256 = Some(dev.sha256);
                    beta_coefficient(&dev.params, FluxBias(f))?
                }
                _ => return Err(Failure::Usage("give --beta or both --device and --flux".into())),
            };
            (region(beta, delta_span, points)?, format, out)
        }
        Command::Sweep {
            device,
            flux,
            b_power,
            detuning_min_hz,
            detuning_max_hz,
            points,
            format,
            out,
        } => {
            let dev = load_device(&device)?;
            prov.device_sha256 = Some(dev.sha256);
            let dets: Vec<f64> = grid(detuning_min_hz, detuning_max_hz, points)?
                .into_iter()
                .map(|d| d * TWO_PI)
                .collect();
            (probe_sweep(&dev.params, flux, b_power, &dets)?, format, out)
        }
        Command::Simulate(args) => {
            let dev = load_device(&args.device)?;
            prov.device_sha256 = Some(dev.sha256.clone());
            let format = args.format;
            let out = args.out.clone();
            (simulate(&dev.params, &args)?, format, out)
        }
        Command::Compensate { device, flux, df1, pump_hz, samples, format, out } => {
            let dev = load_device(&device)?;
            prov.device_sha256 = Some(dev.sha256);
            (compensate(&dev.params, flux, df1, pump_hz, samples, format)?, format, out)
        }
        Command::Fit {
            kind,
            data,
            coupling,
            omega_guess_hz,
            gamma_ext_hz,
            gamma_tot_hz,
            device,
            out,
        } => {
            let rates = match (kind, gamma_ext_hz, gamma_tot_hz, device) {
                (FitKind::Duffing, Some(e), Some(t), _) => Some((e * TWO_PI, t * TWO_PI)),
                (FitKind::Duffing, None, None, Some(d)) => {
                    let dev = load_device(&d)?;
                    prov.device_sha256 = Some(dev.sha256);
                    Some((dev.params.gamma_ext, dev.params.gamma_total()))
                }
                (FitKind::Duffing, ..) => {
                    return Err(Failure::Usage(
                        "duffing fit needs --gamma-ext-hz and --gamma-tot-hz, or --device".into(),
                    ))
                }
                _ => None,
            };
            let coupling = match coupling {
                CouplingArg::Over => Coupling::Over,
                CouplingArg::Under => Coupling::Under,
            };
            (fit(kind, &data, coupling, omega_guess_hz, rates)?, Format::Json, out)
        }
    };
    let bytes = output::render(rendered, format, &prov)?;
    output::write(&bytes, out.output.as_deref())
}

fn tune_curve(p: &DeviceParams, lo: f64, hi: f64, points: usize) -> Result<Rendered, Failure> {
    let rows = grid(lo, hi, points)?
        .into_iter()
        .map(|f| {
            let w = resonance_frequency(p, FluxBias(f))?;
            Ok(vec![Cell::Num(f), Cell::Num(w / TWO_PI)])
        })
        .collect::<Result<_, jpo::Error>>()?;
    Ok(Rendered::Table(Table { columns: &["flux_rad", "omega_hz"], rows }))
}

fn coeffs(p: &DeviceParams, flux: f64) -> Result<Rendered, Failure> {
    let f = FluxBias(flux);
    let mut m = Map::new();
    m.insert("flux_rad".into(), num(flux));
    m.insert("omega_r_hz".into(), num(resonance_frequency(p, f)? / TWO_PI));
    m.insert("d_omega_d_flux_hz".into(), num(freq_d1(p, f)? / TWO_PI));
    m.insert("d2_omega_d_flux2_hz".into(), num(freq_d2(p, f)? / TWO_PI));
    m.insert("alpha_hz_per_photon".into(), num(duffing_alpha(p, f)? / TWO_PI));
    m.insert("alpha_over_alpha0".into(), num(alpha_ratio(p, f)?));
    // beta diverges at zero flux and is undefined without a SQUID
    let beta = beta_coefficient(p, f).map_or(Value::Null, num);
    m.insert("beta".into(), beta);
    m.insert("epsilon_per_df1".into(), num(pump_epsilon(p, f, 1.0)? / TWO_PI));
    m.insert("q_ext".into(), num(p.q_ext(f)?));
    m.insert("q_int".into(), num(p.q_int(f)?));
    Ok(Rendered::Record(m))
}

fn region(beta: f64, span: f64, points: usize) -> Result<Rendered, Failure> {
    if !(span > 0.0 && span.is_finite()) {
        return Err(Failure::Usage("--delta-span must be positive".into()));
    }
    let rows = sample_region(beta, -span, span, points)?
        .into_iter()
        .map(|b| {
            vec![
                Cell::Num(b.delta),
                Cell::opt(b.exists.then_some(b.eps_lower)),
                Cell::opt(if b.exists { b.eps_upper } else { None }),
                Cell::Bool(b.exists),
            ]
        })
        .collect();
    Ok(Rendered::Table(Table {
        columns: &["delta_over_gamma", "eps_lower_over_gamma", "eps_upper_over_gamma", "exists"],
        rows,
    }))
}

fn probe_sweep(
    p: &DeviceParams,
    flux: f64,
    b_power: f64,
    dets: &[f64],
) -> Result<Rendered, Failure> {
    let alpha = duffing_alpha(p, FluxBias(flux))?;
    let rows = sweep(p, alpha, dets, b_power)?
        .into_iter()
        .map(|r| {
            vec![
                Cell::Num(r.delta_omega / TWO_PI),
                Cell::Int(r.branch_index),
                Cell::Num(r.n_photons),
                Cell::Bool(r.stable),
                Cell::Num(r.refl_power),
                Cell::Num(r.refl_phase_rad),
            ]
        })
        .collect();
    Ok(Rendered::Table(Table {
        columns: &[
            "delta_omega_hz",
            "branch_index",
            "n_photons",
            "stable",
            "refl_power",
            "refl_phase_rad",
        ],
        rows,
    }))
}

fn simulate(p: &DeviceParams, a: &SimulateArgs) -> Result<Rendered, Failure> {
    let gamma = p.gamma_total();
    let alpha = match (a.alpha_hz, a.flux) {
        (Some(x), _) => x * TWO_PI,
        (None, Some(f)) => duffing_alpha(p, FluxBias(f))?,
        (None, None) => return Err(Failure::Usage("give --flux or --alpha-hz".into())),
    };
    let eps = match (a.eps_hz, a.df1, a.flux) {
        (Some(e), _, _) => e * TWO_PI,
        (None, Some(df1), Some(f)) => {
            let drive = PumpDrive::new(a.delta_hz * TWO_PI, df1)?;
            if drive.exceeds_expansion_range() {
                warn(&format!("df1 = {df1} rad is outside the small-modulation range"));
            }
            drive.epsilon(p, FluxBias(f))?
        }
        _ => return Err(Failure::Usage("give --eps-hz, or --df1 with --flux".into())),
    };
    let cfg = match &a.config {
        Some(path) => serde_json::from_slice::<SimConfig>(&read(path)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => SimConfig::new(a.dt_s.unwrap_or(0.01 / gamma), a.t_max_s.unwrap_or(50.0 / gamma))
            .with_seed(a.seed)
            .with_stride(a.stride),
    };
    let traj = integrate(p, a.delta_hz * TWO_PI, eps, alpha, &cfg)?;
    let rows = traj
        .times
        .iter()
        .zip(&traj.amplitudes)
        .zip(&traj.photon_numbers)
        .map(|((&t, z), &n)| vec![Cell::Num(t), Cell::Num(z.re), Cell::Num(z.im), Cell::Num(n)])
        .collect();
    Ok(Rendered::Table(Table { columns: &["t_s", "re_a", "im_a", "n_photons"], rows }))
}

fn harmonics_json(h: &Harmonics) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("dc_offset_hz".into(), num(h.dc_offset / TWO_PI));
    m.insert("h1_hz".into(), num(h.h1 / TWO_PI));
    m.insert("h2_hz".into(), num(h.h2 / TWO_PI));
    m.insert("h3_hz".into(), num(h.h3 / TWO_PI));
    m
}

fn compensate(
    p: &DeviceParams,
    f_dc: f64,
    df1: f64,
    pump_hz: f64,
    samples: usize,
    format: Format,
) -> Result<Rendered, Failure> {
    if !(pump_hz > 0.0 && pump_hz.is_finite()) {
        return Err(Failure::Usage("--pump-hz must be positive".into()));
    }
    let pump = build_compensated_pump(p, f_dc, df1, pump_hz * TWO_PI)?;
    if pump.exceeds_small_signal() {
        warn(&format!("df1 = {df1} rad is large; fourth-order residuals may be visible"));
    }
    match format {
        Format::Csv => {
            if samples < 2 {
                return Err(Failure::Usage("--samples must be at least 2".into()));
            }
            let dt = pump.period() / samples as f64;
            let rows = (0..samples)
                .map(|k| {
                    let t = k as f64 * dt;
                    Ok(vec![
                        Cell::Num(t),
                        Cell::Num(pump.flux_at(t)),
                        Cell::Num(pump.omega_at(p, t)? / TWO_PI),
                    ])
                })
                .collect::<Result<_, jpo::Error>>()?;
            Ok(Rendered::Table(Table { columns: &["t_s", "flux_rad", "omega_hz"], rows }))
        }
        Format::Json => {
            let report = verify_cancelation(p, &pump, samples)?;
            let mut m = harmonics_json(&report.compensated);
            m.insert("h2_suppression_db".into(), report.h2_suppression_db.map_or(Value::Null, num));
            m.insert("dc_suppression_db".into(), report.dc_suppression_db.map_or(Value::Null, num));
            m.insert("uncompensated".into(), Value::Object(harmonics_json(&report.uncompensated)));
            m.insert("f_dc_rad".into(), num(pump.f_dc));
            m.insert("f_rec_rad".into(), num(pump.f_rec));
            m.insert("df1_rad".into(), num(pump.df1));
            m.insert("df2_rad".into(), num(pump.df2));
            m.insert("bias_iterations".into(), Value::from(pump.iterations));
            Ok(Rendered::Record(m))
        }
    }
}

fn read_series(path: &Path, x_col: &str) -> Result<DataSeries, Failure> {
    let bytes = read(path)?;
    let bad = |msg: String| Failure::Usage(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let xi = find(x_col).ok_or_else(|| bad(format!("missing column `{x_col}`")))?;
    let yi = find("value").ok_or_else(|| bad("missing column `value`".into()))?;
    let si = find("sigma");
    let (mut x, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| -> Result<f64, Failure> {
            rec.get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| bad(format!("row {}: column {} is not a number", line + 1, i + 1)))
        };
        x.push(field(xi)?);
        y.push(field(yi)?);
        if let Some(i) = si {
            s.push(field(i)?);
        }
    }
    let data = DataSeries::new(x, y);
    Ok(if si.is_some() { data.with_sigma(s) } else { data })
}

fn fit(
    kind: FitKind,
    path: &Path,
    coupling: Coupling,
    omega_guess_hz: Option<f64>,
    rates: Option<(f64, f64)>,
) -> Result<Rendered, Failure> {
    let (x_col, label) = match kind {
        FitKind::Tuning => ("flux_rad", "tuning"),
        FitKind::Reflection => ("detuning_hz", "reflection"),
        FitKind::Duffing => ("power_pps", "duffing"),
    };
    let raw = read_series(path, x_col)?;
    let scale = |v: &[f64]| v.iter().map(|a| a * TWO_PI).collect::<Vec<_>>();
    // convert Hz columns into the angular units the fits work in
    let data = match kind {
        FitKind::Tuning | FitKind::Duffing => DataSeries {
            x: raw.x.clone(),
            y: scale(&raw.y),
            sigma: raw.sigma.as_deref().map(scale),
        },
        FitKind::Reflection => DataSeries { x: scale(&raw.x), ..raw.clone() },
    };
    let (result, units): (FitResult, &[(&str, f64)]) = match kind {
        FitKind::Tuning => {
            (fit_tuning_curve(&data)?, &[("omega_bare_hz", TWO_PI), ("gamma0", 1.0)])
        }
        FitKind::Reflection => (
            fit_reflection_trace(&data, omega_guess_hz.map(|w| w * TWO_PI), coupling)?,
            &[("omega_r_hz", TWO_PI), ("gamma_ext_hz", TWO_PI), ("gamma_int_hz", TWO_PI)],
        ),
        FitKind::Duffing => {
            let (ge, gt) = rates.unwrap_or((0.0, 0.0));
            (fit_duffing_alpha(&data, ge, gt)?, &[("alpha_hz_per_photon", TWO_PI)])
        }
    };
    for w in &result.warnings {
        warn(w);
    }
    // residuals stay in the input's value units unless weighted
    let res_scale = if raw.sigma.is_none() && kind != FitKind::Reflection { TWO_PI } else { 1.0 };

    let mut params = Map::new();
    let mut variances = Map::new();
    for (i, (nv, (name, s))) in result.params.iter().zip(units).enumerate() {
        params.insert(name.to_string(), num(nv.value / s));
        if let Some(cov) = &result.covariance_diag {
            variances.insert(name.to_string(), num(cov[i] / (s * s)));
        }
    }
    let mut m = Map::new();
    m.insert("kind".into(), Value::from(label));
    m.insert("params".into(), Value::Object(params));
    m.insert(
        "covariance_diag".into(),
        if result.covariance_diag.is_some() { Value::Object(variances) } else { Value::Null },
    );
    m.insert("residual_norm".into(), num(result.residual_norm / res_scale));
    m.insert("iterations".into(), Value::from(result.iterations));
    m.insert("converged".into(), Value::Bool(result.converged));
    m.insert(
        "residual_history".into(),
        Value::Array(result.residual_history.iter().map(|r| num(r / res_scale)).collect()),
    );
    m.insert("warnings".into(), Value::from(result.warnings.clone()));
    Ok(Rendered::Record(m))
}
