//! `jpo`: sweeps, simulation, pump compensation and fitting for flux-pumped
//! Josephson parametric oscillators.
//!
//! Exit status is 0 on success, 2 on invalid input and 1 when a numerical
//! procedure fails (non-convergence, divergence, rank deficiency).

mod commands;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<jpo::Error> for Failure {
    fn from(e: jpo::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

/// Accepts radians (`0.785`) or multiples of pi (`0.25pi`, `-pi`).
fn parse_flux(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = match t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        Some("") | Some("+") => PI,
        Some("-") => -PI,
        Some(m) => m.trim_end_matches('*').parse::<f64>().map_err(|e| e.to_string())? * PI,
        None => t.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("flux `{s}` is not finite"))
    }
}

#[derive(Parser)]
#[command(name = "jpo", version, about = "Flux-pumped Josephson parametric oscillator toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Out {
    /// Output file; written atomically. Defaults to stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Resonance frequency vs static flux.
    TuneCurve {
        #[arg(long)]
        device: PathBuf,
        #[arg(long, value_parser = parse_flux, allow_hyphen_values = true)]
        flux_min: f64,
        #[arg(long, value_parser = parse_flux, allow_hyphen_values = true)]
        flux_max: f64,
        #[arg(long, default_value_t = 181)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Duffing, pump and pump-induced coefficients at one bias point.
    Coeffs {
        #[arg(long)]
        device: PathBuf,
        #[arg(long, value_parser = parse_flux, allow_hyphen_values = true)]
        flux: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Oscillation region boundary in units of the total damping rate.
    Region {
        /// Pump-induced nonlinearity; alternatively give --device and --flux.
        #[arg(long, conflicts_with_all = ["device", "flux"])]
        beta: Option<f64>,
        #[arg(long, requires = "flux")]
        device: Option<PathBuf>,
        #[arg(long, value_parser = parse_flux, allow_hyphen_values = true, requires = "device")]
        flux: Option<f64>,
        /// Detuning range is [-span, span].
        #[arg(long, default_value_t = 5.0)]
        delta_span: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Probe-driven steady states over a detuning sweep.
    Sweep {
        #[arg(long)]
        device: PathBuf,
        #[arg(long, value_parser = parse_flux, allow_hyphen_values = true)]
        flux: f64,
        /// Incident photon flux |B|^2, photons/s.
        #[arg(long)]
        b_power: f64,
        #[arg(long, allow_hyphen_values = true)]
        detuning_min_hz: f64,
        #[arg(long, allow_hyphen_values = true)]
        detuning_max_hz: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Integrate the slow-amplitude equation under a parametric pump.
    Simulate(commands::SimulateArgs),
    /// Two-tone pump that cancels rectification and the 2w_p harmonic.
    Compensate {
        #[arg(long)]
        device: PathBuf,
        /// Static bias point F_dc.
        #[arg(long, value_parser = parse_flux, allow_hyphen_values = true)]
        flux: f64,
        /// First-tone amplitude, rad (accepts `0.01pi`).
        #[arg(long, value_parser = parse_flux)]
        df1: f64,
        #[arg(long)]
        pump_hz: f64,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        /// csv: one period of the waveform; json: spectral report.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Fit device parameters to measured data (CSV with a header row).
    Fit {
        #[arg(long, value_enum)]
        kind: FitKind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = CouplingArg::Over)]
        coupling: CouplingArg,
        /// Starting resonance for reflection fits.
        #[arg(long, allow_hyphen_values = true)]
        omega_guess_hz: Option<f64>,
        /// Damping rates for Duffing fits; taken from --device if omitted.
        #[arg(long)]
        gamma_ext_hz: Option<f64>,
        #[arg(long)]
        gamma_tot_hz: Option<f64>,
        #[arg(long)]
        device: Option<PathBuf>,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    /// columns flux_rad, value (Hz), sigma?
    Tuning,
    /// columns detuning_hz, value (|C|^2/|B|^2), sigma?
    Reflection,
    /// columns power_pps, value (shift, Hz), sigma?
    Duffing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Over,
    Under,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let summary: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("jpo: {}", summary.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(cli.command, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("jpo: {}", m.replace('\n', " "));
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("jpo: numerical failure: {}", m.replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
