use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "ventsim", version, about = "Thermal and ventilation simulation with uncertainty propagation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Monte-Carlo simulation of indoor temperature and air change rate.
    Simulate(SimulateArgs),
    /// Fit per-window weather distributions to a raw weather record.
    FitWeather(FitWeatherArgs),
    /// Fit Richardson-number coefficients to measured ventilation rates.
    FitRichardson(FitRichardsonArgs),
    /// Air change rates from tracer-gas decay records.
    AchDecay(AchDecayArgs),
    /// First-order Sobol indices of temperature and air change rate.
    Sobol(SobolArgs),
    /// Render SVG figures from report files.
    Plot(PlotArgs),
    /// Write a synthetic weather record.
    GenWeather(GenWeatherArgs),
    /// Repeat the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ModelSelection {
    #[value(name = "ensemble")]
    #[serde(rename = "ensemble")]
    Ensemble,
    #[value(name = "cross+")]
    #[serde(rename = "cross+")]
    CrossAssisting,
    #[value(name = "cross-")]
    #[serde(rename = "cross-")]
    CrossOpposing,
    #[value(name = "single")]
    #[serde(rename = "single")]
    SingleSided,
    #[value(name = "richardson")]
    #[serde(rename = "richardson")]
    Richardson,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WeatherArgs {
    /// Raw weather CSV or fitted window CSV.
    #[arg(long)]
    pub weather: PathBuf,
    /// Moving-average length applied to raw records, s.
    #[arg(long, default_value_t = 30.0)]
    pub smoothing_s: f64,
    /// Length of the fitting windows, s.
    #[arg(long, default_value_t = 1800.0)]
    pub window_length_s: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "ensemble")]
    pub models: ModelSelection,
    /// Coefficient CSV, required with `--models richardson`.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IntegrationArgs {
    #[arg(long, default_value_t = 6.0)]
    pub spinup_hours: f64,
    /// Integrator time step, s.
    #[arg(long, default_value_t = 10.0)]
    pub dt: f64,
    /// Simulate only the first hours of the weather record.
    #[arg(long)]
    pub horizon_hours: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub weather: WeatherArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    /// Also write full results for the first N samples.
    #[arg(long, default_value_t = 0)]
    pub emit_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitWeatherArgs {
    #[command(flatten)]
    pub weather: WeatherArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitRichardsonArgs {
    /// CSV with `ri_v,nondim_rate` and optional `weight` columns.
    #[arg(long)]
    pub measurements: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AchDecayArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// `timestamp,concentration`
    #[arg(long)]
    pub decay: PathBuf,
    /// `start,end,u_wind_ms,t_in_c,t_out_c,config_name`
    #[arg(long)]
    pub context: PathBuf,
    /// Ambient tracer concentration subtracted before the analysis.
    #[arg(long, default_value_t = 0.0)]
    pub background: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SobolArgs {
    #[arg(long, required_unless_present = "linear")]
    pub scenario: Option<PathBuf>,
    #[arg(long, required_unless_present = "linear")]
    pub weather: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    pub smoothing_s: f64,
    #[arg(long, default_value_t = 1800.0)]
    pub window_length_s: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Base sample count; the design costs base × (parameters + 2) runs.
    #[arg(long, default_value_t = 512)]
    pub base: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `day`, `night` or `start..end` in hours; repeatable.
    #[arg(long = "window", default_values_t = [String::from("day"), String::from("night")])]
    pub windows: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub integration: IntegrationArgs,
    /// Evaluate Y = X1 + 2 X2 instead of the building model.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PlotArgs {
    /// Report written by `simulate`.
    #[arg(long)]
    pub uq: Option<PathBuf>,
    /// Measurement file written by `ach-decay`; adds a prediction scatter.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    /// Model whose predictions are compared with the measurements.
    #[arg(long, default_value = "ensemble")]
    pub model: String,
    /// Report written by `sobol`.
    #[arg(long)]
    pub sobol: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenWeatherArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub days: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Simulate(a) => Some(&a.out),
            Command::FitWeather(a) => Some(&a.out),
            Command::FitRichardson(a) => Some(&a.out),
            Command::AchDecay(a) => Some(&a.out),
            Command::Sobol(a) => Some(&a.out),
            Command::Plot(a) => Some(&a.out),
            Command::GenWeather(a) => Some(&a.out),
            Command::Rerun(_) => None,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Simulate(a) => a.out = out,
            Command::FitWeather(a) => a.out = out,
            Command::FitRichardson(a) => a.out = out,
            Command::AchDecay(a) => a.out = out,
            Command::Sobol(a) => a.out = out,
            Command::Plot(a) => a.out = out,
            Command::GenWeather(a) => a.out = out,
            Command::Rerun(a) => a.out = Some(out),
        }
    }

    /// Every input file the command reads.
    pub fn inputs_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            Command::Simulate(a) => {
                let mut v = vec![&mut a.scenario, &mut a.weather.weather];
                v.extend(a.model.coeffs.as_mut());
                v
            }
            Command::FitWeather(a) => vec![&mut a.weather.weather],
            Command::FitRichardson(a) => vec![&mut a.measurements],
            Command::AchDecay(a) => vec![&mut a.scenario, &mut a.decay, &mut a.context],
            Command::Sobol(a) => {
                let mut v: Vec<&mut PathBuf> = a.scenario.iter_mut().chain(a.weather.iter_mut()).collect();
                v.extend(a.model.coeffs.as_mut());
                v
            }
            Command::Plot(a) => a.uq.iter_mut().chain(a.measurements.iter_mut()).chain(a.sobol.iter_mut()).collect(),
            Command::GenWeather(_) => Vec::new(),
            Command::Rerun(a) => vec![&mut a.manifest],
        }
    }
}
