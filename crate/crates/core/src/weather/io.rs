//! Weather CSV files.
//!
//! Raw series: `timestamp,temp_c,wind_speed_ms,wind_dir_deg,solar_wm2`.
//! Fitted windows: `window_start,temp_mean_c,temp_std_c,solar_min_wm2,
//! solar_max_wm2,wind_scale_ms,wind_shape,n_samples` (a point-mass wind
//! window has `wind_shape = inf`).

use std::io::{Read, Write};
use std::path::Path;

use super::{
    TruncatedNormal, Uniform, WeatherSample, WeatherSeries, WindDistribution, WindowFit,
    WindowedDistributions,
};
use crate::clock::{format_timestamp, parse_timestamp};
use crate::domain::{celsius_to_kelvin, kelvin_to_celsius};
use crate::error::{Error, Result};

pub const WEATHER_HEADER: [&str; 5] = [
    "timestamp",
    "temp_c",
    "wind_speed_ms",
    "wind_dir_deg",
    "solar_wm2",
];

pub const WINDOWS_HEADER: [&str; 8] = [
    "window_start",
    "temp_mean_c",
    "temp_std_c",
    "solar_min_wm2",
    "solar_max_wm2",
    "wind_scale_ms",
    "wind_shape",
    "n_samples",
];

/// A data row that was skipped while reading.
#[derive(Debug, Clone, PartialEq)]
pub struct RowRejection {
    pub line: usize,
    pub reason: String,
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = found.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header '{}', got '{}'", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn field(rec: &csv::StringRecord, i: usize, name: &str) -> std::result::Result<f64, String> {
    match rec.get(i).map(str::trim) {
        None | Some("") => Err(format!("missing field {name}")),
        Some(s) => s
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("invalid {name} '{s}'")),
    }
}

/// Read a raw weather series. Rows with missing or unparsable fields are
/// skipped and reported with their line number.
pub fn read_weather_csv<R: Read>(reader: R) -> Result<(WeatherSeries, Vec<RowRejection>)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    check_header(rdr.headers()?, &WEATHER_HEADER)?;
    let mut samples = Vec::new();
    let mut rejected = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let parsed = (|| {
            let ts = rec
                .get(0)
                .and_then(parse_timestamp)
                .ok_or_else(|| "missing or invalid timestamp".to_string())?;
            Ok::<_, String>(WeatherSample {
                timestamp: ts,
                outdoor_temp: celsius_to_kelvin(field(&rec, 1, "temp_c")?),
                wind_speed: field(&rec, 2, "wind_speed_ms")?,
                wind_dir: field(&rec, 3, "wind_dir_deg")?,
                solar: field(&rec, 4, "solar_wm2")?,
            })
        })();
        match parsed {
            Ok(s) => samples.push(s),
            Err(reason) => rejected.push(RowRejection { line, reason }),
        }
    }
    Ok((WeatherSeries::new(samples)?, rejected))
}

pub fn load_weather_csv(path: impl AsRef<Path>) -> Result<(WeatherSeries, Vec<RowRejection>)> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_weather_csv(std::io::BufReader::new(f))
}

pub fn write_weather_csv<W: Write>(writer: W, series: &WeatherSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(WEATHER_HEADER)?;
    for s in series.samples() {
        w.write_record([
            format_timestamp(s.timestamp),
            format!("{:.3}", kelvin_to_celsius(s.outdoor_temp)),
            format!("{:.3}", s.wind_speed),
            format!("{:.1}", s.wind_dir),
            format!("{:.2}", s.solar),
        ])?;
    }
    w.flush().map_err(|e| Error::io("weather csv", e))?;
    Ok(())
}

pub fn write_windows_csv<W: Write>(writer: W, d: &WindowedDistributions) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(WINDOWS_HEADER)?;
    for (k, x) in d.windows.iter().enumerate() {
        let (scale, shape) = x.wind.scale_shape();
        w.write_record([
            format_timestamp(d.start + k as f64 * d.window_length),
            kelvin_to_celsius(x.temp.mean).to_string(),
            x.temp.std.to_string(),
            x.solar.min.to_string(),
            x.solar.max.to_string(),
            scale.to_string(),
            shape.to_string(),
            x.n_samples.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("windows csv", e))?;
    Ok(())
}

/// Read fitted windows back. Windows must be contiguous and equally spaced.
pub fn read_windows_csv<R: Read>(reader: R) -> Result<WindowedDistributions> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(rdr.headers()?, &WINDOWS_HEADER)?;
    let mut starts = Vec::new();
    let mut windows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let perr = |msg: String| Error::Parse { line, msg };
        let t = rec
            .get(0)
            .and_then(parse_timestamp)
            .ok_or_else(|| perr("invalid window_start".into()))?;
        let f = |i: usize, n: &str| field(&rec, i, n).map_err(perr);
        let shape_s = rec.get(6).map(str::trim).unwrap_or("");
        let shape = if shape_s == "inf" {
            f64::INFINITY
        } else {
            f(6, "wind_shape")?
        };
        windows.push(WindowFit {
            temp: TruncatedNormal::new(celsius_to_kelvin(f(1, "temp_mean_c")?), f(2, "temp_std_c")?)?,
            solar: Uniform::new(f(3, "solar_min_wm2")?, f(4, "solar_max_wm2")?)?,
            wind: WindDistribution::from_scale_shape(f(5, "wind_scale_ms")?, shape)?,
            n_samples: f(7, "n_samples")? as usize,
        });
        starts.push(t);
    }
    if starts.is_empty() {
        return Err(Error::invalid("windows", "no windows in file"));
    }
    let length = if starts.len() > 1 {
        starts[1] - starts[0]
    } else {
        super::DEFAULT_WINDOW_LENGTH
    };
    for (k, w) in starts.windows(2).enumerate() {
        if ((w[1] - w[0]) - length).abs() > 1e-6 {
            return Err(Error::Parse {
                line: k + 3,
                msg: "windows are not contiguous".into(),
            });
        }
    }
    WindowedDistributions::new(starts[0], length, windows)
}
