//! Air change rates from tracer-gas decay records.

use std::io::Read;

use crate::clock::parse_timestamp;
use crate::domain::{celsius_to_kelvin, VentilationConfig};
use crate::error::{Error, Result};
use crate::vent::{richardson_number, DrivingState, FitPoint};

/// Samples in the median filter applied before peak detection.
pub const MEDIAN_FILTER_LEN: usize = 10;
/// Admissible length of a quasi-steady window, s.
pub const WINDOW_LENGTH_RANGE: (f64, f64) = (300.0, 600.0);

/// Concentration time series of one tracer release.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRecord {
    pub time: Vec<f64>,
    pub concentration: Vec<f64>,
    /// m³
    pub house_volume: f64,
}

impl DecayRecord {
    /// `background` is subtracted from every sample first; pass 0 to keep
    /// the raw values.
    pub fn new(time: Vec<f64>, concentration: Vec<f64>, house_volume: f64, background: f64) -> Result<Self> {
        if time.len() != concentration.len() {
            return Err(Error::invalid("decay", "time and concentration lengths differ"));
        }
        if time.len() < 2 {
            return Err(Error::invalid("decay", "need at least 2 samples"));
        }
        if !(house_volume > 0.0) {
            return Err(Error::invalid("house_volume", "must be > 0"));
        }
        for (i, w) in time.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::invalid(format!("decay[{}].timestamp", i + 1), "timestamps must increase"));
            }
        }
        let concentration: Vec<f64> = concentration.iter().map(|c| c - background).collect();
        if let Some(i) = concentration.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::invalid(format!("decay[{i}].concentration"), "must be > 0 (after background subtraction)"));
        }
        Ok(DecayRecord { time, concentration, house_volume })
    }

    /// Samples with `lo < t <= hi`.
    pub fn segment(&self, lo: f64, hi: f64) -> Result<Self> {
        let idx: Vec<usize> = (0..self.time.len()).filter(|&i| self.time[i] > lo && self.time[i] <= hi).collect();
        DecayRecord::new(
            idx.iter().map(|&i| self.time[i]).collect(),
            idx.iter().map(|&i| self.concentration[i]).collect(),
            self.house_volume,
            0.0,
        )
    }
}

/// Centered running median over `len` samples, shortened at the ends.
pub fn median_filter(x: &[f64], len: usize) -> Vec<f64> {
    let half = len / 2;
    let mut buf = Vec::with_capacity(len);
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + len - half).min(x.len());
            buf.clear();
            buf.extend_from_slice(&x[lo..hi]);
            buf.sort_by(f64::total_cmp);
            let m = buf.len();
            if m % 2 == 1 {
                buf[m / 2]
            } else {
                0.5 * (buf[m / 2 - 1] + buf[m / 2])
            }
        })
        .collect()
}

/// Index of the concentration peak: the first maximum of the median-filtered
/// signal.
pub fn find_peak(c: &[f64]) -> usize {
    let f = median_filter(c, MEDIAN_FILTER_LEN);
    let mut best = 0;
    for (i, v) in f.iter().enumerate() {
        if *v > f[best] {
            best = i;
        }
    }
    best
}

/// Instantaneous air change rate after the peak.
#[derive(Debug, Clone, PartialEq)]
pub struct AchSeries {
    pub t_peak: f64,
    pub c_peak: f64,
    pub time: Vec<f64>,
    /// 1/h
    pub ach: Vec<f64>,
}

/// `ACH(t) = 3600 · (ln c_peak − ln c(t)) / (t − t_peak)` for every sample
/// after the peak.
pub fn decay_to_ach_series(record: &DecayRecord) -> Result<AchSeries> {
    let p = find_peak(&record.concentration);
    if p + 1 >= record.time.len() {
        return Err(Error::invalid("decay", "no samples after the concentration peak"));
    }
    let (t_peak, c_peak) = (record.time[p], record.concentration[p]);
    let time = record.time[p + 1..].to_vec();
    let ach = record.time[p + 1..]
        .iter()
        .zip(&record.concentration[p + 1..])
        .map(|(t, c)| 3600.0 * (c_peak / c).ln() / (t - t_peak))
        .collect();
    Ok(AchSeries { t_peak, c_peak, time, ach })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiSteady {
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

/// Mean and standard deviation of the ACH series over `[start, start + length]`.
pub fn quasi_steady_stats(series: &AchSeries, start: f64, length: f64) -> Result<QuasiSteady> {
    let (lo, hi) = WINDOW_LENGTH_RANGE;
    if !(length >= lo && length <= hi) {
        return Err(Error::invalid("window length", format!("{length} s outside [{lo}, {hi}] s")));
    }
    let end = start + length;
    let (first, last) = (series.t_peak, *series.time.last().expect("nonempty series"));
    if start < first || end > last {
        return Err(Error::invalid(
            "window",
            format!("[{start}, {end}] not inside the decay record after the peak [{first}, {last}]"),
        ));
    }
    let v: Vec<f64> = series
        .time
        .iter()
        .zip(&series.ach)
        .filter(|(t, _)| **t >= start && **t <= end)
        .map(|(_, a)| *a)
        .collect();
    if v.len() < 2 {
        return Err(Error::invalid("window", "fewer than 2 samples in the window"));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(QuasiSteady { mean, std, start, end, n: v.len() })
}

/// `(Ri_v, V̇ / (A_total · U))` for one measurement. The wind floor of the
/// Richardson number applies to both quantities.
pub fn to_fit_point(ach_mean: f64, house_volume: f64, cfg: &VentilationConfig, state: &DrivingState, height: f64) -> FitPoint {
    let ri = richardson_number(state, height);
    let rate = ach_mean * house_volume / 3600.0;
    FitPoint::new(ri.value, rate / (cfg.total_area * ri.u_used))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AchMeasurement {
    pub config: String,
    pub ach_mean: f64,
    pub ach_std: f64,
    pub start: f64,
    pub end: f64,
    pub ri_v: f64,
    pub nondim_rate: f64,
}

/// One row of the measurement context file.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementContext {
    pub start: f64,
    pub end: f64,
    pub u_wind: f64,
    /// K
    pub t_in: f64,
    /// K
    pub t_out: f64,
    pub config_name: String,
}

pub const DECAY_HEADER: [&str; 2] = ["timestamp", "concentration"];
pub const CONTEXT_HEADER: [&str; 6] = ["start", "end", "u_wind_ms", "t_in_c", "t_out_c", "config_name"];
pub const MEASUREMENT_HEADER: [&str; 7] = ["config", "ach_mean", "ach_std", "ri_v", "nondim_rate", "start_s", "end_s"];

fn header_index(h: &csv::StringRecord, names: &[&str]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            h.iter().position(|x| x.trim() == *n).ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("missing column '{n}'"),
            })
        })
        .collect()
}

fn num(rec: &csv::StringRecord, i: usize, name: &str, line: usize) -> Result<f64> {
    rec.get(i)
        .map(str::trim)
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse { line, msg: format!("invalid {name}") })
}

fn time(rec: &csv::StringRecord, i: usize, name: &str, line: usize) -> Result<f64> {
    rec.get(i)
        .and_then(parse_timestamp)
        .ok_or_else(|| Error::Parse { line, msg: format!("invalid {name}") })
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

/// `timestamp,concentration`
pub fn read_decay_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let idx = header_index(rdr.headers()?, &DECAY_HEADER)?;
    let (mut t, mut c) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        t.push(time(&rec, idx[0], "timestamp", line)?);
        c.push(num(&rec, idx[1], "concentration", line)?);
    }
    Ok((t, c))
}

/// `start,end,u_wind_ms,t_in_c,t_out_c,config_name`
pub fn read_context_csv<R: Read>(reader: R) -> Result<Vec<MeasurementContext>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let idx = header_index(rdr.headers()?, &CONTEXT_HEADER)?;
    let mut out: Vec<MeasurementContext> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let m = MeasurementContext {
            start: time(&rec, idx[0], "start", line)?,
            end: time(&rec, idx[1], "end", line)?,
            u_wind: num(&rec, idx[2], "u_wind_ms", line)?,
            t_in: celsius_to_kelvin(num(&rec, idx[3], "t_in_c", line)?),
            t_out: celsius_to_kelvin(num(&rec, idx[4], "t_out_c", line)?),
            config_name: rec.get(idx[5]).unwrap_or("").trim().to_string(),
        };
        if !(m.end > m.start) {
            return Err(Error::Parse { line, msg: "end must be after start".into() });
        }
        if let Some(prev) = out.last() {
            if m.start < prev.end {
                return Err(Error::Parse { line, msg: "measurement windows overlap or are out of order".into() });
            }
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::invalid("context", "no measurement rows"));
    }
    Ok(out)
}

pub fn write_measurements_csv<W: std::io::Write>(writer: W, rows: &[AchMeasurement]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MEASUREMENT_HEADER)?;
    for m in rows {
        w.write_record([
            m.config.clone(),
            m.ach_mean.to_string(),
            m.ach_std.to_string(),
            m.ri_v.to_string(),
            m.nondim_rate.to_string(),
            m.start.to_string(),
            m.end.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("measurements csv", e))?;
    Ok(())
}

/// Read `ri_v,nondim_rate` and an optional `weight` column; other columns
/// are ignored.
pub fn read_fit_points_csv<R: Read>(reader: R) -> Result<Vec<FitPoint>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let h = rdr.headers()?.clone();
    let idx = header_index(&h, &["ri_v", "nondim_rate"])?;
    let w = h.iter().position(|x| x.trim() == "weight");
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let mut p = FitPoint::new(num(&rec, idx[0], "ri_v", line)?, num(&rec, idx[1], "nondim_rate", line)?);
        if let Some(i) = w {
            p.weight = num(&rec, i, "weight", line)?;
        }
        out.push(p);
    }
    Ok(out)
}
