//! Weather ingestion, smoothing, per-window distribution fitting and
//! synthesis of sampled input traces.

mod dist;
pub mod io;
pub use io::{
    load_weather_csv, read_weather_csv, read_windows_csv, write_weather_csv, write_windows_csv, RowRejection,
    WEATHER_HEADER, WINDOWS_HEADER,
};
pub mod synthetic;

pub use dist::{
    fit_weibull_mle, inverse_transform_sample, InverseCdf, TruncatedNormal, Uniform,
    WindDistribution, TRUNCATION_SIGMA,
};

use serde::{Deserialize, Serialize};

use crate::domain::check_temperature;
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_LENGTH: f64 = 1800.0;
pub const DEFAULT_SMOOTHING_WINDOW: f64 = 30.0;

/// Wind speeds below this are raised to it before the Weibull fit, whose
/// likelihood is undefined at zero.
pub const WIND_FIT_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherSample {
    /// Wall-clock seconds since the epoch.
    pub timestamp: f64,
    /// K
    pub outdoor_temp: f64,
    /// m/s
    pub wind_speed: f64,
    /// degrees; carried through but unused by the models
    pub wind_dir: f64,
    /// W/m²
    pub solar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    samples: Vec<WeatherSample>,
    period: f64,
}

impl WeatherSeries {
    pub fn new(samples: Vec<WeatherSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("weather", "empty series"));
        }
        for (i, s) in samples.iter().enumerate() {
            let p = format!("weather[{i}]");
            if !s.timestamp.is_finite() {
                return Err(Error::invalid(format!("{p}.timestamp"), "not finite"));
            }
            check_temperature(&format!("{p}.outdoor_temp"), s.outdoor_temp)?;
            if !(s.wind_speed.is_finite() && s.wind_speed >= 0.0) {
                return Err(Error::invalid(format!("{p}.wind_speed"), "must be >= 0"));
            }
            if !(s.solar.is_finite() && s.solar >= 0.0) {
                return Err(Error::invalid(format!("{p}.solar"), "must be >= 0"));
            }
            if i > 0 && s.timestamp <= samples[i - 1].timestamp {
                return Err(Error::invalid(
                    format!("{p}.timestamp"),
                    "timestamps must be strictly increasing",
                ));
            }
        }
        let period = if samples.len() < 2 {
            0.0
        } else {
            let mut d: Vec<f64> = samples
                .windows(2)
                .map(|w| w[1].timestamp - w[0].timestamp)
                .collect();
            d.sort_by(f64::total_cmp);
            d[d.len() / 2]
        };
        Ok(WeatherSeries { samples, period })
    }

    pub fn samples(&self) -> &[WeatherSample] {
        &self.samples
    }

    /// Nominal sampling period (median spacing), s.
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Apply a transformation to every wind-speed sample.
    pub fn map_wind(mut self, f: impl Fn(f64) -> f64) -> Self {
        for s in &mut self.samples {
            s.wind_speed = f(s.wind_speed);
        }
        self
    }
}

/// Centered moving average over `[t − w/2, t + w/2)`; near the ends the
/// available part of the window is used. Wind direction is averaged as a
/// unit vector.
pub fn moving_average(series: &WeatherSeries, window: f64) -> Result<WeatherSeries> {
    let s = series.samples();
    if s.is_empty() {
        return Err(Error::invalid("weather", "empty series"));
    }
    if !(window.is_finite() && window >= series.period()) || window <= 0.0 {
        return Err(Error::invalid(
            "smoothing window",
            format!(
                "window {window} s shorter than the sampling period {} s",
                series.period()
            ),
        ));
    }
    let n = s.len();
    // prefix sums: temp, wind, solar, sin(dir), cos(dir)
    let mut prefix = vec![[0.0f64; 5]; n + 1];
    for (i, x) in s.iter().enumerate() {
        let d = x.wind_dir.to_radians();
        let row = [x.outdoor_temp, x.wind_speed, x.solar, d.sin(), d.cos()];
        for c in 0..5 {
            prefix[i + 1][c] = prefix[i][c] + row[c];
        }
    }
    let half = 0.5 * window;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut out = Vec::with_capacity(n);
    for x in s {
        while s[lo].timestamp < x.timestamp - half {
            lo += 1;
        }
        while hi < n && s[hi].timestamp < x.timestamp + half {
            hi += 1;
        }
        let count = (hi - lo) as f64;
        let avg = |c: usize| (prefix[hi][c] - prefix[lo][c]) / count;
        let dir = avg(3).atan2(avg(4)).to_degrees().rem_euclid(360.0);
        out.push(WeatherSample {
            timestamp: x.timestamp,
            outdoor_temp: avg(0),
            wind_speed: avg(1).max(0.0),
            wind_dir: dir,
            solar: avg(2).max(0.0),
        });
    }
    WeatherSeries::new(out)
}

/// Fitted distributions of one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFit {
    pub temp: TruncatedNormal,
    pub solar: Uniform,
    pub wind: WindDistribution,
    pub n_samples: usize,
}

/// Contiguous windows of equal length starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedDistributions {
    pub start: f64,
    pub window_length: f64,
    pub windows: Vec<WindowFit>,
}

impl WindowedDistributions {
    pub fn new(start: f64, window_length: f64, windows: Vec<WindowFit>) -> Result<Self> {
        if !(window_length.is_finite() && window_length > 0.0) {
            return Err(Error::invalid("window_length", "must be > 0"));
        }
        if windows.is_empty() {
            return Err(Error::invalid("windows", "at least one window required"));
        }
        Ok(WindowedDistributions {
            start,
            window_length,
            windows,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.windows.len() as f64 * self.window_length
    }

    /// Mean of the per-window mean outdoor temperatures, K.
    pub fn mean_outdoor_temp(&self) -> f64 {
        self.windows.iter().map(|w| w.temp.mean).sum::<f64>() / self.windows.len() as f64
    }

    /// Keep the windows covering the first `horizon` seconds.
    pub fn truncated(&self, horizon: f64) -> Result<Self> {
        let n = (horizon / self.window_length).ceil() as usize;
        if n == 0 || n > self.windows.len() {
            return Err(Error::invalid(
                "horizon",
                format!(
                    "{horizon} s requested but the weather covers {} s",
                    self.horizon()
                ),
            ));
        }
        Self::new(self.start, self.window_length, self.windows[..n].to_vec())
    }
}

/// Split the series into aligned windows and fit one distribution per
/// channel and window.
///
/// Windows start at multiples of `window_length` on the wall clock. A
/// trailing window holding fewer than two samples (typically a single
/// boundary sample) is dropped; any other window with fewer than two samples
/// is an error.
pub fn fit_window_distributions(
    series: &WeatherSeries,
    window_length: f64,
) -> Result<WindowedDistributions> {
    if !(window_length.is_finite() && window_length > 0.0) {
        return Err(Error::invalid("window_length", "must be > 0"));
    }
    let s = series.samples();
    let first = s[0].timestamp;
    let last = s[s.len() - 1].timestamp;
    if last - first + series.period() < window_length {
        return Err(Error::invalid(
            "weather",
            format!(
                "series spans {} s, shorter than one {window_length} s window",
                last - first + series.period()
            ),
        ));
    }
    let start = (first / window_length).floor() * window_length;
    let index = |t: f64| ((t - start) / window_length).floor() as usize;
    let n_windows = index(last) + 1;
    let mut buckets: Vec<Vec<&WeatherSample>> = vec![Vec::new(); n_windows];
    for x in s {
        buckets[index(x.timestamp)].push(x);
    }
    if buckets.len() > 1 && buckets[n_windows - 1].len() < 2 {
        buckets.pop();
    }
    let mut windows = Vec::with_capacity(buckets.len());
    for (k, b) in buckets.iter().enumerate() {
        let t0 = start + k as f64 * window_length;
        let path = format!("weather window {k} ({})", crate::clock::format_timestamp(t0));
        if b.len() < 2 {
            return Err(Error::invalid(path, format!("{} samples, need >= 2", b.len())));
        }
        let n = b.len() as f64;
        let mean = b.iter().map(|x| x.outdoor_temp).sum::<f64>() / n;
        let var = b.iter().map(|x| (x.outdoor_temp - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let solar_min = b.iter().map(|x| x.solar).fold(f64::INFINITY, f64::min);
        let solar_max = b.iter().map(|x| x.solar).fold(f64::NEG_INFINITY, f64::max);
        if b.iter().all(|x| x.wind_speed == 0.0) {
            return Err(Error::invalid(path, "all wind samples are zero"));
        }
        let wind: Vec<f64> = b.iter().map(|x| x.wind_speed.max(WIND_FIT_FLOOR)).collect();
        windows.push(WindowFit {
            temp: TruncatedNormal::new(mean, var.sqrt())?,
            solar: Uniform::new(solar_min, solar_max)?,
            wind: fit_weibull_mle(&wind).map_err(|e| match e {
                Error::Invalid { msg, .. } => Error::invalid(path.clone(), msg),
                other => other,
            })?,
            n_samples: b.len(),
        });
    }
    WindowedDistributions::new(start, window_length, windows)
}

/// Smooth the raw series and fit per-window distributions.
pub fn prepare_windows(
    series: &WeatherSeries,
    smoothing_window: f64,
    window_length: f64,
) -> Result<WindowedDistributions> {
    fit_window_distributions(&moving_average(series, smoothing_window)?, window_length)
}

/// Power-law height correction `speed · (to/from)^exponent`.
pub fn correct_wind_height(speed: f64, from_height: f64, to_height: f64, exponent: f64) -> Result<f64> {
    if !(from_height > 0.0) || !(to_height > 0.0) {
        return Err(Error::invalid("wind height", "heights must be > 0"));
    }
    Ok(speed * (to_height / from_height).powf(exponent))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherPoint {
    /// K
    pub outdoor_temp: f64,
    /// W/m²
    pub solar: f64,
    /// m/s at the reference height
    pub wind_speed: f64,
}

/// Piecewise-constant weather inputs, one value per window and channel.
///
/// Evaluation outside `[0, horizon)` wraps periodically, which supplies the
/// spin-up period with the tail of the simulated day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherInputTrace {
    pub start: f64,
    pub window_length: f64,
    pub outdoor_temp: Vec<f64>,
    pub solar: Vec<f64>,
    pub wind_speed: Vec<f64>,
}

impl WeatherInputTrace {
    /// Constant inputs over `n_windows` windows.
    pub fn constant(
        start: f64,
        window_length: f64,
        n_windows: usize,
        point: WeatherPoint,
    ) -> Self {
        WeatherInputTrace {
            start,
            window_length,
            outdoor_temp: vec![point.outdoor_temp; n_windows],
            solar: vec![point.solar; n_windows],
            wind_speed: vec![point.wind_speed; n_windows],
        }
    }

    pub fn n_windows(&self) -> usize {
        self.outdoor_temp.len()
    }

    pub fn horizon(&self) -> f64 {
        self.n_windows() as f64 * self.window_length
    }

    pub fn window_index(&self, t: f64) -> usize {
        let n = self.n_windows() as i64;
        ((t / self.window_length).floor() as i64).rem_euclid(n) as usize
    }

    /// Inputs at `t` seconds after the trace start.
    pub fn at(&self, t: f64) -> WeatherPoint {
        self.window(self.window_index(t))
    }

    pub fn window(&self, k: usize) -> WeatherPoint {
        WeatherPoint {
            outdoor_temp: self.outdoor_temp[k],
            solar: self.solar[k],
            wind_speed: self.wind_speed[k],
        }
    }

    pub fn mean_outdoor_temp(&self) -> f64 {
        self.outdoor_temp.iter().sum::<f64>() / self.n_windows() as f64
    }
}

/// Build one input trace from a single quantile probability per channel.
pub fn synthesize_trace(
    windows: &WindowedDistributions,
    p_temp: f64,
    p_rad: f64,
    p_wind: f64,
) -> Result<WeatherInputTrace> {
    for (name, p) in [("p_temp", p_temp), ("p_rad", p_rad), ("p_wind", p_wind)] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(name, format!("probability {p} not in (0, 1)")));
        }
    }
    let w = &windows.windows;
    Ok(WeatherInputTrace {
        start: windows.start,
        window_length: windows.window_length,
        outdoor_temp: w.iter().map(|x| x.temp.quantile(p_temp)).collect(),
        solar: w.iter().map(|x| x.solar.quantile(p_rad).max(0.0)).collect(),
        wind_speed: w.iter().map(|x| x.wind.quantile(p_wind).max(0.0)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sample(t: f64, temp: f64, wind: f64, solar: f64) -> WeatherSample {
        WeatherSample {
            timestamp: t,
            outdoor_temp: temp,
            wind_speed: wind,
            wind_dir: 90.0,
            solar,
        }
    }

    fn series(n: usize, f: impl FnMut(usize) -> WeatherSample) -> WeatherSeries {
        WeatherSeries::new((0..n).map(f).collect()).unwrap()
    }

    #[test]
    fn constant_series_unchanged_by_smoothing() {
        let s = series(120, |i| sample(i as f64, 300.0, 5.0, 5.0));
        let m = moving_average(&s, 30.0).unwrap();
        for x in m.samples() {
            assert_relative_eq!(x.wind_speed, 5.0, epsilon = 1e-12);
            assert_relative_eq!(x.solar, 5.0, epsilon = 1e-12);
            assert_relative_eq!(x.outdoor_temp, 300.0, epsilon = 1e-9);
            assert_relative_eq!(x.wind_dir, 90.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn alternating_series_interior_average() {
        let s = series(200, |i| sample(i as f64, 300.0, if i % 2 == 0 { 0.0 } else { 10.0 }, 0.0));
        let m = moving_average(&s, 30.0).unwrap();
        // direct averaging oracle
        for (i, x) in m.samples().iter().enumerate() {
            let lo = i.saturating_sub(15);
            let hi = (i + 15).min(200);
            let vals: Vec<f64> = (lo..hi).map(|j| if j % 2 == 0 { 0.0 } else { 10.0 }).collect();
            let direct = vals.iter().sum::<f64>() / vals.len() as f64;
            assert_relative_eq!(x.wind_speed, direct, epsilon = 1e-12);
            if (15..185).contains(&i) {
                assert!((x.wind_speed - 5.0).abs() <= 10.0 / 30.0 + 1e-12);
            }
        }
    }

    #[test]
    fn smoothing_window_shorter_than_period() {
        let s = series(10, |i| sample(60.0 * i as f64, 300.0, 1.0, 0.0));
        assert!(moving_average(&s, 30.0).is_err());
    }

    #[test]
    fn fit_recovers_normal_temperature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Normal::new(300.0, 2.0).unwrap();
        let s = series(1800, |i| sample(i as f64, g.sample(&mut rng), 2.0 + (i % 7) as f64 * 0.1, 500.0));
        let w = fit_window_distributions(&s, 1800.0).unwrap();
        assert_eq!(w.windows.len(), 1);
        let t = w.windows[0].temp;
        assert!((t.mean - 300.0).abs() <= 0.2, "{}", t.mean);
        assert!((t.std - 2.0).abs() <= 0.2, "{}", t.std);
        // constant solar: degenerate uniform
        assert_eq!(w.windows[0].solar, Uniform { min: 500.0, max: 500.0 });
    }

    #[test]
    fn windows_tile_and_trailing_sample_dropped() {
        // 2 h at 10 s plus the sample at exactly 2 h
        let s = series(721, |i| sample(10.0 * i as f64, 300.0 + (i % 5) as f64 * 0.1, 1.0 + (i % 3) as f64, 0.0));
        let w = fit_window_distributions(&s, 1800.0).unwrap();
        assert_eq!(w.windows.len(), 4);
        assert_eq!(w.start, 0.0);
        assert!(w.windows.iter().all(|x| x.n_samples == 180));
        assert_eq!(w.horizon(), 7200.0);
    }

    #[test]
    fn sparse_interior_window_is_error() {
        let mut v: Vec<WeatherSample> =
            (0..180).map(|i| sample(10.0 * i as f64, 300.0, 1.0 + (i % 2) as f64, 0.0)).collect();
        v.push(sample(1900.0, 300.0, 1.0, 0.0));
        v.extend((0..180).map(|i| sample(3600.0 + 10.0 * i as f64, 300.0, 1.0 + (i % 2) as f64, 0.0)));
        let s = WeatherSeries::new(v).unwrap();
        assert!(fit_window_distributions(&s, 1800.0).is_err());
    }

    #[test]
    fn all_zero_wind_is_error() {
        let s = series(180, |i| sample(10.0 * i as f64, 300.0, 0.0, 0.0));
        let err = fit_window_distributions(&s, 1800.0).unwrap_err().to_string();
        assert!(err.contains("zero"), "{err}");
    }

    #[test]
    fn short_series_is_error() {
        let s = series(10, |i| sample(10.0 * i as f64, 300.0, 1.0, 0.0));
        assert!(fit_window_distributions(&s, 1800.0).is_err());
    }

    #[test]
    fn height_correction() {
        assert_eq!(correct_wind_height(3.0, 10.0, 10.0, 0.25).unwrap(), 3.0);
        assert_eq!(correct_wind_height(3.0, 25.0, 2.5, 0.0).unwrap(), 3.0);
        assert_relative_eq!(
            correct_wind_height(4.0, 25.0, 2.5, 0.25).unwrap(),
            4.0 * 10f64.powf(-0.25),
            max_relative = 1e-12
        );
        assert_relative_eq!(correct_wind_height(4.0, 25.0, 2.5, 0.25).unwrap(), 2.249, epsilon = 5e-4);
        assert!(correct_wind_height(1.0, 0.0, 2.0, 0.25).is_err());
        assert!(correct_wind_height(1.0, 2.0, -1.0, 0.25).is_err());
    }

    fn two_windows() -> WindowedDistributions {
        let fit = |mean: f64| WindowFit {
            temp: TruncatedNormal::new(mean, 1.0).unwrap(),
            solar: Uniform::new(0.0, 800.0).unwrap(),
            wind: WindDistribution::weibull(3.0, 2.0).unwrap(),
            n_samples: 180,
        };
        WindowedDistributions::new(0.0, 1800.0, vec![fit(300.0), fit(304.0)]).unwrap()
    }

    #[test]
    fn trace_midpoint_solar() {
        let t = synthesize_trace(&two_windows(), 0.5, 0.5, 0.5).unwrap();
        assert_eq!(t.at(0.0).solar, 400.0);
        assert_eq!(t.at(1799.0).solar, 400.0);
    }

    #[test]
    fn trace_steps_at_window_boundary() {
        let t = synthesize_trace(&two_windows(), 0.5, 0.5, 0.5).unwrap();
        assert_relative_eq!(t.at(1799.999).outdoor_temp, 300.0, epsilon = 1e-9);
        assert_relative_eq!(t.at(1800.0).outdoor_temp, 304.0, epsilon = 1e-9);
        // periodic wrap for spin-up
        assert_relative_eq!(t.at(-1.0).outdoor_temp, 304.0, epsilon = 1e-9);
    }

    #[test]
    fn trace_wind_monotone_in_p() {
        let lo = synthesize_trace(&two_windows(), 0.5, 0.5, 0.01).unwrap();
        let hi = synthesize_trace(&two_windows(), 0.5, 0.5, 0.99).unwrap();
        for k in 0..2 {
            assert!(hi.wind_speed[k] > lo.wind_speed[k]);
        }
        assert!(synthesize_trace(&two_windows(), 0.0, 0.5, 0.5).is_err());
    }
}
