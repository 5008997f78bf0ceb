//! Deterministic synthetic weather for demos and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::{WeatherSample, WeatherSeries};
use crate::clock::{time_of_day, SECONDS_PER_DAY};
use crate::domain::celsius_to_kelvin;
use crate::error::Result;

/// Diurnal temperature and wind cycles with a clear-sky solar curve and
/// random fluctuations.
#[derive(Debug, Clone)]
pub struct SyntheticWeather {
    /// Wall-clock epoch seconds of the first sample.
    pub start: f64,
    pub duration: f64,
    pub period: f64,
    pub mean_temp_c: f64,
    pub temp_amplitude_c: f64,
    pub temp_noise_c: f64,
    pub peak_solar: f64,
    /// Weibull scale of the wind at the anemometer; varies ±40 % over the day.
    pub wind_scale: f64,
    pub wind_shape: f64,
    pub seed: u64,
}

impl Default for SyntheticWeather {
    fn default() -> Self {
        SyntheticWeather {
            // 2019-02-10T00:00:00
            start: 1_549_756_800.0,
            duration: SECONDS_PER_DAY,
            period: 10.0,
            mean_temp_c: 22.0,
            temp_amplitude_c: 6.0,
            temp_noise_c: 0.3,
            peak_solar: 750.0,
            wind_scale: 3.0,
            wind_shape: 2.0,
            seed: 2019,
        }
    }
}

impl SyntheticWeather {
    pub fn generate(&self) -> Result<WeatherSeries> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = (self.duration / self.period).round() as usize + 1;
        let mut samples = Vec::with_capacity(n);
        let mut temp_noise = 0.0;
        let mut gust = 0.0;
        let mut dir: f64 = 200.0;
        for i in 0..n {
            let t = self.start + i as f64 * self.period;
            let hour = time_of_day(t) / 3600.0;
            // warmest at 15:00
            let temp = self.mean_temp_c
                + self.temp_amplitude_c * (2.0 * PI * (hour - 9.0) / 24.0).sin();
            temp_noise = 0.98 * temp_noise + self.temp_noise_c * 0.2 * (rng.random::<f64>() - 0.5);
            let solar = if (6.0..18.0).contains(&hour) {
                let clear = self.peak_solar * (PI * (hour - 6.0) / 12.0).sin();
                clear * (0.9 + 0.1 * rng.random::<f64>())
            } else {
                0.0
            };
            // windier in the afternoon
            let scale = self.wind_scale * (1.0 + 0.4 * (2.0 * PI * (hour - 10.0) / 24.0).sin());
            let u: f64 = rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12);
            let draw = scale * (-(1.0 - u).ln()).powf(1.0 / self.wind_shape);
            gust = 0.7 * gust + 0.3 * draw;
            dir = (dir + 20.0 * (rng.random::<f64>() - 0.5)).rem_euclid(360.0);
            samples.push(WeatherSample {
                timestamp: t,
                outdoor_temp: celsius_to_kelvin(temp + temp_noise),
                wind_speed: gust.max(0.0),
                wind_dir: dir,
                solar,
            });
        }
        WeatherSeries::new(samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let a = SyntheticWeather::default().generate().unwrap();
        let b = SyntheticWeather::default().generate().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8641);
        assert_eq!(a.period(), 10.0);
        let noon = &a.samples()[12 * 360];
        let midnight = &a.samples()[0];
        assert!(noon.solar > 600.0);
        assert_eq!(midnight.solar, 0.0);
        assert!(noon.outdoor_temp > midnight.outdoor_temp);
    }
}
