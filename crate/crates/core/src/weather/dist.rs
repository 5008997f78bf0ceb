//! Per-window distributions of the weather inputs and their quantile
//! functions.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

/// Truncation half-width of the temperature distribution, in standard
/// deviations.
pub const TRUNCATION_SIGMA: f64 = 3.5;

const WEIBULL_TOL: f64 = 1e-8;
const WEIBULL_MAX_ITER: usize = 100;

/// A continuous 1-D distribution sampled by inverse transform.
pub trait InverseCdf {
    fn cdf(&self, x: f64) -> f64;
    /// Quantile for `p` in (0, 1). Callers validate `p`.
    fn quantile(&self, p: f64) -> f64;
}

/// The `p`-quantile of `dist`, with `p` restricted to the open unit interval.
pub fn inverse_transform_sample<D: InverseCdf + ?Sized>(dist: &D, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("probability {p} not in (0, 1)")));
    }
    Ok(dist.quantile(p))
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Normal distribution truncated to `mean ± 3.5 std`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub std: f64,
}

impl TruncatedNormal {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() || !(std.is_finite() && std >= 0.0) {
            return Err(Error::invalid("temp_dist", "mean must be finite and std >= 0"));
        }
        Ok(TruncatedNormal { mean, std })
    }

    fn mass_below(z: f64) -> f64 {
        std_normal_cdf(z.clamp(-TRUNCATION_SIGMA, TRUNCATION_SIGMA))
    }
}

impl InverseCdf for TruncatedNormal {
    fn cdf(&self, x: f64) -> f64 {
        if self.std == 0.0 {
            return if x < self.mean { 0.0 } else { 1.0 };
        }
        let lo = Self::mass_below(-TRUNCATION_SIGMA);
        let hi = Self::mass_below(TRUNCATION_SIGMA);
        ((Self::mass_below((x - self.mean) / self.std) - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    fn quantile(&self, p: f64) -> f64 {
        if self.std == 0.0 {
            return self.mean;
        }
        let lo = Self::mass_below(-TRUNCATION_SIGMA);
        let hi = Self::mass_below(TRUNCATION_SIGMA);
        let z = std_normal_quantile(lo + p * (hi - lo));
        self.mean + self.std * z.clamp(-TRUNCATION_SIGMA, TRUNCATION_SIGMA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniform {
    pub min: f64,
    pub max: f64,
}

impl Uniform {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(Error::invalid("solar_dist", "require finite min <= max"));
        }
        Ok(Uniform { min, max })
    }
}

impl InverseCdf for Uniform {
    fn cdf(&self, x: f64) -> f64 {
        if self.max == self.min {
            return if x < self.min { 0.0 } else { 1.0 };
        }
        ((x - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }

    fn quantile(&self, p: f64) -> f64 {
        self.min + p * (self.max - self.min)
    }
}

/// Wind-speed distribution of one window. A window whose samples are all
/// equal collapses to a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WindDistribution {
    Weibull { scale: f64, shape: f64 },
    Point(f64),
}

impl WindDistribution {
    pub fn weibull(scale: f64, shape: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0 && shape.is_finite() && shape > 0.0) {
            return Err(Error::invalid("wind_dist", "scale and shape must be > 0"));
        }
        Ok(WindDistribution::Weibull { scale, shape })
    }

    /// `(scale, shape)`; a point mass reports an infinite shape.
    pub fn scale_shape(&self) -> (f64, f64) {
        match *self {
            WindDistribution::Weibull { scale, shape } => (scale, shape),
            WindDistribution::Point(v) => (v, f64::INFINITY),
        }
    }

    pub fn from_scale_shape(scale: f64, shape: f64) -> Result<Self> {
        if shape == f64::INFINITY {
            if scale.is_finite() && scale >= 0.0 {
                Ok(WindDistribution::Point(scale))
            } else {
                Err(Error::invalid("wind_dist", "point mass must be >= 0"))
            }
        } else {
            Self::weibull(scale, shape)
        }
    }
}

impl InverseCdf for WindDistribution {
    fn cdf(&self, x: f64) -> f64 {
        match *self {
            WindDistribution::Weibull { scale, shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            WindDistribution::Point(v) => {
                if x < v {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        match *self {
            WindDistribution::Weibull { scale, shape } => {
                scale * (-(-p).ln_1p()).powf(1.0 / shape)
            }
            WindDistribution::Point(v) => v,
        }
    }
}

/// Maximum-likelihood Weibull fit by root finding on the profile-likelihood
/// equation for the shape parameter.
///
/// With `y = x / max(x)`, the shape `k` solves
/// `Σ yᵏ ln y / Σ yᵏ − 1/k − mean(ln y) = 0`, which is strictly increasing in
/// `k`; the scale follows as `max(x) · (mean yᵏ)^(1/k)`.
pub fn fit_weibull_mle(samples: &[f64]) -> Result<WindDistribution> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid("wind", "Weibull fit needs at least 2 samples"));
    }
    if samples.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::invalid("wind", "Weibull fit needs positive samples"));
    }
    let max = samples.iter().cloned().fold(f64::MIN, f64::max);
    let min = samples.iter().cloned().fold(f64::MAX, f64::min);
    if max - min <= 1e-12 * max {
        let mean = samples.iter().sum::<f64>() / n as f64;
        return Ok(WindDistribution::Point(mean));
    }
    let ln_y: Vec<f64> = samples.iter().map(|&x| (x / max).ln()).collect();
    let mean_ln = ln_y.iter().sum::<f64>() / n as f64;

    // (g, g') at shape k
    let eval = |k: f64| -> (f64, f64) {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &ln_y {
            let w = (k * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        let r = s1 / s0;
        let g = r - 1.0 / k - mean_ln;
        let dg = s2 / s0 - r * r + 1.0 / (k * k);
        (g, dg)
    };

    // Menon's moment estimate as the starting point.
    let var_ln = ln_y.iter().map(|l| (l - mean_ln).powi(2)).sum::<f64>() / (n - 1) as f64;
    let mut k = if var_ln > 0.0 {
        (std::f64::consts::PI / (6.0 * var_ln).sqrt()).clamp(1e-3, 1e3)
    } else {
        1.0
    };

    let (mut lo, mut hi) = (k, k);
    while eval(lo).0 > 0.0 {
        lo *= 0.5;
        if lo < 1e-8 {
            return Err(Error::NoConvergence {
                what: "Weibull shape bracketing",
                iterations: 0,
                residual: eval(lo).0,
            });
        }
    }
    while eval(hi).0 < 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::NoConvergence {
                what: "Weibull shape bracketing",
                iterations: 0,
                residual: eval(hi).0,
            });
        }
    }

    let mut last_g = f64::NAN;
    for _ in 0..WEIBULL_MAX_ITER {
        let (g, dg) = eval(k);
        last_g = g;
        if g < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let mut next = k - g / dg;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - k).abs() <= WEIBULL_TOL * k.max(1.0) {
            k = next;
            let mean_pow = ln_y.iter().map(|&l| (k * l).exp()).sum::<f64>() / n as f64;
            let scale = max * mean_pow.powf(1.0 / k);
            return WindDistribution::weibull(scale, k);
        }
        k = next;
    }
    Err(Error::NoConvergence {
        what: "Weibull maximum-likelihood fit",
        iterations: WEIBULL_MAX_ITER,
        residual: last_g,
    })
}
