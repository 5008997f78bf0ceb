//! Monte-Carlo propagation of the uncertain parameters and first-order
//! Sobol sensitivity analysis.

mod io;
mod sobol;

pub use io::{write_sobol_csv, write_uq_csv, SOBOL_HEADER, UQ_HEADER};
pub use sobol::{
    sobol_first_order, sobol_first_order_multi, windowed_sensitivity, AnalysisWindow, BoxSummary,
    SobolDesign, SobolIndices, SobolReport, SobolRow, DEFAULT_SOBOL_BASE, MIN_SOBOL_BASE,
};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::btm::{integrate, IntegrationOptions};
use crate::domain::ScenarioConfig;
use crate::error::{Error, Result};
use crate::params::{ParameterRanges, ParameterSample, N_PARAMS};
use crate::vent::{VentModel, VentModelKind};
use crate::weather::{synthesize_trace, WindowedDistributions};

pub const DEFAULT_SAMPLES: usize = 1000;

/// Largest fraction of aborted samples tolerated by a run.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

// Samples integrated per parallel batch; bounds peak memory.
const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub n_samples: usize,
    pub seed: u64,
    pub ranges: ParameterRanges,
}

impl SamplingPlan {
    pub fn new(n_samples: usize, seed: u64, ranges: ParameterRanges) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::invalid("n_samples", "need at least 2 samples"));
        }
        Ok(SamplingPlan { n_samples, seed, ranges })
    }
}

/// Uniform draw on the open interval (0, 1) with 53 random bits.
pub(crate) fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Independent uniform draws within each range, parameters drawn in
/// declaration order for every sample.
pub fn sample_parameters(plan: &SamplingPlan) -> Vec<ParameterSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    (0..plan.n_samples)
        .map(|_| {
            let mut u = [0.0; N_PARAMS];
            for x in u.iter_mut() {
                *x = open_unit(&mut rng);
            }
            plan.ranges.from_unit(&u)
        })
        .collect()
}

/// Pointwise mean and 95 % interval of one quantity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Band {
    pub mean: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSummary {
    pub model: VentModelKind,
    pub t_air: Band,
    pub ach: Band,
    /// Samples that aborted with a solver failure.
    pub failed: Vec<SampleFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    pub sample_id: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UqReport {
    /// Epoch seconds of the first output step.
    pub start: f64,
    /// Seconds since `start`.
    pub time: Vec<f64>,
    pub n_samples: usize,
    pub models: Vec<ModelSummary>,
    /// Pointwise envelope over the ensemble models, when all three ran.
    pub ensemble: Option<(Band, Band)>,
}

/// Linear-interpolation percentile of sorted data, `q ∈ [0, 1]`.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= n {
        return sorted[n - 1];
    }
    let f = pos - i as f64;
    sorted[i] + f * (sorted[i + 1] - sorted[i])
}

/// Mean and 2.5/97.5 percentiles over the rows of `values[sample][step]`.
/// The interval is widened to contain the mean if needed.
pub fn aggregate(values: &[Vec<f64>]) -> Band {
    let n_steps = values.first().map_or(0, Vec::len);
    let mut band = Band::default();
    let mut col = Vec::with_capacity(values.len());
    for k in 0..n_steps {
        col.clear();
        col.extend(values.iter().map(|v| v[k]));
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        col.sort_by(f64::total_cmp);
        band.mean.push(mean);
        band.ci_low.push(percentile_sorted(&col, 0.025).min(mean));
        band.ci_high.push(percentile_sorted(&col, 0.975).max(mean));
    }
    band
}

pub fn ensemble_envelope(bands: &[&Band]) -> Band {
    let n = bands[0].mean.len();
    let m = bands.len() as f64;
    Band {
        mean: (0..n).map(|k| bands.iter().map(|b| b.mean[k]).sum::<f64>() / m).collect(),
        ci_low: (0..n).map(|k| bands.iter().map(|b| b.ci_low[k]).fold(f64::INFINITY, f64::min)).collect(),
        ci_high: (0..n).map(|k| bands.iter().map(|b| b.ci_high[k]).fold(f64::NEG_INFINITY, f64::max)).collect(),
    }
}

/// Options shared by the Monte-Carlo and Sobol drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub integration: IntegrationOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { integration: IntegrationOptions::default() }
    }
}

/// Integrate one sample under one model; returns `(t_air, ach)`.
pub(crate) fn run_sample(
    scenario: &ScenarioConfig,
    windows: &WindowedDistributions,
    sample: &ParameterSample,
    model: VentModel,
    opts: &IntegrationOptions,
    sample_id: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let trace = synthesize_trace(windows, sample.p_temp, sample.p_rad, sample.p_wind)?;
    let o = IntegrationOptions {
        floor_reference: Some(windows.mean_outdoor_temp()),
        sample_id,
        ..opts.clone()
    };
    let r = integrate(scenario, &trace, sample, model, &o)?;
    Ok((r.t_air, r.ach))
}

/// Output times (s since window start) of an integration over `windows`.
fn output_times(windows: &WindowedDistributions, opts: &IntegrationOptions) -> Vec<f64> {
    let horizon = opts.horizon.unwrap_or_else(|| windows.horizon());
    let n = (horizon / opts.output_interval).round() as usize;
    (0..=n).map(|k| k as f64 * opts.output_interval).collect()
}

/// Fail when too many samples aborted.
pub(crate) fn check_failures(what: &str, failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::TooManyFailures {
            what: what.to_string(),
            failed,
            total,
            limit_percent: 100.0 * MAX_FAILURE_FRACTION,
        });
    }
    Ok(())
}

/// Integrate every sample under every model and summarise the spread.
///
/// Samples are processed in fixed-size batches in sample order and merged
/// by sample id, so the result does not depend on thread scheduling.
pub fn run_monte_carlo(
    scenario: &ScenarioConfig,
    windows: &WindowedDistributions,
    plan: &SamplingPlan,
    models: &[VentModel],
    opts: &RunOptions,
) -> Result<UqReport> {
    if models.is_empty() {
        return Err(Error::invalid("models", "no ventilation model selected"));
    }
    let samples = sample_parameters(plan);
    for s in &samples {
        plan.ranges.check(s)?;
    }
    let mut summaries = Vec::with_capacity(models.len());
    for &model in models {
        let mut t_air = Vec::with_capacity(samples.len());
        let mut ach = Vec::with_capacity(samples.len());
        let mut failed = Vec::new();
        for (c, chunk) in samples.chunks(CHUNK).enumerate() {
            let out: Vec<Result<(Vec<f64>, Vec<f64>)>> = chunk
                .par_iter()
                .enumerate()
                .map(|(i, s)| run_sample(scenario, windows, s, model, &opts.integration, c * CHUNK + i))
                .collect();
            for (i, r) in out.into_iter().enumerate() {
                match r {
                    Ok((t, a)) => {
                        t_air.push(t);
                        ach.push(a);
                    }
                    Err(e) if e.is_solver_failure() => failed.push(SampleFailure {
                        sample_id: c * CHUNK + i,
                        message: e.to_string(),
                    }),
                    Err(e) => return Err(e),
                }
            }
        }
        check_failures(&format!("samples under model {}", model.kind()), failed.len(), samples.len())?;
        summaries.push(ModelSummary {
            model: model.kind(),
            t_air: aggregate(&t_air),
            ach: aggregate(&ach),
            failed,
        });
    }
    let ensemble = {
        let picked: Vec<&ModelSummary> = VentModelKind::ENSEMBLE
            .iter()
            .filter_map(|k| summaries.iter().find(|s| s.model == *k))
            .collect();
        (picked.len() == VentModelKind::ENSEMBLE.len()).then(|| {
            (
                ensemble_envelope(&picked.iter().map(|s| &s.t_air).collect::<Vec<_>>()),
                ensemble_envelope(&picked.iter().map(|s| &s.ach).collect::<Vec<_>>()),
            )
        })
    };
    Ok(UqReport {
        start: windows.start,
        time: output_times(windows, &opts.integration),
        n_samples: samples.len(),
        models: summaries,
        ensemble,
    })
}

/// Every ensemble sample yields one result per model.
pub fn run_ensemble_sample(
    scenario: &ScenarioConfig,
    windows: &WindowedDistributions,
    sample: &ParameterSample,
    sample_id: usize,
    opts: &IntegrationOptions,
) -> Result<Vec<crate::btm::SimulationResult>> {
    let trace = synthesize_trace(windows, sample.p_temp, sample.p_rad, sample.p_wind)?;
    let o = IntegrationOptions {
        floor_reference: Some(windows.mean_outdoor_temp()),
        sample_id,
        ..opts.clone()
    };
    [VentModel::CrossAssisting, VentModel::CrossOpposing, VentModel::SingleSided]
        .into_iter()
        .map(|m| integrate(scenario, &trace, sample, m, &o))
        .collect()
}
