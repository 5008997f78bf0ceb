//! Saltelli pick-and-freeze estimate of first-order Sobol indices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_failures, open_unit, percentile_sorted, run_sample, RunOptions};
use crate::clock::time_of_day;
use crate::domain::ScenarioConfig;
use crate::error::{Error, Result};
use crate::params::{Param, ParameterRanges, N_PARAMS};
use crate::vent::{VentModel, VentModelKind};
use crate::weather::WindowedDistributions;

pub const MIN_SOBOL_BASE: usize = 64;
pub const DEFAULT_SOBOL_BASE: usize = 512;

const RAW_CLAMP: (f64, f64) = (-0.05, 1.05);
const ROW_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SobolIndices {
    /// Raw estimates clamped to [-0.05, 1.05].
    pub first_order: Vec<f64>,
    pub variance: f64,
    /// The output did not vary; all indices are reported as zero.
    pub zero_variance: bool,
}

/// Two independent base matrices `A` and `B` on the open unit hypercube.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolDesign {
    pub dim: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl SobolDesign {
    pub fn new(dim: usize, base: usize, seed: u64) -> Result<Self> {
        if base < MIN_SOBOL_BASE {
            return Err(Error::invalid("sobol base", format!("need at least {MIN_SOBOL_BASE} base samples, got {base}")));
        }
        if dim == 0 {
            return Err(Error::invalid("sobol dim", "must be > 0"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |_| (0..dim).map(|_| open_unit(&mut rng)).collect::<Vec<f64>>();
        let a: Vec<Vec<f64>> = (0..base).map(&mut draw).collect();
        let b: Vec<Vec<f64>> = (0..base).map(&mut draw).collect();
        Ok(SobolDesign { dim, a, b })
    }

    pub fn base(&self) -> usize {
        self.a.len()
    }

    /// Model evaluations needed: `(dim + 2) · base`.
    pub fn n_evaluations(&self) -> usize {
        (self.dim + 2) * self.base()
    }

    /// Points of base row `j`: `A_j`, `B_j`, then `A_j` with column `i`
    /// taken from `B_j` for each `i`.
    pub fn row(&self, j: usize) -> Vec<Vec<f64>> {
        let mut pts = Vec::with_capacity(self.dim + 2);
        pts.push(self.a[j].clone());
        pts.push(self.b[j].clone());
        for i in 0..self.dim {
            let mut p = self.a[j].clone();
            p[i] = self.b[j][i];
            pts.push(p);
        }
        pts
    }
}

/// Running sums of the estimator for `n_out` outputs.
struct Accumulator {
    dim: usize,
    n: usize,
    shift: Vec<f64>,
    sa: Vec<f64>,
    sb: Vec<f64>,
    saa: Vec<f64>,
    sbb: Vec<f64>,
    sv: Vec<f64>,
}

impl Accumulator {
    fn new(dim: usize, n_out: usize) -> Self {
        let z = || vec![0.0; n_out];
        Accumulator { dim, n: 0, shift: Vec::new(), sa: z(), sb: z(), saa: z(), sbb: z(), sv: vec![0.0; n_out * dim] }
    }

    /// Centre the outputs on the mean of a first batch of rows. This keeps
    /// the estimator variance low and avoids cancellation for outputs with
    /// a large mean and a small spread.
    fn set_shift(&mut self, rows: &[Vec<Vec<f64>>]) {
        let n_out = self.sa.len();
        let m = 2.0 * rows.len() as f64;
        self.shift = (0..n_out)
            .map(|k| rows.iter().map(|r| r[0][k] + r[1][k]).sum::<f64>() / m)
            .collect();
    }

    /// `row[0] = f(A_j)`, `row[1] = f(B_j)`, `row[2 + i] = f(AB_j^i)`.
    fn add(&mut self, row: &[Vec<f64>]) {
        self.n += 1;
        for k in 0..self.sa.len() {
            let fa = row[0][k] - self.shift[k];
            let fb = row[1][k] - self.shift[k];
            self.sa[k] += fa;
            self.sb[k] += fb;
            self.saa[k] += fa * fa;
            self.sbb[k] += fb * fb;
            for i in 0..self.dim {
                self.sv[k * self.dim + i] += fb * (row[2 + i][k] - row[0][k]);
            }
        }
    }

    fn finish(&self) -> Vec<SobolIndices> {
        let n = self.n as f64;
        (0..self.sa.len())
            .map(|k| {
                let mean = (self.sa[k] + self.sb[k]) / (2.0 * n);
                let var = ((self.saa[k] + self.sbb[k]) / (2.0 * n) - mean * mean).max(0.0);
                let level = mean + self.shift.get(k).copied().unwrap_or(0.0);
                if var <= 1e-24 * (1.0 + level * level) {
                    return SobolIndices { first_order: vec![0.0; self.dim], variance: var, zero_variance: true };
                }
                SobolIndices {
                    first_order: (0..self.dim)
                        .map(|i| (self.sv[k * self.dim + i] / n / var).clamp(RAW_CLAMP.0, RAW_CLAMP.1))
                        .collect(),
                    variance: var,
                    zero_variance: false,
                }
            })
            .collect()
    }
}

/// First-order indices of a scalar function on the unit hypercube.
pub fn sobol_first_order<F>(dim: usize, base: usize, seed: u64, f: F) -> Result<SobolIndices>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut v = sobol_first_order_multi(dim, base, seed, 1, |x| Ok(vec![f(x)]))?;
    Ok(v.pop().expect("one output"))
}

/// First-order indices of every component of a vector-valued function.
/// Base rows whose evaluation fails with a solver failure are dropped; more
/// than 1 % dropped rows is an error.
pub fn sobol_first_order_multi<F>(dim: usize, base: usize, seed: u64, n_out: usize, f: F) -> Result<Vec<SobolIndices>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let design = SobolDesign::new(dim, base, seed)?;
    let (acc, dropped) = evaluate(&design, n_out, &f)?;
    check_failures("Sobol base rows", dropped, base)?;
    Ok(acc.finish())
}

fn evaluate<F>(design: &SobolDesign, n_out: usize, f: &F) -> Result<(Accumulator, usize)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let mut acc = Accumulator::new(design.dim, n_out);
    let mut dropped = 0;
    let rows: Vec<usize> = (0..design.base()).collect();
    for chunk in rows.chunks(ROW_CHUNK) {
        let out: Vec<Result<Vec<Vec<f64>>>> = chunk
            .par_iter()
            .map(|&j| design.row(j).iter().map(|p| f(p)).collect())
            .collect();
        let mut good = Vec::with_capacity(out.len());
        for r in out {
            match r {
                Ok(row) => {
                    if row.iter().any(|v| v.len() != n_out) {
                        return Err(Error::invalid("evaluator", "output length changed between evaluations"));
                    }
                    good.push(row);
                }
                Err(e) if e.is_solver_failure() => dropped += 1,
                Err(e) => return Err(e),
            }
        }
        if acc.n == 0 && !good.is_empty() {
            acc.set_shift(&good);
        }
        for row in &good {
            acc.add(row);
        }
    }
    if acc.n == 0 {
        return Err(Error::TooManyFailures {
            what: "Sobol base rows".into(),
            failed: dropped,
            total: dropped,
            limit_percent: 100.0 * super::MAX_FAILURE_FRACTION,
        });
    }
    Ok((acc, dropped))
}

/// Time-of-day interval, hours; wraps past midnight when `start > end`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisWindow {
    pub name: String,
    pub start_h: f64,
    pub end_h: f64,
}

impl AnalysisWindow {
    pub fn day() -> Self {
        AnalysisWindow { name: "day".into(), start_h: 9.0, end_h: 15.0 }
    }

    pub fn night() -> Self {
        AnalysisWindow { name: "night".into(), start_h: 21.0, end_h: 3.0 }
    }

    /// `day`, `night` or `<start>..<end>` in hours.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "day" => return Ok(Self::day()),
            "night" => return Ok(Self::night()),
            _ => {}
        }
        let bad = || Error::invalid("window", format!("expected day, night or <start>..<end> hours, got '{s}'"));
        let (a, b) = s.trim().split_once("..").ok_or_else(bad)?;
        let start_h: f64 = a.trim().parse().map_err(|_| bad())?;
        let end_h: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(0.0..=24.0).contains(&start_h) || !(0.0..=24.0).contains(&end_h) || start_h == end_h {
            return Err(bad());
        }
        Ok(AnalysisWindow { name: s.trim().to_string(), start_h, end_h })
    }

    pub fn contains_hour(&self, h: f64) -> bool {
        if self.start_h < self.end_h {
            h >= self.start_h && h < self.end_h
        } else {
            h >= self.start_h || h < self.end_h
        }
    }
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl BoxSummary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        BoxSummary {
            min: v[0],
            q25: percentile_sorted(&v, 0.25),
            median: percentile_sorted(&v, 0.5),
            q75: percentile_sorted(&v, 0.75),
            max: v[v.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolRow {
    pub window: String,
    pub model: VentModelKind,
    /// `t_air` or `ach`
    pub quantity: &'static str,
    pub parameter: Param,
    pub summary: BoxSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolReport {
    pub base: usize,
    pub rows: Vec<SobolRow>,
    /// Output steps inside an analysis window whose output did not vary.
    pub zero_variance_steps: usize,
    pub dropped_rows: usize,
}

impl SobolReport {
    pub fn find(&self, window: &str, model: VentModelKind, quantity: &str, p: Param) -> Option<&BoxSummary> {
        self.rows
            .iter()
            .find(|r| r.window == window && r.model == model && r.quantity == quantity && r.parameter == p)
            .map(|r| &r.summary)
    }
}

/// Per-minute first-order indices of `t_air` and `ach`, summarised over
/// each analysis window.
#[allow(clippy::too_many_arguments)]
pub fn windowed_sensitivity(
    scenario: &ScenarioConfig,
    windows: &WindowedDistributions,
    ranges: &ParameterRanges,
    base: usize,
    seed: u64,
    models: &[VentModel],
    analysis: &[AnalysisWindow],
    opts: &RunOptions,
) -> Result<SobolReport> {
    let io = &opts.integration;
    let horizon = io.horizon.unwrap_or_else(|| windows.horizon());
    let n_steps = (horizon / io.output_interval).round() as usize + 1;
    let steps_in: Vec<Vec<usize>> = analysis
        .iter()
        .map(|w| {
            (0..n_steps)
                .filter(|&k| w.contains_hour(time_of_day(windows.start + k as f64 * io.output_interval) / 3600.0))
                .collect()
        })
        .collect();
    for (w, s) in analysis.iter().zip(&steps_in) {
        if s.is_empty() {
            return Err(Error::invalid("window", format!("analysis window '{}' lies outside the simulated period", w.name)));
        }
    }
    let mut rows = Vec::new();
    let mut zero_steps = 0;
    let mut dropped_total = 0;
    let design = SobolDesign::new(N_PARAMS, base, seed)?;
    for &model in models {
        let f = |u: &[f64]| -> Result<Vec<f64>> {
            let mut x = [0.0; N_PARAMS];
            x.copy_from_slice(u);
            let s = ranges.from_unit(&x);
            let (mut t, a) = run_sample(scenario, windows, &s, model, io, 0)?;
            t.extend(a);
            Ok(t)
        };
        let (acc, dropped) = evaluate(&design, 2 * n_steps, &f)?;
        check_failures("Sobol base rows", dropped, base)?;
        dropped_total += dropped;
        let idx = acc.finish();
        for (w, steps) in analysis.iter().zip(&steps_in) {
            for (q, quantity) in ["t_air", "ach"].into_iter().enumerate() {
                let at = |k: usize| &idx[q * n_steps + k];
                zero_steps += steps.iter().filter(|&&k| at(k).zero_variance).count();
                for p in Param::ALL {
                    let vals: Vec<f64> = steps.iter().map(|&k| at(k).first_order[p.index()].clamp(0.0, 1.0)).collect();
                    rows.push(SobolRow {
                        window: w.name.clone(),
                        model: model.kind(),
                        quantity,
                        parameter: p,
                        summary: BoxSummary::of(&vals),
                    });
                }
            }
        }
    }
    Ok(SobolReport { base, rows, zero_variance_steps: zero_steps, dropped_rows: dropped_total })
}
