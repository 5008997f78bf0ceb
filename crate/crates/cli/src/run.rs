use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter};
use std::path::Path;

use anyhow::{bail, Context, Result};
use ventsim_core::btm::{integrate, write_result_csv, IntegrationOptions, DEFAULT_OUTPUT_INTERVAL};
use ventsim_core::domain::{load_scenario, ScenarioConfig};
use ventsim_core::tracer::{
    decay_to_ach_series, quasi_steady_stats, read_context_csv, read_decay_csv, read_fit_points_csv, to_fit_point,
    write_measurements_csv, AchMeasurement, DecayRecord,
};
use ventsim_core::uq::{
    run_monte_carlo, sample_parameters, sobol_first_order, windowed_sensitivity, write_sobol_csv, write_uq_csv,
    AnalysisWindow, RunOptions, SamplingPlan,
};
use ventsim_core::vent::{fit_richardson_coeffs, DrivingState, RichardsonCoefficients, RichardsonFit, VentModel};
use ventsim_core::weather::synthetic::SyntheticWeather;
use ventsim_core::weather::{
    correct_wind_height, load_weather_csv, prepare_windows, read_windows_csv, synthesize_trace, write_weather_csv,
    write_windows_csv, WindowedDistributions, WINDOWS_HEADER,
};

use crate::args::*;
use crate::manifest::{resolve_inputs, RunManifest};
use crate::plot;

pub const COEFFS_HEADER: [&str; 5] = ["c1", "c2", "c3", "rms_residual", "n_points"];

/// Run one command, writing its manifest into the output directory first.
pub fn execute(mut cmd: Command) -> Result<()> {
    if let Command::Rerun(a) = &cmd {
        return rerun(a);
    }
    let out = cmd.out().expect("output directory").clone();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    cmd.set_out(fs::canonicalize(&out)?);
    resolve_inputs(&mut cmd)?;
    let manifest = RunManifest::new(&cmd)?;
    let out = cmd.out().unwrap().clone();
    manifest.write(&out)?;
    match &cmd {
        Command::Simulate(a) => simulate(a),
        Command::FitWeather(a) => fit_weather(a),
        Command::FitRichardson(a) => fit_richardson(a),
        Command::AchDecay(a) => ach_decay(a),
        Command::Sobol(a) => sobol(a),
        Command::Plot(a) => plot::run(a),
        Command::GenWeather(a) => gen_weather(a),
        Command::Rerun(_) => unreachable!(),
    }
}

fn rerun(a: &RerunArgs) -> Result<()> {
    let m = RunManifest::read(&a.manifest)?;
    m.verify_inputs()?;
    let mut cmd = m.command;
    if matches!(cmd, Command::Rerun(_)) {
        bail!("manifest {} records a rerun", a.manifest.display());
    }
    if let Some(out) = &a.out {
        cmd.set_out(out.clone());
    }
    execute(cmd)
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| ventsim_core::Error::invalid("--seed", "required for batch runs").into())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).map_err(|e| ventsim_core::Error::io(path, e))?,
    ))
}

/// Fitted windows, either read directly or fitted from a raw record.
pub fn load_windows(path: &Path, smoothing_s: f64, window_length_s: f64) -> Result<WindowedDistributions> {
    let mut first = String::new();
    open(path)?.read_line(&mut first).map_err(|e| ventsim_core::Error::io(path, e))?;
    if first.trim().split(',').map(str::trim).eq(WINDOWS_HEADER) {
        return Ok(read_windows_csv(open(path)?).with_context(|| format!("reading {}", path.display()))?);
    }
    let (series, rejected) = load_weather_csv(path).with_context(|| format!("reading {}", path.display()))?;
    for r in &rejected {
        eprintln!("warning: {}: line {} skipped: {}", path.display(), r.line, r.reason);
    }
    Ok(prepare_windows(&series, smoothing_s, window_length_s)?)
}

fn read_coeffs(path: &Path) -> Result<RichardsonCoefficients> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let h = rdr.headers()?.clone();
    let col = |n: &str| {
        h.iter()
            .position(|x| x.trim() == n)
            .with_context(|| format!("{}: missing column '{n}'", path.display()))
    };
    let (i1, i2, i3) = (col("c1")?, col("c2")?, col("c3")?);
    let rec = rdr
        .records()
        .next()
        .with_context(|| format!("{}: no coefficient row", path.display()))??;
    let get = |i: usize| -> Result<f64> {
        rec.get(i)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .with_context(|| format!("{}: invalid coefficient", path.display()))
    };
    Ok(RichardsonCoefficients::new(get(i1)?, get(i2)?, get(i3)?)?)
}

pub fn write_coeffs(path: &Path, fit: &RichardsonFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(COEFFS_HEADER)?;
    let c = fit.coeffs;
    w.write_record([
        c.c1.to_string(),
        c.c2.to_string(),
        c.c3.to_string(),
        fit.rms_residual.to_string(),
        fit.n_points.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

fn select_models(a: &ModelArgs) -> Result<Vec<VentModel>> {
    Ok(match a.models {
        ModelSelection::Ensemble => vec![VentModel::CrossAssisting, VentModel::CrossOpposing, VentModel::SingleSided],
        ModelSelection::CrossAssisting => vec![VentModel::CrossAssisting],
        ModelSelection::CrossOpposing => vec![VentModel::CrossOpposing],
        ModelSelection::SingleSided => vec![VentModel::SingleSided],
        ModelSelection::Richardson => {
            let path = a
                .coeffs
                .as_ref()
                .ok_or_else(|| ventsim_core::Error::invalid("--coeffs", "required with --models richardson"))?;
            vec![VentModel::RichardsonFit(read_coeffs(path)?)]
        }
    })
}

fn integration_options(a: &IntegrationArgs) -> Result<IntegrationOptions> {
    if !(a.dt > 0.0) || DEFAULT_OUTPUT_INTERVAL % a.dt != 0.0 {
        return Err(ventsim_core::Error::invalid("--dt", format!("{} s does not divide the 60 s output interval", a.dt)).into());
    }
    if !(a.spinup_hours >= 0.0) {
        return Err(ventsim_core::Error::invalid("--spinup-hours", "must be >= 0").into());
    }
    Ok(IntegrationOptions {
        dt: a.dt,
        spin_up: a.spinup_hours * 3600.0,
        ..IntegrationOptions::default()
    })
}

fn limit_horizon(w: WindowedDistributions, hours: Option<f64>) -> Result<WindowedDistributions> {
    match hours {
        None => Ok(w),
        Some(h) => Ok(w.truncated(h * 3600.0)?),
    }
}

fn load_scenario_at(path: &Path) -> Result<ScenarioConfig> {
    load_scenario(path).with_context(|| format!("scenario {}", path.display()))
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let seed = require_seed(a.seed)?;
    let scenario = load_scenario_at(&a.scenario)?;
    let w = &a.weather;
    let windows = limit_horizon(load_windows(&w.weather, w.smoothing_s, w.window_length_s)?, a.integration.horizon_hours)?;
    let models = select_models(&a.model)?;
    let integration = integration_options(&a.integration)?;
    let plan = SamplingPlan::new(a.samples, seed, scenario.ranges.clone())?;
    let report = run_monte_carlo(&scenario, &windows, &plan, &models, &RunOptions { integration: integration.clone() })?;
    write_uq_csv(create(&a.out.join("uq.csv"))?, &report)?;

    let mut f = csv::Writer::from_writer(create(&a.out.join("failures.csv"))?);
    f.write_record(["model", "sample_id", "message"])?;
    for m in &report.models {
        for x in &m.failed {
            f.write_record([m.model.as_str(), &x.sample_id.to_string(), &x.message])?;
        }
        if !m.failed.is_empty() {
            eprintln!("warning: {} of {} samples failed under {}", m.failed.len(), report.n_samples, m.model);
        }
    }
    f.flush()?;

    if a.emit_samples > 0 {
        let dir = a.out.join("samples");
        fs::create_dir_all(&dir)?;
        let samples = sample_parameters(&plan);
        for (id, s) in samples.iter().enumerate().take(a.emit_samples) {
            let trace = synthesize_trace(&windows, s.p_temp, s.p_rad, s.p_wind)?;
            let o = IntegrationOptions {
                floor_reference: Some(windows.mean_outdoor_temp()),
                sample_id: id,
                ..integration.clone()
            };
            for &m in &models {
                match integrate(&scenario, &trace, s, m, &o) {
                    Ok(r) => write_result_csv(create(&dir.join(format!("sample_{id:05}_{}.csv", m.kind())))?, &r)?,
                    Err(e) if e.is_solver_failure() => eprintln!("warning: sample {id} under {}: {e}", m.kind()),
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    eprintln!(
        "simulated {} samples x {} model(s), {} output steps -> {}",
        report.n_samples,
        report.models.len(),
        report.time.len(),
        a.out.display()
    );
    Ok(())
}

fn fit_weather(a: &FitWeatherArgs) -> Result<()> {
    let w = &a.weather;
    let windows = load_windows(&w.weather, w.smoothing_s, w.window_length_s)?;
    write_windows_csv(create(&a.out.join("windows.csv"))?, &windows)?;
    eprintln!("fitted {} windows -> {}", windows.windows.len(), a.out.display());
    Ok(())
}

fn fit_richardson(a: &FitRichardsonArgs) -> Result<()> {
    let pts = read_fit_points_csv(open(&a.measurements)?).with_context(|| format!("reading {}", a.measurements.display()))?;
    let fit = fit_richardson_coeffs(&pts)?;
    write_coeffs(&a.out.join("coefficients.csv"), &fit)?;
    eprintln!(
        "c1 = {}, c2 = {}, c3 = {} (rms {}, {} points)",
        fit.coeffs.c1, fit.coeffs.c2, fit.coeffs.c3, fit.rms_residual, fit.n_points
    );
    Ok(())
}

fn ach_decay(a: &AchDecayArgs) -> Result<()> {
    let scenario = load_scenario_at(&a.scenario)?;
    let (t, c) = read_decay_csv(open(&a.decay)?).with_context(|| format!("reading {}", a.decay.display()))?;
    let record = DecayRecord::new(t, c, scenario.geometry.air_volume, a.background)?;
    let context = read_context_csv(open(&a.context)?).with_context(|| format!("reading {}", a.context.display()))?;
    let g = &scenario.geometry;
    let wind = &scenario.wind;
    let mut rows = Vec::with_capacity(context.len());
    let mut lo = f64::NEG_INFINITY;
    for (k, m) in context.iter().enumerate() {
        let ctx = |e: ventsim_core::Error| anyhow::Error::from(e).context(format!("measurement {} ({})", k + 1, m.config_name));
        let segment = record.segment(lo, m.end).map_err(ctx)?;
        lo = m.end;
        let series = decay_to_ach_series(&segment).map_err(ctx)?;
        let q = quasi_steady_stats(&series, m.start, m.end - m.start).map_err(ctx)?;
        let cfg = scenario.ventilation_from_label(&m.config_name).map_err(ctx)?;
        let u = correct_wind_height(m.u_wind, wind.anemometer_height, g.reference_height, wind.exponent)?;
        let state = DrivingState::new(m.t_in, m.t_out, u).map_err(ctx)?;
        let p = to_fit_point(q.mean, g.air_volume, &cfg, &state, g.mean_height());
        rows.push(AchMeasurement {
            config: m.config_name.clone(),
            ach_mean: q.mean,
            ach_std: q.std,
            start: q.start,
            end: q.end,
            ri_v: p.ri_v,
            nondim_rate: p.nondim_rate,
        });
    }
    write_measurements_csv(create(&a.out.join("measurements.csv"))?, &rows)?;
    eprintln!("{} measurements -> {}", rows.len(), a.out.display());
    Ok(())
}

fn sobol(a: &SobolArgs) -> Result<()> {
    let seed = require_seed(a.seed)?;
    if a.linear {
        let idx = sobol_first_order(2, a.base, seed, |x| x[0] + 2.0 * x[1])?;
        let mut w = csv::Writer::from_writer(create(&a.out.join("sobol_linear.csv"))?);
        w.write_record(["parameter", "first_order", "variance", "zero_variance"])?;
        for (i, s) in idx.first_order.iter().enumerate() {
            w.write_record([format!("x{}", i + 1), s.to_string(), idx.variance.to_string(), idx.zero_variance.to_string()])?;
        }
        w.flush()?;
        return Ok(());
    }
    let (Some(scenario), Some(weather)) = (&a.scenario, &a.weather) else {
        bail!("--scenario and --weather are required");
    };
    let scenario = load_scenario_at(scenario)?;
    let windows = limit_horizon(load_windows(weather, a.smoothing_s, a.window_length_s)?, a.integration.horizon_hours)?;
    let models = select_models(&a.model)?;
    let analysis = a.windows.iter().map(|s| AnalysisWindow::parse(s)).collect::<ventsim_core::Result<Vec<_>>>()?;
    let opts = RunOptions { integration: integration_options(&a.integration)? };
    let report = windowed_sensitivity(&scenario, &windows, &scenario.ranges, a.base, seed, &models, &analysis, &opts)?;
    write_sobol_csv(create(&a.out.join("sobol.csv"))?, &report)?;
    if report.dropped_rows > 0 {
        eprintln!("warning: {} base rows dropped after solver failures", report.dropped_rows);
    }
    eprintln!("{} index summaries -> {}", report.rows.len(), a.out.display());
    Ok(())
}

fn gen_weather(a: &GenWeatherArgs) -> Result<()> {
    let seed = require_seed(a.seed)?;
    if !(a.days > 0.0) {
        return Err(ventsim_core::Error::invalid("--days", "must be > 0").into());
    }
    let series = SyntheticWeather {
        seed,
        duration: a.days * ventsim_core::clock::SECONDS_PER_DAY,
        ..SyntheticWeather::default()
    }
    .generate()?;
    write_weather_csv(create(&a.out.join("weather.csv"))?, &series)?;
    Ok(())
}
