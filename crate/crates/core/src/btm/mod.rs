//! Lumped-capacitance building thermal model.
//!
//! One air node plus one core node per heat-exchanging thermal mass. Each
//! mass has an indoor and an outdoor surface whose temperatures follow from
//! algebraic flux balances at every stage evaluation. The floor is a
//! fixed-temperature boundary.

mod result;

pub use result::{write_result_csv, EnergyAccount, MassTrace, SimulationResult, ThermalState};

use crate::domain::{MassName, ScenarioConfig, ThermalMassSpec, STEFAN_BOLTZMANN, is_plausible_temperature};
use crate::error::{Error, Result};
use crate::params::ParameterSample;
use crate::vent::{DrivingState, VentModel};
use crate::weather::{correct_wind_height, WeatherInputTrace, WeatherPoint};

pub const DEFAULT_DT: f64 = 10.0;
pub const DEFAULT_OUTPUT_INTERVAL: f64 = 60.0;
pub const DEFAULT_SPIN_UP: f64 = 6.0 * 3600.0;

/// Residual tolerance of the surface flux balances, W/m².
pub const SURFACE_TOLERANCE: f64 = 1e-6;
pub const SURFACE_MAX_ITERATIONS: usize = 50;

/// Largest number of heat-exchanging masses (roof and four walls).
pub const MAX_MASSES: usize = 5;

// Largest |λ|·dt accepted by a single RK4 step before it is subdivided.
const MAX_STEP_STIFFNESS: f64 = 0.5;

/// Swinbank clear-sky temperature, K.
pub fn sky_temperature(t_out: f64) -> Result<f64> {
    if !(t_out >= 0.0) {
        return Err(Error::invalid("t_out", format!("must be >= 0 K, got {t_out}")));
    }
    Ok(0.0553 * t_out.powf(1.5))
}

/// Absorbed solar power on the roof, W.
pub fn q_solar(reflectance: f64, roof_area: f64, intensity: f64) -> f64 {
    (1.0 - reflectance) * roof_area * intensity
}

/// Net long-wave exchange from the hot to the cold surface, W.
pub fn q_rad_pair(eps: f64, area: f64, t_hot: f64, t_cold: f64) -> f64 {
    STEFAN_BOLTZMANN * eps * area * (t_hot.powi(4) - t_cold.powi(4))
}

/// One side of a surface balance per unit area:
/// `K (T − T_core) = h (T_fluid − T) + source − σ ε (T⁴ − T_rad⁴)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSide {
    /// W/(m²·K)
    pub h: f64,
    /// K
    pub t_fluid: f64,
    /// Absorbed short-wave flux, W/m².
    pub source: f64,
    pub eps: f64,
    /// Radiating partner temperature, K.
    pub t_rad: f64,
}

impl SurfaceSide {
    pub fn convective(h: f64, t_fluid: f64) -> Self {
        SurfaceSide { h, t_fluid, source: 0.0, eps: 0.0, t_rad: 0.0 }
    }
}

/// Surface temperature on one side of a mass with half-layer conductance
/// `k_half` (W/(m²·K)). Returns the temperature and the Newton iterations used.
pub fn solve_surface(k_half: f64, t_core: f64, side: &SurfaceSide) -> std::result::Result<f64, Error> {
    let a = k_half + side.h;
    let b = STEFAN_BOLTZMANN * side.eps;
    let c = k_half * t_core + side.h * side.t_fluid + side.source + b * side.t_rad.powi(4);
    if b == 0.0 {
        return Ok(c / a);
    }
    // f(T) = aT + bT⁴ − c is increasing and convex for T > 0, and c/a lies
    // right of the root, so Newton decreases monotonically onto it.
    let mut t = c / a;
    let mut residual = f64::INFINITY;
    for _ in 0..SURFACE_MAX_ITERATIONS {
        let t3 = t * t * t;
        residual = a * t + b * t3 * t - c;
        if residual.abs() < SURFACE_TOLERANCE {
            return Ok(t);
        }
        t -= residual / (a + 4.0 * b * t3);
    }
    Err(Error::NoConvergence {
        what: "surface balance",
        iterations: SURFACE_MAX_ITERATIONS,
        residual,
    })
}

/// Everything a surface balance needs besides the mass itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceContext {
    pub t_air: f64,
    pub t_out: f64,
    pub t_floor: f64,
    pub t_sky: f64,
    pub solar: f64,
    pub h_in: f64,
    pub h_out: f64,
    pub reflectance: f64,
    /// Roof emissivity towards the sky.
    pub eps_sky: f64,
    /// Roof emissivity towards the floor.
    pub eps_floor: f64,
}

/// `(T_surface_in, T_surface_out)` of a non-floor mass.
pub fn solve_surface_temperatures(
    mass: &ThermalMassSpec,
    t_core: f64,
    ctx: &SurfaceContext,
) -> Result<(f64, f64)> {
    if mass.name == MassName::Floor {
        return Err(Error::invalid("mass", "the floor has a fixed surface temperature"));
    }
    let k = mass.half_layer_conductance();
    let (inside, outside) = sides(mass.name, mass.adiabatic, ctx);
    Ok((solve_surface(k, t_core, &inside)?, solve_surface(k, t_core, &outside)?))
}

fn sides(name: MassName, adiabatic: bool, ctx: &SurfaceContext) -> (SurfaceSide, SurfaceSide) {
    if adiabatic {
        return (SurfaceSide::convective(0.0, ctx.t_air), SurfaceSide::convective(0.0, ctx.t_out));
    }
    if name == MassName::Roof {
        (
            SurfaceSide { h: ctx.h_in, t_fluid: ctx.t_air, source: 0.0, eps: ctx.eps_floor, t_rad: ctx.t_floor },
            SurfaceSide {
                h: ctx.h_out,
                t_fluid: ctx.t_out,
                source: (1.0 - ctx.reflectance) * ctx.solar,
                eps: ctx.eps_sky,
                t_rad: ctx.t_sky,
            },
        )
    } else {
        (SurfaceSide::convective(ctx.h_in, ctx.t_air), SurfaceSide::convective(ctx.h_out, ctx.t_out))
    }
}

/// Rate of change of the air temperature, K/s.
///
/// `surfaces` lists `(area, T_surface_in)` of every surface exchanging heat
/// with the air, the floor included.
pub fn air_tendency(
    scenario: &ScenarioConfig,
    h_in: f64,
    t_air: f64,
    t_out: f64,
    surfaces: &[(f64, f64)],
    vent_rate: f64,
) -> f64 {
    let rc = scenario.air.density * scenario.air.specific_heat;
    let conv: f64 = surfaces.iter().map(|&(a, ts)| h_in * a * (ts - t_air)).sum();
    (conv + rc * vent_rate * (t_out - t_air)) / (rc * scenario.geometry.air_volume)
}

/// Rate of change of a mass core temperature, K/s.
pub fn mass_tendency(mass: &ThermalMassSpec, t_core: f64, t_in: f64, t_out: f64) -> f64 {
    let k = mass.half_layer_conductance();
    k * ((t_in - t_core) + (t_out - t_core)) / (mass.density * mass.thickness * mass.specific_heat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOptions {
    pub dt: f64,
    pub output_interval: f64,
    pub spin_up: f64,
    /// Reported period; defaults to the trace horizon.
    pub horizon: Option<f64>,
    /// Outdoor mean used for an `outdoor_mean` floor; defaults to the
    /// trace mean.
    pub floor_reference: Option<f64>,
    pub sample_id: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            dt: DEFAULT_DT,
            output_interval: DEFAULT_OUTPUT_INTERVAL,
            spin_up: DEFAULT_SPIN_UP,
            horizon: None,
            floor_reference: None,
            sample_id: 0,
        }
    }
}

fn steps(what: &str, span: f64, dt: f64) -> Result<usize> {
    let n = (span / dt).round();
    if !(span >= 0.0) || ((n * dt) - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::invalid(what, format!("{span} s is not a multiple of dt = {dt} s")));
    }
    Ok(n as usize)
}

// State layout: air, up to MAX_MASSES cores, then three energy accumulators.
const N_STATE: usize = 1 + MAX_MASSES + 3;
const ACC_FLOOR: usize = MAX_MASSES + 1;
const ACC_OUT: usize = MAX_MASSES + 2;
const ACC_VENT: usize = MAX_MASSES + 3;
type State = [f64; N_STATE];

#[derive(Debug, Clone, Copy)]
struct Node {
    k_half: f64,
    cap_per_area: f64,
    area: f64,
    is_roof: bool,
}

#[derive(Debug, Clone, Copy)]
struct Inputs {
    t_out: f64,
    t_sky: f64,
    solar: f64,
    u_ref: f64,
}

struct Network<'a> {
    scenario: &'a ScenarioConfig,
    nodes: Vec<Node>,
    h_in: f64,
    h_out: f64,
    reflectance: f64,
    eps_sky: f64,
    eps_floor: f64,
    t_floor: f64,
    floor_area: f64,
    roof_area: f64,
    c_air: f64,
    rho_cp: f64,
    vent: VentModel,
    house_height: f64,
    wind_factor: f64,
    mass_stiffness: f64,
}

struct Eval {
    dy: State,
    vent: f64,
    surf: [(f64, f64); MAX_MASSES],
}

impl Network<'_> {
    fn inputs(&self, w: WeatherPoint) -> Inputs {
        Inputs {
            t_out: w.outdoor_temp,
            t_sky: 0.0553 * w.outdoor_temp.powf(1.5),
            solar: w.solar,
            u_ref: w.wind_speed * self.wind_factor,
        }
    }

    fn context(&self, t_air: f64, w: &Inputs) -> SurfaceContext {
        SurfaceContext {
            t_air,
            t_out: w.t_out,
            t_floor: self.t_floor,
            t_sky: w.t_sky,
            solar: w.solar,
            h_in: self.h_in,
            h_out: self.h_out,
            reflectance: self.reflectance,
            eps_sky: self.eps_sky,
            eps_floor: self.eps_floor,
        }
    }

    fn eval(&self, y: &State, w: &Inputs) -> Result<Eval> {
        let t_air = y[0];
        let ctx = self.context(t_air, w);
        let mut dy = [0.0; N_STATE];
        let mut surf = [(0.0, 0.0); MAX_MASSES];
        let mut conv = self.h_in * self.floor_area * (self.t_floor - t_air);
        let mut floor_gain = conv;
        let mut outdoor_gain = 0.0;
        for (i, n) in self.nodes.iter().enumerate() {
            let tc = y[1 + i];
            let name = if n.is_roof { MassName::Roof } else { MassName::WallN };
            let (inside, outside) = sides(name, false, &ctx);
            let ts_in = solve_surface(n.k_half, tc, &inside)?;
            let ts_out = solve_surface(n.k_half, tc, &outside)?;
            surf[i] = (ts_in, ts_out);
            dy[1 + i] = n.k_half * ((ts_in - tc) + (ts_out - tc)) / n.cap_per_area;
            conv += self.h_in * n.area * (ts_in - t_air);
            let mut out = self.h_out * (w.t_out - ts_out);
            if n.is_roof {
                let rad_floor = STEFAN_BOLTZMANN * self.eps_floor * (ts_in.powi(4) - self.t_floor.powi(4));
                floor_gain -= rad_floor * self.roof_area;
                out += outside.source - STEFAN_BOLTZMANN * self.eps_sky * (ts_out.powi(4) - w.t_sky.powi(4));
            }
            outdoor_gain += out * n.area;
        }
        let ds = DrivingState { t_in: t_air, t_out: w.t_out, u_wind: w.u_ref };
        let vent = self.vent.rate(&self.scenario.ventilation, &ds, self.house_height);
        let q_vent = self.rho_cp * vent * (w.t_out - t_air);
        dy[0] = (conv + q_vent) / self.c_air;
        dy[ACC_FLOOR] = floor_gain;
        dy[ACC_OUT] = outdoor_gain;
        dy[ACC_VENT] = q_vent;
        Ok(Eval { dy, vent, surf })
    }

    fn air_stiffness(&self, vent: f64) -> f64 {
        let area: f64 = self.floor_area + self.nodes.iter().map(|n| n.area).sum::<f64>();
        (self.h_in * area + self.rho_cp * vent.abs()) / self.c_air
    }
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    let mut out = *y;
    for i in 0..N_STATE {
        out[i] += h * k[i];
    }
    out
}

/// Integrate the coupled air and mass equations with classical RK4.
///
/// All temperatures start at the first-window outdoor temperature; the
/// spin-up period is simulated (with the trace wrapping periodically) and
/// discarded. Weather inputs are held at their value at the step midpoint.
pub fn integrate(
    scenario: &ScenarioConfig,
    trace: &WeatherInputTrace,
    sample: &ParameterSample,
    model: VentModel,
    opts: &IntegrationOptions,
) -> Result<SimulationResult> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    if trace.n_windows() == 0 {
        return Err(Error::invalid("trace", "no weather windows"));
    }
    for (name, v) in [("h_in", sample.h_in), ("h_out", sample.h_out)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(name, "must be >= 0"));
        }
    }
    for (name, v) in [("rho_roof", sample.roof_reflectance), ("eps_roof", sample.roof_emissivity)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(name, "must lie in [0, 1]"));
        }
    }
    let horizon = opts.horizon.unwrap_or_else(|| trace.horizon());
    let n_out_every = steps("output_interval", opts.output_interval, opts.dt)?.max(1);
    let n_spin = steps("spin_up", opts.spin_up, opts.dt)?;
    let n_main = steps("horizon", horizon, opts.dt)?;
    if n_main % n_out_every != 0 {
        return Err(Error::invalid("horizon", "must be a multiple of the output interval"));
    }

    let active: Vec<&ThermalMassSpec> = scenario.masses.iter().filter(|m| !m.adiabatic).collect();
    if active.len() > MAX_MASSES {
        return Err(Error::invalid("masses", format!("at most {MAX_MASSES} heat-exchanging masses")));
    }
    let roof = scenario.masses.iter().find(|m| m.name == MassName::Roof);
    let eps_floor = roof.and_then(|r| r.emissivity_indoor).unwrap_or(sample.roof_emissivity);
    let t_floor = scenario.floor_temperature_k(opts.floor_reference.unwrap_or_else(|| trace.mean_outdoor_temp()));
    let rho_cp = scenario.air.density * scenario.air.specific_heat;
    let nodes: Vec<Node> = active
        .iter()
        .map(|m| Node {
            k_half: m.half_layer_conductance(),
            cap_per_area: m.density * m.thickness * m.specific_heat,
            area: m.area,
            is_roof: m.name == MassName::Roof,
        })
        .collect();
    // Linearised radiation at the top of the plausible band bounds the
    // effective surface coefficients.
    let hr_max = 4.0 * STEFAN_BOLTZMANN * 400f64.powi(3);
    let mass_stiffness = nodes
        .iter()
        .map(|n| {
            let side = |h: f64| n.k_half * h / (n.k_half + h);
            let (hi, ho) = if n.is_roof {
                (sample.h_in + hr_max * eps_floor, sample.h_out + hr_max * sample.roof_emissivity)
            } else {
                (sample.h_in, sample.h_out)
            };
            (side(hi) + side(ho)) / n.cap_per_area
        })
        .fold(0.0, f64::max);
    let net = Network {
        scenario,
        nodes,
        h_in: sample.h_in,
        h_out: sample.h_out,
        reflectance: sample.roof_reflectance,
        eps_sky: sample.roof_emissivity,
        eps_floor,
        t_floor,
        floor_area: scenario.floor.area,
        roof_area: roof.filter(|r| !r.adiabatic).map_or(0.0, |r| r.area),
        c_air: rho_cp * scenario.geometry.air_volume,
        rho_cp,
        vent: model,
        house_height: scenario.geometry.mean_height(),
        wind_factor: correct_wind_height(
            1.0,
            scenario.wind.anemometer_height,
            scenario.geometry.reference_height,
            scenario.wind.exponent,
        )?,
        mass_stiffness,
    };

    let n_nodes = net.nodes.len();
    let mut y: State = [0.0; N_STATE];
    let t0 = trace.window(0).outdoor_temp;
    for v in y.iter_mut().take(1 + n_nodes) {
        *v = t0;
    }
    let n_rec = n_main / n_out_every + 1;
    let mut result = SimulationResult::with_capacity(
        opts.sample_id,
        model.kind(),
        scenario.content_hash(),
        trace.start,
        opts.output_interval,
        active.iter().map(|m| m.name).collect(),
        n_rec,
    );
    let dt = opts.dt;
    let solver_err = |t: f64, e: Error| Error::Solver { time_s: trace.start + t, msg: e.to_string() };
    for i in 0..(n_spin + n_main) {
        let t = (i as f64 - n_spin as f64) * dt;
        if i >= n_spin && (i - n_spin) % n_out_every == 0 {
            record(&net, &mut result, &y, t, trace).map_err(|e| solver_err(t, e))?;
        }
        let w = net.inputs(trace.at(t + 0.5 * dt));
        let k1 = net.eval(&y, &w).map_err(|e| solver_err(t, e))?;
        let lam = net.air_stiffness(k1.vent).max(net.mass_stiffness);
        let n_sub = ((lam * dt / MAX_STEP_STIFFNESS).ceil() as usize).max(1);
        let h = dt / n_sub as f64;
        let mut k1 = k1.dy;
        for s in 0..n_sub {
            if s > 0 {
                k1 = net.eval(&y, &w).map_err(|e| solver_err(t, e))?.dy;
            }
            let k2 = net.eval(&axpy(&y, 0.5 * h, &k1), &w).map_err(|e| solver_err(t, e))?.dy;
            let k3 = net.eval(&axpy(&y, 0.5 * h, &k2), &w).map_err(|e| solver_err(t, e))?.dy;
            let k4 = net.eval(&axpy(&y, h, &k3), &w).map_err(|e| solver_err(t, e))?.dy;
            for j in 0..N_STATE {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        if let Some(bad) = y[..1 + n_nodes].iter().find(|v| !is_plausible_temperature(**v)) {
            return Err(Error::Solver {
                time_s: trace.start + t + dt,
                msg: format!("temperature {bad} K left the plausible band (diverging solution)"),
            });
        }
    }
    let t_end = n_main as f64 * dt;
    record(&net, &mut result, &y, t_end, trace).map_err(|e| solver_err(t_end, e))?;
    Ok(result)
}

fn record(net: &Network, out: &mut SimulationResult, y: &State, t: f64, trace: &WeatherInputTrace) -> Result<()> {
    let w = net.inputs(trace.at(t));
    let e = net.eval(y, &w)?;
    let n = net.nodes.len();
    let mut cores = [(0.0, 0.0, 0.0); MAX_MASSES];
    for i in 0..n {
        cores[i] = (y[1 + i], e.surf[i].0, e.surf[i].1);
    }
    out.push(
        t,
        y[0],
        &cores[..n],
        e.vent,
        EnergyAccount { floor: y[ACC_FLOOR], outdoor: y[ACC_OUT], ventilation: y[ACC_VENT] },
        net.scenario.geometry.air_volume,
    );
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests;
