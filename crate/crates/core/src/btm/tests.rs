use super::*;
use crate::domain::tests::example_scenario;
use crate::domain::ThermalMassSpec;
use approx::assert_relative_eq;
use proptest::prelude::*;

pub(crate) fn constant_trace(t_out: f64, solar: f64, wind: f64, n_windows: usize) -> WeatherInputTrace {
    WeatherInputTrace::constant(
        1_549_756_800.0,
        1800.0,
        n_windows,
        WeatherPoint { outdoor_temp: t_out, solar, wind_speed: wind },
    )
}

pub(crate) fn sample(h_in: f64, h_out: f64, rho: f64, eps: f64) -> ParameterSample {
    ParameterSample {
        h_in,
        h_out,
        roof_reflectance: rho,
        roof_emissivity: eps,
        p_temp: 0.5,
        p_rad: 0.5,
        p_wind: 0.5,
    }
}

fn wall(k_half: f64) -> ThermalMassSpec {
    ThermalMassSpec {
        name: MassName::WallN,
        area: 5.0,
        thickness: 0.1,
        density: 1800.0,
        specific_heat: 840.0,
        conductivity: k_half * 0.05,
        emissivity_indoor: None,
        adiabatic: false,
    }
}

fn ctx(t_air: f64, t_out: f64, h_in: f64, h_out: f64) -> SurfaceContext {
    SurfaceContext {
        t_air,
        t_out,
        t_floor: 300.0,
        t_sky: 280.0,
        solar: 0.0,
        h_in,
        h_out,
        reflectance: 0.7,
        eps_sky: 0.0,
        eps_floor: 0.0,
    }
}

#[test]
fn sky_temperature_values() {
    assert_eq!(sky_temperature(0.0).unwrap(), 0.0);
    assert_relative_eq!(sky_temperature(300.0).unwrap(), 287.35, epsilon = 5e-3);
    assert!(sky_temperature(-1.0).is_err());
    // crossover 0.0553 T^1.5 = T at T = 0.0553^-2
    let cross = 0.0553f64.powi(-2);
    assert_relative_eq!(sky_temperature(cross).unwrap(), cross, max_relative = 1e-12);
    assert!((cross - 327.0).abs() < 0.1);
}

#[test]
fn solar_and_radiation_values() {
    assert_eq!(q_solar(1.0, 7.3476, 1000.0), 0.0);
    assert_eq!(q_solar(0.6, 7.3476, 0.0), 0.0);
    assert_relative_eq!(q_solar(0.6, 7.3476, 1000.0), 2939.04, max_relative = 1e-12);
    assert_eq!(q_rad_pair(0.85, 7.3476, 310.0, 310.0), 0.0);
    let q = q_rad_pair(0.85, 7.3476, 320.0, 300.0);
    assert!((q - 845.0).abs() < 0.5, "{q}");
    assert!(q_rad_pair(0.85, 7.3476, 300.0, 320.0) < 0.0);
    assert_relative_eq!(q_rad_pair(0.85, 2.0 * 7.3476, 320.0, 300.0), 2.0 * q, max_relative = 1e-14);
}

#[test]
fn wall_surface_limits() {
    let w = wall(10.0);
    let (ti, to) = solve_surface_temperatures(&w, 300.0, &ctx(310.0, 290.0, 0.0, 10.0)).unwrap();
    assert_eq!(ti, 300.0);
    assert_relative_eq!(to, 295.0, max_relative = 1e-14);
    let mut f = w.clone();
    f.name = MassName::Floor;
    assert!(solve_surface_temperatures(&f, 300.0, &ctx(310.0, 290.0, 3.0, 10.0)).is_err());
}

#[test]
fn roof_without_radiation_matches_wall() {
    let mut roof = wall(40.0);
    roof.name = MassName::Roof;
    let c = ctx(305.0, 295.0, 3.0, 8.0);
    assert_eq!(
        solve_surface_temperatures(&roof, 300.0, &c).unwrap(),
        solve_surface_temperatures(&wall(40.0), 300.0, &c).unwrap()
    );
}

#[test]
fn roof_balance_residual() {
    let mut roof = wall(125_000.0 * 0.0008 / 0.05 / 2.0);
    roof.name = MassName::Roof;
    let c = SurfaceContext { solar: 900.0, eps_sky: 0.85, eps_floor: 0.85, ..ctx(305.0, 300.0, 2.0, 10.0) };
    let tc = 320.0;
    let (ti, to) = solve_surface_temperatures(&roof, tc, &c).unwrap();
    let k = roof.half_layer_conductance();
    let sig = crate::domain::STEFAN_BOLTZMANN;
    let r_in = k * (ti - tc) - (c.h_in * (c.t_air - ti) - sig * 0.85 * (ti.powi(4) - c.t_floor.powi(4)));
    let r_out = k * (to - tc)
        - (c.h_out * (c.t_out - to) + 0.3 * 900.0 - sig * 0.85 * (to.powi(4) - c.t_sky.powi(4)));
    assert!(r_in.abs() < 1e-6 && r_out.abs() < 1e-6, "{r_in} {r_out}");
}

#[test]
fn tendencies_vanish_at_equilibrium() {
    let s = example_scenario();
    assert_eq!(air_tendency(&s, 3.0, 300.0, 300.0, &[(7.0, 300.0), (5.0, 300.0)], 0.1), 0.0);
    assert!(air_tendency(&s, 3.0, 300.0, 300.0, &[(7.0, 301.0)], 0.0) > 0.0);
    assert!(air_tendency(&s, 3.0, 300.0, 300.0, &[(7.0, 299.0)], 0.0) < 0.0);
    let w = &s.masses[1];
    assert_eq!(mass_tendency(w, 300.0, 300.0, 300.0), 0.0);
    assert_eq!(mass_tendency(w, 300.0, 302.5, 297.5), 0.0);
}

#[test]
fn slab_step_response_matches_rc() {
    // isolated slab between two fluids at 310 K, starting at 300 K
    let m = wall(10.0);
    let c = ctx(310.0, 310.0, 4.0, 6.0);
    let k = m.half_layer_conductance();
    let g = k * 4.0 / (k + 4.0) + k * 6.0 / (k + 6.0);
    let tau = m.density * m.thickness * m.specific_heat / g;
    let f = |t: f64| {
        let (ti, to) = solve_surface_temperatures(&m, t, &c).unwrap();
        mass_tendency(&m, t, ti, to)
    };
    let h = tau / 2000.0;
    let mut t = 300.0;
    for i in 1..=10_000 {
        let k1 = f(t);
        let k2 = f(t + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h * k2);
        let k4 = f(t + h * k3);
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let exact = 310.0 - 10.0 * (-(i as f64) * h / tau).exp();
        assert!(((t - 310.0) / (exact - 310.0) - 1.0).abs() < 5e-3);
    }
}

fn quick_opts() -> IntegrationOptions {
    IntegrationOptions { spin_up: 0.0, horizon: Some(6.0 * 3600.0), ..IntegrationOptions::default() }
}

#[test]
fn equilibrium_without_radiation() {
    let s = example_scenario();
    let trace = constant_trace(300.0, 0.0, 2.0, 48);
    for model in [VentModel::CrossAssisting, VentModel::SingleSided, VentModel::FixedRate(0.0)] {
        let r = integrate(&s, &trace, &sample(2.5, 8.0, 0.7, 0.0), model, &IntegrationOptions::default()).unwrap();
        assert_eq!(r.len(), 1441);
        for k in 0..r.len() {
            assert!(r.temperatures(k).all(|t| (t - 300.0).abs() < 0.01));
        }
    }
}

#[test]
fn ventilation_relaxation_oracle() {
    let s = example_scenario();
    let mut trace = constant_trace(300.0, 0.0, 0.0, 4);
    trace.outdoor_temp[0] = 290.0;
    let q = s.geometry.air_volume / 600.0;
    let opts = IntegrationOptions { spin_up: 0.0, horizon: Some(3600.0), ..IntegrationOptions::default() };
    let r = integrate(&s, &trace, &sample(0.0, 8.0, 0.7, 0.85), VentModel::FixedRate(q), &opts).unwrap();
    for k in 0..r.len() {
        let t = r.time[k];
        let exact = if t <= 1800.0 { 290.0 } else { 300.0 - 10.0 * (-(t - 1800.0) / 600.0).exp() };
        assert!((r.t_air[k] - exact).abs() <= 1e-3 * 10.0 * (-(t - 1800.0).max(0.0) / 600.0).exp(), "t={t}");
    }
}

#[test]
fn ach_is_exact_and_deterministic() {
    let s = example_scenario();
    let mut trace = constant_trace(300.0, 0.0, 2.0, 12);
    for (k, t) in trace.outdoor_temp.iter_mut().enumerate() {
        *t += k as f64;
    }
    trace.solar[5] = 700.0;
    let a = integrate(&s, &trace, &sample(2.0, 5.0, 0.65, 0.85), VentModel::SingleSided, &quick_opts()).unwrap();
    let b = integrate(&s, &trace, &sample(2.0, 5.0, 0.65, 0.85), VentModel::SingleSided, &quick_opts()).unwrap();
    assert_eq!(a, b);
    for k in 0..a.len() {
        assert_eq!(a.ach[k], a.vent_rate[k] * 3600.0 / s.geometry.air_volume);
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    write_result_csv(&mut x, &a).unwrap();
    write_result_csv(&mut y, &b).unwrap();
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("time_s,t_air_k,t_roof_core_k,t_roof_in_k,t_roof_out_k,t_wall_n_core_k"));
    assert!(text.lines().next().unwrap().ends_with("vent_rate_m3s,ach"));
}

fn enthalpy(s: &ScenarioConfig, r: &SimulationResult, k: usize) -> f64 {
    let c_air = s.air.density * s.air.specific_heat * s.geometry.air_volume;
    let masses: f64 = r
        .mass_names
        .iter()
        .zip(&r.masses)
        .map(|(n, m)| s.masses.iter().find(|x| x.name == *n).unwrap().heat_capacity() * m.core[k])
        .sum();
    c_air * r.t_air[k] + masses
}

#[test]
fn energy_conserved_with_closed_boundaries() {
    let s = example_scenario();
    let mut trace = constant_trace(300.0, 0.0, 1.0, 48);
    trace.outdoor_temp[0] = 292.0;
    let opts = IntegrationOptions { spin_up: 0.0, ..IntegrationOptions::default() };
    let r = integrate(&s, &trace, &sample(3.0, 0.0, 0.7, 0.0), VentModel::FixedRate(0.0), &opts).unwrap();
    let h0 = enthalpy(&s, &r, 0) - r.energy[0].total();
    let scale = r.energy.iter().map(|e| e.floor.abs()).fold(0.0, f64::max);
    assert!(scale > 1e5);
    for k in 0..r.len() {
        assert_eq!(r.energy[k].outdoor, 0.0);
        assert_eq!(r.energy[k].ventilation, 0.0);
        let drift = (enthalpy(&s, &r, k) - r.energy[k].floor - h0) / scale;
        assert!(drift.abs() < 1e-6, "{drift}");
    }
}

#[test]
fn energy_balance_with_all_terms() {
    let s = example_scenario();
    let mut trace = constant_trace(300.0, 0.0, 3.0, 12);
    for k in 0..12 {
        trace.outdoor_temp[k] += (k as f64 * 0.7).sin() * 4.0;
        trace.solar[k] = 80.0 * k as f64;
    }
    let r = integrate(&s, &trace, &sample(2.0, 9.0, 0.65, 0.85), VentModel::CrossAssisting, &quick_opts()).unwrap();
    let h0 = enthalpy(&s, &r, 0) - r.energy[0].total();
    let scale = r.energy.iter().map(|e| e.outdoor.abs()).fold(0.0, f64::max);
    for k in 0..r.len() {
        let drift = (enthalpy(&s, &r, k) - r.energy[k].total() - h0) / scale;
        assert!(drift.abs() < 1e-7, "{drift}");
    }
}

#[test]
fn diverging_run_is_a_solver_failure() {
    let s = example_scenario();
    let trace = constant_trace(300.0, 200_000.0, 0.0, 12);
    let err = integrate(&s, &trace, &sample(0.0, 0.0, 0.0, 0.0), VentModel::FixedRate(0.0), &quick_opts())
        .unwrap_err();
    assert!(err.is_solver_failure(), "{err}");
    assert!(matches!(err, Error::Solver { time_s, .. } if time_s > trace.start));
}

#[test]
fn rejects_misaligned_horizon() {
    let s = example_scenario();
    let trace = constant_trace(300.0, 0.0, 0.0, 12);
    let opts = IntegrationOptions { horizon: Some(1005.0), spin_up: 0.0, ..IntegrationOptions::default() };
    assert!(integrate(&s, &trace, &sample(2.0, 5.0, 0.7, 0.85), VentModel::SingleSided, &opts).is_err());
}

#[test]
fn adiabatic_wall_excluded() {
    let s = example_scenario();
    let trace = constant_trace(300.0, 0.0, 0.0, 2);
    let r = integrate(&s, &trace, &sample(2.0, 5.0, 0.7, 0.85), VentModel::SingleSided, &quick_opts()).unwrap();
    assert!(r.mass(MassName::WallW).is_none());
    assert_eq!(r.mass_names, vec![MassName::Roof, MassName::WallN, MassName::WallS, MassName::WallE]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn comparison_principle(h_in in 0.5..4.0f64, h_out in 1.0..15.0f64, q in 0.0..0.2f64,
                            jump in prop_oneof![Just(-8.0), Just(8.0)]) {
        let s = example_scenario();
        let mut trace = constant_trace(300.0, 0.0, 2.0, 8);
        trace.outdoor_temp[0] = 300.0 - jump;
        let opts = IntegrationOptions { spin_up: 0.0, horizon: Some(4.0 * 3600.0), ..IntegrationOptions::default() };
        let r = integrate(&s, &trace, &sample(h_in, h_out, 0.7, 0.0), VentModel::FixedRate(q), &opts).unwrap();
        let t_floor = trace.mean_outdoor_temp();
        for k in 0..r.len() {
            let t_out = trace.at(r.time[k]).outdoor_temp;
            let bounds = r.masses.iter()
                .flat_map(|m| [m.surface_in[k], m.surface_out[k]])
                .chain([t_out, t_floor]);
            let (lo, hi) = bounds.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            prop_assert!(r.t_air[k] >= lo - 1e-9 && r.t_air[k] <= hi + 1e-9);
        }
    }

    #[test]
    fn sky_below_ambient_under_crossover(t in 150.0..326.9f64) {
        prop_assert!(sky_temperature(t).unwrap() < t);
    }

    #[test]
    fn roof_surface_balance_converges(tc in 280.0..350.0f64, ta in 280.0..330.0f64, to in 280.0..320.0f64,
                                      solar in 0.0..1200.0f64, eps in 0.0..1.0f64, h in 0.0..15.0f64) {
        let c = SurfaceContext { solar, eps_sky: eps, eps_floor: eps, t_sky: 0.0553 * to.powf(1.5),
                                 ..ctx(ta, to, h.min(4.0), h) };
        let mut roof = wall(125_000.0);
        roof.name = MassName::Roof;
        let (ti, tout) = solve_surface_temperatures(&roof, tc, &c).unwrap();
        prop_assert!(ti.is_finite() && tout.is_finite());
        // surfaces stay near the stiff steel core
        prop_assert!((ti - tc).abs() < 1.0 && (tout - tc).abs() < 1.0);
    }
}
