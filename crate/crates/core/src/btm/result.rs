use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::MassName;
use crate::error::{Error, Result};
use crate::vent::VentModelKind;

/// Temperature history of one thermal mass, K.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MassTrace {
    pub core: Vec<f64>,
    pub surface_in: Vec<f64>,
    pub surface_out: Vec<f64>,
}

/// Heat gained by the air and masses since the start of the spin-up, J.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyAccount {
    /// Floor convection minus roof-to-floor radiation.
    pub floor: f64,
    /// Outdoor convection, absorbed solar and sky radiation.
    pub outdoor: f64,
    pub ventilation: f64,
}

impl EnergyAccount {
    pub fn total(&self) -> f64 {
        self.floor + self.outdoor + self.ventilation
    }
}

/// Snapshot of the model state at one output step.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    /// Seconds since the start of the reported period.
    pub time: f64,
    pub t_air: f64,
    /// `(name, core, surface_in, surface_out)`
    pub masses: Vec<(MassName, f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub sample_id: usize,
    pub model: VentModelKind,
    pub scenario_hash: String,
    /// Epoch seconds of `time = 0`.
    pub start: f64,
    pub output_interval: f64,
    pub mass_names: Vec<MassName>,
    /// Seconds since `start`.
    pub time: Vec<f64>,
    pub t_air: Vec<f64>,
    pub masses: Vec<MassTrace>,
    /// m³/s
    pub vent_rate: Vec<f64>,
    /// 1/h
    pub ach: Vec<f64>,
    pub energy: Vec<EnergyAccount>,
}

impl SimulationResult {
    pub(crate) fn with_capacity(
        sample_id: usize,
        model: VentModelKind,
        scenario_hash: String,
        start: f64,
        output_interval: f64,
        mass_names: Vec<MassName>,
        n: usize,
    ) -> Self {
        let v = || Vec::<f64>::with_capacity(n);
        SimulationResult {
            sample_id,
            model,
            scenario_hash,
            start,
            output_interval,
            masses: mass_names
                .iter()
                .map(|_| MassTrace { core: v(), surface_in: v(), surface_out: v() })
                .collect(),
            mass_names,
            time: v(),
            t_air: v(),
            vent_rate: v(),
            ach: v(),
            energy: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(
        &mut self,
        time: f64,
        t_air: f64,
        cores: &[(f64, f64, f64)],
        vent_rate: f64,
        energy: EnergyAccount,
        air_volume: f64,
    ) {
        self.time.push(time);
        self.t_air.push(t_air);
        for (m, &(c, i, o)) in self.masses.iter_mut().zip(cores) {
            m.core.push(c);
            m.surface_in.push(i);
            m.surface_out.push(o);
        }
        self.vent_rate.push(vent_rate);
        self.ach.push(vent_rate * 3600.0 / air_volume);
        self.energy.push(energy);
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn mass(&self, name: MassName) -> Option<&MassTrace> {
        self.mass_names.iter().position(|&n| n == name).map(|i| &self.masses[i])
    }

    pub fn state(&self, k: usize) -> ThermalState {
        ThermalState {
            time: self.time[k],
            t_air: self.t_air[k],
            masses: self
                .mass_names
                .iter()
                .zip(&self.masses)
                .map(|(&n, m)| (n, m.core[k], m.surface_in[k], m.surface_out[k]))
                .collect(),
        }
    }

    /// Every recorded temperature at step `k`.
    pub fn temperatures(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.t_air[k]).chain(
            self.masses
                .iter()
                .flat_map(move |m| [m.core[k], m.surface_in[k], m.surface_out[k]]),
        )
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["time_s".to_string(), "t_air_k".to_string()];
        for n in &self.mass_names {
            for side in ["core", "in", "out"] {
                h.push(format!("t_{}_{side}_k", n.as_str()));
            }
        }
        h.push("vent_rate_m3s".into());
        h.push("ach".into());
        h
    }
}

/// Columns `time_s` (epoch seconds), `t_air_k`, three columns per mass,
/// `vent_rate_m3s`, `ach`. Numbers use the shortest round-trip form.
pub fn write_result_csv<W: Write>(writer: W, r: &SimulationResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(r.csv_header())?;
    let mut row: Vec<String> = Vec::new();
    for k in 0..r.len() {
        row.clear();
        row.push((r.start + r.time[k]).to_string());
        row.push(r.t_air[k].to_string());
        for m in &r.masses {
            row.push(m.core[k].to_string());
            row.push(m.surface_in[k].to_string());
            row.push(m.surface_out[k].to_string());
        }
        row.push(r.vent_rate[k].to_string());
        row.push(r.ach[k].to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("result csv", e))?;
    Ok(())
}
