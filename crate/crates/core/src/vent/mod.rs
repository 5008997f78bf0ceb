//! Envelope-flow ventilation models.
//!
//! Every function here is a pure function of the instantaneous driving
//! state. The temperature difference is always `ΔT = T_out − T_in`, and the
//! reference temperature is the indoor/outdoor mean in kelvin.

mod fit;

pub use fit::{fit_richardson_coeffs, FitPoint, RichardsonFit, FIT_STARTS};

use serde::{Deserialize, Serialize};

use crate::domain::{check_temperature, OpeningSpec, VentilationConfig, GRAVITY};
use crate::error::{Error, Result};

/// Wind speed floor applied before dividing by U in the Richardson number.
pub const WIND_FLOOR: f64 = 0.05;

/// Pressure-coefficient difference of the cross-ventilation ensemble members.
pub const DCP_ENSEMBLE: f64 = 0.5;

/// Phaff–De Gids coefficients: wind [-], buoyancy [m/(s²·K)], turbulence [m²/s²].
pub const PHAFF_C1: f64 = 0.001;
pub const PHAFF_C2: f64 = 0.035;
pub const PHAFF_C3: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VentModelKind {
    CrossAssisting,
    CrossOpposing,
    SingleSided,
    RichardsonFit,
    /// Prescribed constant flow; used for verification runs.
    FixedRate,
}

impl VentModelKind {
    /// The three models run for every parameter sample in ensemble mode.
    pub const ENSEMBLE: [VentModelKind; 3] = [
        VentModelKind::CrossAssisting,
        VentModelKind::CrossOpposing,
        VentModelKind::SingleSided,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VentModelKind::CrossAssisting => "cross+",
            VentModelKind::CrossOpposing => "cross-",
            VentModelKind::SingleSided => "single",
            VentModelKind::RichardsonFit => "richardson",
            VentModelKind::FixedRate => "fixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cross+" => Some(VentModelKind::CrossAssisting),
            "cross-" => Some(VentModelKind::CrossOpposing),
            "single" => Some(VentModelKind::SingleSided),
            "richardson" => Some(VentModelKind::RichardsonFit),
            "fixed" => Some(VentModelKind::FixedRate),
            _ => None,
        }
    }
}

impl std::fmt::Display for VentModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Non-dimensional coefficients of the Richardson-fit model
/// `V̇ / (A_total U) = sqrt(|c1 Ri_v + c2|) + c3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RichardsonCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl RichardsonCoefficients {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if !(c1.is_finite() && c2.is_finite() && c3.is_finite()) {
            return Err(Error::invalid("coefficients", "must be finite"));
        }
        if c3 < 0.0 {
            return Err(Error::invalid("coefficients.c3", "must be >= 0"));
        }
        Ok(RichardsonCoefficients { c1, c2, c3 })
    }

    /// Non-dimensional rate at a given Richardson number.
    pub fn nondim_rate(&self, ri_v: f64) -> f64 {
        (self.c1 * ri_v + self.c2).abs().sqrt() + self.c3
    }
}

/// A ventilation model together with whatever data it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VentModel {
    CrossAssisting,
    CrossOpposing,
    SingleSided,
    RichardsonFit(RichardsonCoefficients),
    /// m³/s
    FixedRate(f64),
}

impl VentModel {
    pub fn kind(&self) -> VentModelKind {
        match self {
            VentModel::CrossAssisting => VentModelKind::CrossAssisting,
            VentModel::CrossOpposing => VentModelKind::CrossOpposing,
            VentModel::SingleSided => VentModelKind::SingleSided,
            VentModel::RichardsonFit(_) => VentModelKind::RichardsonFit,
            VentModel::FixedRate(_) => VentModelKind::FixedRate,
        }
    }

    /// Volume flow rate, m³/s. `house_height` enters the Richardson number.
    pub fn rate(&self, cfg: &VentilationConfig, state: &DrivingState, house_height: f64) -> f64 {
        match *self {
            VentModel::CrossAssisting => cross_ventilation_rate(state, cfg, DCP_ENSEMBLE),
            VentModel::CrossOpposing => cross_ventilation_rate(state, cfg, -DCP_ENSEMBLE),
            VentModel::SingleSided => combined_single_sided(cfg, state),
            VentModel::RichardsonFit(c) => richardson_fit_rate(&c, cfg, state, house_height),
            VentModel::FixedRate(q) => q,
        }
    }
}

/// Instantaneous inputs to the ventilation models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivingState {
    /// K
    pub t_in: f64,
    /// K
    pub t_out: f64,
    /// m/s at the reference height
    pub u_wind: f64,
}

impl DrivingState {
    pub fn new(t_in: f64, t_out: f64, u_wind: f64) -> Result<Self> {
        check_temperature("t_in", t_in)?;
        check_temperature("t_out", t_out)?;
        if !(u_wind.is_finite() && u_wind >= 0.0) {
            return Err(Error::invalid("u_wind", "must be >= 0"));
        }
        Ok(DrivingState { t_in, t_out, u_wind })
    }

    /// `T_out − T_in`
    pub fn delta_t(&self) -> f64 {
        self.t_out - self.t_in
    }

    pub fn mean_t(&self) -> f64 {
        0.5 * (self.t_in + self.t_out)
    }
}

/// Effective area of two openings in series.
pub fn effective_area(a1: f64, a2: f64, cd1: f64, cd2: f64) -> Result<f64> {
    if !(cd1 > 0.0 && cd1 <= 1.0 && cd2 > 0.0 && cd2 <= 1.0) {
        return Err(Error::invalid("discharge_coefficient", "must lie in (0, 1]"));
    }
    if !(a1 >= 0.0 && a2 >= 0.0) {
        return Err(Error::invalid("area", "must be >= 0"));
    }
    Ok(effective_area_unchecked(a1, a2, cd1, cd2))
}

fn effective_area_unchecked(a1: f64, a2: f64, cd1: f64, cd2: f64) -> f64 {
    if a1 == 0.0 || a2 == 0.0 {
        return 0.0;
    }
    let (c1, c2) = (cd1 * cd1, cd2 * cd2);
    a1 * a2 / ((c1 * a1 * a1 + c2 * a2 * a2) / (2.0 * c1 * c2)).sqrt()
}

/// Pressure-driving term `g·ΔH·ΔT/T̄ + U²·ΔCp/2` of the cross-flow model.
pub fn cross_driving_term(state: &DrivingState, delta_h: f64, dcp: f64) -> f64 {
    GRAVITY * delta_h * state.delta_t() / state.mean_t() + state.u_wind * state.u_wind * dcp / 2.0
}

/// Steady envelope-flow solution for two openings, m³/s.
pub fn cross_ventilation_rate(state: &DrivingState, cfg: &VentilationConfig, dcp: f64) -> f64 {
    let (a, b) = (&cfg.opening_a, &cfg.opening_b);
    let a_eff = effective_area_unchecked(a.area, b.area, a.discharge_coefficient, b.discharge_coefficient);
    a_eff * cross_driving_term(state, cfg.delta_h, dcp).abs().sqrt()
}

/// Phaff–De Gids single-sided flow through one opening, m³/s.
pub fn single_sided_rate(opening: &OpeningSpec, state: &DrivingState) -> f64 {
    let u = state.u_wind;
    0.5 * opening.area
        * (PHAFF_C1 * u * u + PHAFF_C2 * opening.height * state.delta_t().abs() + PHAFF_C3).sqrt()
}

/// Sum of the single-sided flows of both openings, m³/s.
pub fn combined_single_sided(cfg: &VentilationConfig, state: &DrivingState) -> f64 {
    single_sided_rate(&cfg.opening_a, state) + single_sided_rate(&cfg.opening_b, state)
}

/// Ventilation Richardson number; `clamped` reports that the wind speed was
/// raised to [`WIND_FLOOR`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Richardson {
    pub value: f64,
    pub clamped: bool,
    /// Wind speed actually used, m/s.
    pub u_used: f64,
}

pub fn richardson_number(state: &DrivingState, height: f64) -> Richardson {
    let clamped = state.u_wind < WIND_FLOOR;
    let u = state.u_wind.max(WIND_FLOOR);
    Richardson {
        value: GRAVITY * (state.delta_t() / state.mean_t()) * height / (u * u),
        clamped,
        u_used: u,
    }
}

/// Site-specific Richardson-fit model, m³/s. Uses the floored wind speed
/// both in the Richardson number and in the dimensional scaling.
pub fn richardson_fit_rate(
    coeffs: &RichardsonCoefficients,
    cfg: &VentilationConfig,
    state: &DrivingState,
    height: f64,
) -> f64 {
    let ri = richardson_number(state, height);
    cfg.total_area * ri.u_used * coeffs.nondim_rate(ri.value)
}
