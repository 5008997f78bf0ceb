//! Physical configuration of the dwelling and the scenario document.
//!
//! All validated quantities are strict SI with temperatures in kelvin.
//! Celsius only appears in the raw [`ScenarioDocument`] read from disk.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::params::{Param, ParameterRanges, Range};

/// Gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.81;
/// Stefan–Boltzmann constant, W/(m²·K⁴).
pub const STEFAN_BOLTZMANN: f64 = 5.670374419e-8;

pub const KELVIN_OFFSET: f64 = 273.15;

/// Temperatures outside this band at a module boundary are unit errors.
pub const PLAUSIBLE_TEMPERATURE_K: (f64, f64) = (150.0, 400.0);

pub const DEFAULT_DISCHARGE_COEFFICIENT: f64 = 0.61;
pub const DEFAULT_SHEAR_EXPONENT: f64 = 0.25;

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + KELVIN_OFFSET
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - KELVIN_OFFSET
}

pub fn is_plausible_temperature(t: f64) -> bool {
    t >= PLAUSIBLE_TEMPERATURE_K.0 && t <= PLAUSIBLE_TEMPERATURE_K.1
}

/// Reject a kelvin value outside the plausibility band.
pub fn check_temperature(path: &str, t: f64) -> Result<f64> {
    if is_plausible_temperature(t) {
        Ok(t)
    } else {
        Err(Error::invalid(
            path,
            format!(
                "temperature {t} K outside [{}, {}] K (unit error?)",
                PLAUSIBLE_TEMPERATURE_K.0, PLAUSIBLE_TEMPERATURE_K.1
            ),
        ))
    }
}

fn positive(path: &str, v: Option<f64>) -> Result<f64> {
    match v {
        None => Err(Error::invalid(path, "missing field")),
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(x) => Err(Error::invalid(path, format!("must be > 0, got {x}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseGeometry {
    pub floor_length: f64,
    pub floor_width: f64,
    pub height_north: f64,
    pub height_south: f64,
    /// Height the wind input refers to.
    pub reference_height: f64,
    pub air_volume: f64,
}

impl HouseGeometry {
    pub fn new(
        floor_length: f64,
        floor_width: f64,
        height_north: f64,
        height_south: f64,
        reference_height: f64,
    ) -> Result<Self> {
        let floor_length = positive("geometry.floor_length_m", Some(floor_length))?;
        let floor_width = positive("geometry.floor_width_m", Some(floor_width))?;
        let height_north = positive("geometry.height_north_m", Some(height_north))?;
        let height_south = positive("geometry.height_south_m", Some(height_south))?;
        let reference_height = positive("geometry.reference_height_m", Some(reference_height))?;
        Ok(HouseGeometry {
            floor_length,
            floor_width,
            height_north,
            height_south,
            reference_height,
            air_volume: floor_length * floor_width * 0.5 * (height_north + height_south),
        })
    }

    pub fn floor_area(&self) -> f64 {
        self.floor_length * self.floor_width
    }

    /// House height used in the ventilation Richardson number.
    pub fn mean_height(&self) -> f64 {
        0.5 * (self.height_north + self.height_south)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassName {
    Roof,
    WallN,
    WallS,
    WallE,
    WallW,
    Floor,
}

impl MassName {
    pub const ALL: [MassName; 6] = [
        MassName::Roof,
        MassName::WallN,
        MassName::WallS,
        MassName::WallE,
        MassName::WallW,
        MassName::Floor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MassName::Roof => "roof",
            MassName::WallN => "wall_n",
            MassName::WallS => "wall_s",
            MassName::WallE => "wall_e",
            MassName::WallW => "wall_w",
            MassName::Floor => "floor",
        }
    }

    pub fn is_wall(self) -> bool {
        matches!(
            self,
            MassName::WallN | MassName::WallS | MassName::WallE | MassName::WallW
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalMassSpec {
    pub name: MassName,
    pub area: f64,
    pub thickness: f64,
    pub density: f64,
    pub specific_heat: f64,
    pub conductivity: f64,
    /// Fixed indoor emissivity. Only the roof uses it (roof-to-floor
    /// radiation); when absent the sampled roof emissivity applies.
    pub emissivity_indoor: Option<f64>,
    pub adiabatic: bool,
}

impl ThermalMassSpec {
    /// Half-layer conductance per unit area, k / (0.5 t), W/(m²·K).
    pub fn half_layer_conductance(&self) -> f64 {
        self.conductivity / (0.5 * self.thickness)
    }

    /// ρ·V·Cp of the core node, J/K.
    pub fn heat_capacity(&self) -> f64 {
        self.density * self.area * self.thickness * self.specific_heat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpeningName {
    Skylight,
    RoofVent,
    FloorVent,
    Window,
}

impl OpeningName {
    pub fn as_str(self) -> &'static str {
        match self {
            OpeningName::Skylight => "skylight",
            OpeningName::RoofVent => "roof_vent",
            OpeningName::FloorVent => "floor_vent",
            OpeningName::Window => "window",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "skylight" => Some(OpeningName::Skylight),
            "roof_vent" => Some(OpeningName::RoofVent),
            "floor_vent" => Some(OpeningName::FloorVent),
            "window" => Some(OpeningName::Window),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningSpec {
    pub name: OpeningName,
    pub width: f64,
    pub height: f64,
    pub area: f64,
    /// Height of the opening centre above the floor.
    pub mid_height: f64,
    pub discharge_coefficient: f64,
}

impl OpeningSpec {
    pub fn new(
        name: OpeningName,
        width: f64,
        height: f64,
        mid_height: f64,
        discharge_coefficient: f64,
    ) -> Result<Self> {
        let p = format!("openings.{}", name.as_str());
        let width = positive(&format!("{p}.width_m"), Some(width))?;
        let height = positive(&format!("{p}.height_m"), Some(height))?;
        if !(mid_height.is_finite() && mid_height >= 0.0) {
            return Err(Error::invalid(format!("{p}.mid_height_m"), "must be >= 0"));
        }
        if !(discharge_coefficient > 0.0 && discharge_coefficient <= 1.0) {
            return Err(Error::invalid(
                format!("{p}.discharge_coefficient"),
                "must lie in (0, 1]",
            ));
        }
        Ok(OpeningSpec {
            name,
            width,
            height,
            area: width * height,
            mid_height,
            discharge_coefficient,
        })
    }
}

/// The pair of open openings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VentilationConfig {
    pub opening_a: OpeningSpec,
    pub opening_b: OpeningSpec,
    pub delta_h: f64,
    pub total_area: f64,
}

impl VentilationConfig {
    pub fn new(opening_a: OpeningSpec, opening_b: OpeningSpec) -> Result<Self> {
        if opening_a.name == opening_b.name {
            return Err(Error::invalid(
                "ventilation.openings",
                format!("opening {} listed twice", opening_a.name.as_str()),
            ));
        }
        Ok(VentilationConfig {
            delta_h: (opening_a.mid_height - opening_b.mid_height).abs(),
            total_area: opening_a.area + opening_b.area,
            opening_a,
            opening_b,
        })
    }

    /// `"skylight+floor_vent"` style label.
    pub fn label(&self) -> String {
        format!(
            "{}+{}",
            self.opening_a.name.as_str(),
            self.opening_b.name.as_str()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirProperties {
    pub density: f64,
    pub specific_heat: f64,
}

impl Default for AirProperties {
    fn default() -> Self {
        AirProperties {
            density: 1.16,
            specific_heat: 1005.0,
        }
    }
}

/// Power-law correction from anemometer height to the house reference height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindCorrection {
    pub anemometer_height: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FloorTemperature {
    /// Fixed floor surface temperature, K.
    Fixed(f64),
    /// Mean outdoor temperature of the simulated period, resolved against
    /// the fitted weather windows.
    OutdoorMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub geometry: HouseGeometry,
    /// Every non-floor mass, in [`MassName`] order.
    pub masses: Vec<ThermalMassSpec>,
    pub floor: ThermalMassSpec,
    pub floor_temperature: FloorTemperature,
    pub openings: Vec<OpeningSpec>,
    pub ventilation: VentilationConfig,
    pub air: AirProperties,
    pub wind: WindCorrection,
    pub ranges: ParameterRanges,
}

impl ScenarioConfig {
    pub fn opening(&self, name: OpeningName) -> Option<&OpeningSpec> {
        self.openings.iter().find(|o| o.name == name)
    }

    /// Build a ventilation configuration from a `"a+b"` label.
    pub fn ventilation_from_label(&self, label: &str) -> Result<VentilationConfig> {
        let parts: Vec<&str> = label.split('+').collect();
        if parts.len() != 2 {
            return Err(Error::invalid(
                "config_name",
                format!("expected '<opening>+<opening>', got '{label}'"),
            ));
        }
        let mut specs = Vec::with_capacity(2);
        for p in parts {
            let name = OpeningName::parse(p)
                .ok_or_else(|| Error::invalid("config_name", format!("unknown opening '{p}'")))?;
            let spec = self.opening(name).ok_or_else(|| {
                Error::invalid("config_name", format!("opening '{p}' not defined in scenario"))
            })?;
            specs.push(spec.clone());
        }
        let b = specs.pop().unwrap();
        let a = specs.pop().unwrap();
        VentilationConfig::new(a, b)
    }

    pub fn with_ventilation(mut self, ventilation: VentilationConfig) -> Self {
        self.ventilation = ventilation;
        self
    }

    /// Floor temperature in kelvin, given the mean outdoor temperature of
    /// the simulated period.
    pub fn floor_temperature_k(&self, outdoor_mean_k: f64) -> f64 {
        match self.floor_temperature {
            FloorTemperature::Fixed(t) => t,
            FloorTemperature::OutdoorMean => outdoor_mean_k,
        }
    }

    /// SHA-256 over the canonical JSON form of the validated scenario.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Raw document reproducing this scenario; validating it again yields
    /// an identical configuration.
    pub fn to_document(&self) -> ScenarioDocument {
        let g = &self.geometry;
        let mass_doc = |m: &ThermalMassSpec, t: Option<FloorTemperatureDoc>| MassDoc {
            name: Some(m.name.as_str().to_string()),
            area_m2: Some(m.area),
            thickness_m: Some(m.thickness),
            density_kgm3: Some(m.density),
            specific_heat_jkgk: Some(m.specific_heat),
            conductivity_wmk: Some(m.conductivity),
            emissivity_indoor: m.emissivity_indoor,
            adiabatic: Some(m.adiabatic),
            constant_temperature_c: t,
        };
        let mut masses: Vec<MassDoc> = self.masses.iter().map(|m| mass_doc(m, None)).collect();
        let floor_t = match self.floor_temperature {
            FloorTemperature::Fixed(k) => FloorTemperatureDoc::Celsius(kelvin_to_celsius(k)),
            FloorTemperature::OutdoorMean => {
                FloorTemperatureDoc::Keyword("outdoor_mean".to_string())
            }
        };
        masses.push(mass_doc(&self.floor, Some(floor_t)));
        let std = ParameterRanges::standard();
        let uq_ranges: BTreeMap<String, [f64; 2]> = Param::ALL
            .into_iter()
            .filter(|&p| self.ranges.get(p) != std.get(p))
            .map(|p| {
                let r = self.ranges.get(p);
                (p.name().to_string(), [r.lo, r.hi])
            })
            .collect();
        ScenarioDocument {
            geometry: Some(GeometryDoc {
                floor_length_m: Some(g.floor_length),
                floor_width_m: Some(g.floor_width),
                height_north_m: Some(g.height_north),
                height_south_m: Some(g.height_south),
                reference_height_m: Some(g.reference_height),
            }),
            air: Some(AirDoc {
                density_kgm3: Some(self.air.density),
                specific_heat_jkgk: Some(self.air.specific_heat),
            }),
            masses,
            openings: self
                .openings
                .iter()
                .map(|o| OpeningDoc {
                    name: Some(o.name.as_str().to_string()),
                    width_m: Some(o.width),
                    height_m: Some(o.height),
                    mid_height_m: Some(o.mid_height),
                    discharge_coefficient: Some(o.discharge_coefficient),
                })
                .collect(),
            ventilation: Some(VentilationDoc {
                openings: Some(vec![
                    self.ventilation.opening_a.name.as_str().to_string(),
                    self.ventilation.opening_b.name.as_str().to_string(),
                ]),
            }),
            wind: Some(WindDoc {
                anemometer_height_m: Some(self.wind.anemometer_height),
                shear_exponent: Some(self.wind.exponent),
            }),
            uq_ranges: if uq_ranges.is_empty() {
                None
            } else {
                Some(uq_ranges)
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Raw document

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub geometry: Option<GeometryDoc>,
    pub air: Option<AirDoc>,
    #[serde(default)]
    pub masses: Vec<MassDoc>,
    #[serde(default)]
    pub openings: Vec<OpeningDoc>,
    pub ventilation: Option<VentilationDoc>,
    pub wind: Option<WindDoc>,
    pub uq_ranges: Option<BTreeMap<String, [f64; 2]>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    pub floor_length_m: Option<f64>,
    pub floor_width_m: Option<f64>,
    pub height_north_m: Option<f64>,
    pub height_south_m: Option<f64>,
    pub reference_height_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirDoc {
    pub density_kgm3: Option<f64>,
    pub specific_heat_jkgk: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FloorTemperatureDoc {
    Celsius(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassDoc {
    pub name: Option<String>,
    pub area_m2: Option<f64>,
    pub thickness_m: Option<f64>,
    pub density_kgm3: Option<f64>,
    pub specific_heat_jkgk: Option<f64>,
    pub conductivity_wmk: Option<f64>,
    pub emissivity_indoor: Option<f64>,
    pub adiabatic: Option<bool>,
    pub constant_temperature_c: Option<FloorTemperatureDoc>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpeningDoc {
    pub name: Option<String>,
    pub width_m: Option<f64>,
    pub height_m: Option<f64>,
    pub mid_height_m: Option<f64>,
    pub discharge_coefficient: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VentilationDoc {
    pub openings: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindDoc {
    pub anemometer_height_m: Option<f64>,
    pub shear_exponent: Option<f64>,
}

impl ScenarioDocument {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid("scenario", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario document serializes")
    }
}

pub fn load_scenario(path: impl AsRef<std::path::Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    validate_scenario(&ScenarioDocument::from_toml(&text)?)
}

fn mass_name(path: &str, s: &str) -> Result<MassName> {
    MassName::ALL
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::invalid(path, format!("unknown thermal mass '{s}'")))
}

/// Validate a raw document and compute every derived field.
pub fn validate_scenario(doc: &ScenarioDocument) -> Result<ScenarioConfig> {
    let g = doc
        .geometry
        .as_ref()
        .ok_or_else(|| Error::invalid("geometry", "missing section"))?;
    let geometry = HouseGeometry {
        floor_length: positive("geometry.floor_length_m", g.floor_length_m)?,
        floor_width: positive("geometry.floor_width_m", g.floor_width_m)?,
        height_north: positive("geometry.height_north_m", g.height_north_m)?,
        height_south: positive("geometry.height_south_m", g.height_south_m)?,
        reference_height: positive("geometry.reference_height_m", g.reference_height_m)?,
        air_volume: 0.0,
    };
    let geometry = HouseGeometry::new(
        geometry.floor_length,
        geometry.floor_width,
        geometry.height_north,
        geometry.height_south,
        geometry.reference_height,
    )?;

    let air = match &doc.air {
        None => AirProperties::default(),
        Some(a) => {
            let d = AirProperties::default();
            AirProperties {
                density: positive("air.density_kgm3", Some(a.density_kgm3.unwrap_or(d.density)))?,
                specific_heat: positive(
                    "air.specific_heat_jkgk",
                    Some(a.specific_heat_jkgk.unwrap_or(d.specific_heat)),
                )?,
            }
        }
    };

    let mut masses: Vec<ThermalMassSpec> = Vec::new();
    let mut floor: Option<(ThermalMassSpec, FloorTemperature)> = None;
    for (i, m) in doc.masses.iter().enumerate() {
        let p = format!("masses[{i}]");
        let name = match &m.name {
            None => return Err(Error::invalid(format!("{p}.name"), "missing field")),
            Some(s) => mass_name(&format!("{p}.name"), s)?,
        };
        if masses.iter().any(|x| x.name == name) || (name == MassName::Floor && floor.is_some()) {
            return Err(Error::invalid(
                format!("{p}.name"),
                format!("duplicate thermal mass '{}'", name.as_str()),
            ));
        }
        let default_area = match name {
            MassName::Roof | MassName::Floor => geometry.floor_area(),
            MassName::WallN => geometry.floor_length * geometry.height_north,
            MassName::WallS => geometry.floor_length * geometry.height_south,
            MassName::WallE | MassName::WallW => geometry.floor_width * geometry.mean_height(),
        };
        let emissivity_indoor = match m.emissivity_indoor {
            Some(e) if !(0.0..=1.0).contains(&e) => {
                return Err(Error::invalid(
                    format!("{p}.emissivity_indoor"),
                    "must lie in [0, 1]",
                ))
            }
            e => e,
        };
        let adiabatic = m.adiabatic.unwrap_or(false);
        if adiabatic && !name.is_wall() {
            return Err(Error::invalid(
                format!("{p}.adiabatic"),
                "only a wall may be adiabatic",
            ));
        }
        let spec = ThermalMassSpec {
            name,
            area: positive(&format!("{p}.area_m2"), Some(m.area_m2.unwrap_or(default_area)))?,
            thickness: positive(&format!("{p}.thickness_m"), m.thickness_m)?,
            density: positive(&format!("{p}.density_kgm3"), m.density_kgm3)?,
            specific_heat: positive(&format!("{p}.specific_heat_jkgk"), m.specific_heat_jkgk)?,
            conductivity: positive(&format!("{p}.conductivity_wmk"), m.conductivity_wmk)?,
            emissivity_indoor,
            adiabatic,
        };
        if name == MassName::Floor {
            let t = match &m.constant_temperature_c {
                None => {
                    return Err(Error::invalid(
                        format!("{p}.constant_temperature_c"),
                        "the floor requires a constant temperature",
                    ))
                }
                Some(FloorTemperatureDoc::Celsius(c)) => FloorTemperature::Fixed(
                    check_temperature(
                        &format!("{p}.constant_temperature_c"),
                        celsius_to_kelvin(*c),
                    )?,
                ),
                Some(FloorTemperatureDoc::Keyword(k)) if k == "outdoor_mean" => {
                    FloorTemperature::OutdoorMean
                }
                Some(FloorTemperatureDoc::Keyword(k)) => {
                    return Err(Error::invalid(
                        format!("{p}.constant_temperature_c"),
                        format!("expected a number or \"outdoor_mean\", got \"{k}\""),
                    ))
                }
            };
            floor = Some((spec, t));
        } else {
            if m.constant_temperature_c.is_some() {
                return Err(Error::invalid(
                    format!("{p}.constant_temperature_c"),
                    "only the floor carries a constant temperature",
                ));
            }
            masses.push(spec);
        }
    }
    let (floor, floor_temperature) =
        floor.ok_or_else(|| Error::invalid("masses", "missing thermal mass 'floor'"))?;
    for required in [
        MassName::Roof,
        MassName::WallN,
        MassName::WallS,
        MassName::WallE,
        MassName::WallW,
    ] {
        if !masses.iter().any(|m| m.name == required) {
            return Err(Error::invalid(
                "masses",
                format!("missing thermal mass '{}'", required.as_str()),
            ));
        }
    }
    if masses.iter().filter(|m| m.adiabatic).count() != 1 {
        return Err(Error::invalid(
            "masses",
            "exactly one wall must be flagged adiabatic",
        ));
    }
    masses.sort_by_key(|m| m.name);

    let mut openings: Vec<OpeningSpec> = Vec::new();
    for (i, o) in doc.openings.iter().enumerate() {
        let p = format!("openings[{i}]");
        let name = match &o.name {
            None => return Err(Error::invalid(format!("{p}.name"), "missing field")),
            Some(s) => OpeningName::parse(s)
                .ok_or_else(|| Error::invalid(format!("{p}.name"), format!("unknown opening '{s}'")))?,
        };
        if openings.iter().any(|x| x.name == name) {
            return Err(Error::invalid(
                format!("{p}.name"),
                format!("duplicate opening '{}'", name.as_str()),
            ));
        }
        let width = positive(&format!("{p}.width_m"), o.width_m)?;
        let height = positive(&format!("{p}.height_m"), o.height_m)?;
        let mid = o
            .mid_height_m
            .ok_or_else(|| Error::invalid(format!("{p}.mid_height_m"), "missing field"))?;
        if !(mid.is_finite() && mid >= 0.0) {
            return Err(Error::invalid(format!("{p}.mid_height_m"), "must be >= 0"));
        }
        let cd = o.discharge_coefficient.unwrap_or(DEFAULT_DISCHARGE_COEFFICIENT);
        if !(cd > 0.0 && cd <= 1.0) {
            return Err(Error::invalid(
                format!("{p}.discharge_coefficient"),
                "must lie in (0, 1]",
            ));
        }
        openings.push(OpeningSpec {
            name,
            width,
            height,
            area: width * height,
            mid_height: mid,
            discharge_coefficient: cd,
        });
    }
    openings.sort_by_key(|o| o.name);

    let names = doc
        .ventilation
        .as_ref()
        .and_then(|v| v.openings.as_ref())
        .ok_or_else(|| Error::invalid("ventilation.openings", "missing field"))?;
    if names.len() != 2 {
        return Err(Error::invalid(
            "ventilation.openings",
            format!("expected exactly two openings, got {}", names.len()),
        ));
    }
    let mut pair = Vec::with_capacity(2);
    for (i, n) in names.iter().enumerate() {
        let p = format!("ventilation.openings[{i}]");
        let name = OpeningName::parse(n)
            .ok_or_else(|| Error::invalid(&p, format!("unknown opening '{n}'")))?;
        let spec = openings
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| Error::invalid(&p, format!("opening '{n}' is not defined")))?;
        pair.push(spec.clone());
    }
    let opening_b = pair.pop().unwrap();
    let opening_a = pair.pop().unwrap();
    let ventilation = VentilationConfig::new(opening_a, opening_b)?;

    let wind_doc = doc.wind.clone().unwrap_or_default();
    let wind = WindCorrection {
        anemometer_height: positive(
            "wind.anemometer_height_m",
            Some(wind_doc.anemometer_height_m.unwrap_or(geometry.reference_height)),
        )?,
        exponent: match wind_doc.shear_exponent.unwrap_or(DEFAULT_SHEAR_EXPONENT) {
            e if e.is_finite() && e >= 0.0 => e,
            _ => return Err(Error::invalid("wind.shear_exponent", "must be >= 0")),
        },
    };

    let mut ranges = ParameterRanges::standard();
    if let Some(overrides) = &doc.uq_ranges {
        for (key, [lo, hi]) in overrides {
            let p = Param::ALL
                .into_iter()
                .find(|p| p.name() == key)
                .ok_or_else(|| {
                    Error::invalid(format!("uq_ranges.{key}"), "unknown uncertain parameter")
                })?;
            ranges = ranges.with(p, Range::new(*lo, *hi))?;
        }
    }

    Ok(ScenarioConfig {
        geometry,
        masses,
        floor,
        floor_temperature,
        openings,
        ventilation,
        air,
        wind,
        ranges,
    })
}
