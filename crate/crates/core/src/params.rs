//! The seven uncertain inputs of the model and their sampling ranges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_PARAMS: usize = 7;

/// Parameter identifiers in canonical order. The order is part of the
/// sampling contract: draws are taken in this order for every sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    HIn,
    HOut,
    RhoRoof,
    EpsRoof,
    PTemp,
    PRad,
    PWind,
}

impl Param {
    pub const ALL: [Param; N_PARAMS] = [
        Param::HIn,
        Param::HOut,
        Param::RhoRoof,
        Param::EpsRoof,
        Param::PTemp,
        Param::PRad,
        Param::PWind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::HIn => "h_in",
            Param::HOut => "h_out",
            Param::RhoRoof => "rho_roof",
            Param::EpsRoof => "eps_roof",
            Param::PTemp => "p_temp",
            Param::PRad => "p_rad",
            Param::PWind => "p_wind",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn is_probability(self) -> bool {
        matches!(self, Param::PTemp | Param::PRad | Param::PWind)
    }
}

impl std::fmt::Display for Param {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed interval `[lo, hi]`; probabilities are drawn from the open interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Affine map of a unit coordinate into the range.
    pub fn from_unit(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRanges {
    ranges: [Range; N_PARAMS],
}

impl Default for ParameterRanges {
    fn default() -> Self {
        Self::standard()
    }
}

impl ParameterRanges {
    /// Indoor/outdoor convection coefficients (W/m²K), roof reflectance and
    /// emissivity, and the three weather quantile probabilities.
    pub fn standard() -> Self {
        ParameterRanges {
            ranges: [
                Range::new(1.0, 4.0),
                Range::new(1.0, 15.0),
                Range::new(0.60, 0.75),
                Range::new(0.80, 0.90),
                Range::new(0.0, 1.0),
                Range::new(0.0, 1.0),
                Range::new(0.0, 1.0),
            ],
        }
    }

    pub fn get(&self, p: Param) -> Range {
        self.ranges[p.index()]
    }

    /// Replace one range. Physical parameters may take any finite interval
    /// (test configurations use e.g. zero emissivity); probabilities must stay
    /// inside `[0, 1]`.
    pub fn with(mut self, p: Param, range: Range) -> Result<Self> {
        let path = format!("uq_ranges.{}", p.name());
        if !(range.lo.is_finite() && range.hi.is_finite()) || range.lo > range.hi {
            return Err(Error::invalid(path, "range must be finite with lo <= hi"));
        }
        if p.is_probability() && (range.lo < 0.0 || range.hi > 1.0) {
            return Err(Error::invalid(path, "probability range must lie within [0, 1]"));
        }
        if !p.is_probability() && range.lo < 0.0 {
            return Err(Error::invalid(path, "physical parameter range must be nonnegative"));
        }
        if matches!(p, Param::RhoRoof | Param::EpsRoof) && range.hi > 1.0 {
            return Err(Error::invalid(path, "reflectance/emissivity must not exceed 1"));
        }
        self.ranges[p.index()] = range;
        Ok(self)
    }

    /// Parameters whose range differs from the standard table.
    pub fn overridden(&self) -> Vec<Param> {
        let std = Self::standard();
        Param::ALL
            .into_iter()
            .filter(|&p| self.get(p) != std.get(p))
            .collect()
    }

    /// Map a point of the unit hypercube onto a parameter sample.
    pub fn from_unit(&self, u: &[f64; N_PARAMS]) -> ParameterSample {
        let mut v = [0.0; N_PARAMS];
        for (i, r) in self.ranges.iter().enumerate() {
            v[i] = r.from_unit(u[i]);
        }
        ParameterSample::from_array(v)
    }

    pub fn check(&self, s: &ParameterSample) -> Result<()> {
        for p in Param::ALL {
            let x = s.get(p);
            let r = self.get(p);
            if !r.contains(x) {
                return Err(Error::invalid(
                    p.name(),
                    format!("{x} outside [{}, {}]", r.lo, r.hi),
                ));
            }
            if p.is_probability() && !(x > 0.0 && x < 1.0) {
                return Err(Error::invalid(p.name(), format!("{x} not in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// One draw of the uncertain inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSample {
    /// Indoor convective coefficient, W/(m²·K).
    pub h_in: f64,
    /// Outdoor convective coefficient, W/(m²·K).
    pub h_out: f64,
    pub roof_reflectance: f64,
    pub roof_emissivity: f64,
    pub p_temp: f64,
    pub p_rad: f64,
    pub p_wind: f64,
}

impl ParameterSample {
    pub fn from_array(v: [f64; N_PARAMS]) -> Self {
        ParameterSample {
            h_in: v[0],
            h_out: v[1],
            roof_reflectance: v[2],
            roof_emissivity: v[3],
            p_temp: v[4],
            p_rad: v[5],
            p_wind: v[6],
        }
    }

    pub fn to_array(&self) -> [f64; N_PARAMS] {
        [
            self.h_in,
            self.h_out,
            self.roof_reflectance,
            self.roof_emissivity,
            self.p_temp,
            self.p_rad,
            self.p_wind,
        ]
    }

    pub fn get(&self, p: Param) -> f64 {
        self.to_array()[p.index()]
    }

    /// Midpoint of every range; handy as a nominal run.
    pub fn nominal(ranges: &ParameterRanges) -> Self {
        ranges.from_unit(&[0.5; N_PARAMS])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_ranges_match_table() {
        let r = ParameterRanges::standard();
        assert_eq!(r.get(Param::HIn), Range::new(1.0, 4.0));
        assert_eq!(r.get(Param::HOut), Range::new(1.0, 15.0));
        assert_eq!(r.get(Param::RhoRoof), Range::new(0.60, 0.75));
        assert_eq!(r.get(Param::EpsRoof), Range::new(0.80, 0.90));
        assert!(r.overridden().is_empty());
    }

    #[test]
    fn override_is_reported() {
        let r = ParameterRanges::standard()
            .with(Param::EpsRoof, Range::new(0.0, 0.0))
            .unwrap();
        assert_eq!(r.overridden(), vec![Param::EpsRoof]);
    }

    #[test]
    fn probability_range_must_be_unit() {
        assert!(ParameterRanges::standard()
            .with(Param::PWind, Range::new(0.2, 1.2))
            .is_err());
        assert!(ParameterRanges::standard()
            .with(Param::HIn, Range::new(3.0, 2.0))
            .is_err());
    }

    #[test]
    fn nominal_is_midpoint() {
        let s = ParameterSample::nominal(&ParameterRanges::standard());
        assert_eq!(s.h_in, 2.5);
        assert_eq!(s.h_out, 8.0);
        assert_eq!(s.p_wind, 0.5);
        ParameterRanges::standard().check(&s).unwrap();
    }
}
