//! Thermal and ventilation simulation of a small naturally ventilated
//! dwelling, with weather-driven uncertainty propagation.

pub mod btm;
pub mod clock;
pub mod domain;
pub mod error;
pub mod params;
pub mod tracer;
pub mod uq;
pub mod vent;
pub mod weather;

pub use error::{Error, Result};
