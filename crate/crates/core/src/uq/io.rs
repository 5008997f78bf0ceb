use std::io::Write;

use super::{Band, SobolReport, UqReport};
use crate::error::{Error, Result};

pub const UQ_HEADER: [&str; 6] = ["time_s", "model", "quantity", "mean", "ci_low", "ci_high"];
pub const SOBOL_HEADER: [&str; 9] = ["window", "model", "quantity", "parameter", "min", "q25", "median", "q75", "max"];

/// Rows ordered by model, quantity, then time. The ensemble envelope uses
/// the model name `ensemble`.
pub fn write_uq_csv<W: Write>(writer: W, r: &UqReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(UQ_HEADER)?;
    let mut emit = |model: &str, quantity: &str, b: &Band| -> Result<()> {
        for (k, t) in r.time.iter().enumerate() {
            w.write_record([
                (r.start + t).to_string(),
                model.to_string(),
                quantity.to_string(),
                b.mean[k].to_string(),
                b.ci_low[k].to_string(),
                b.ci_high[k].to_string(),
            ])?;
        }
        Ok(())
    };
    for m in &r.models {
        emit(m.model.as_str(), "t_air", &m.t_air)?;
        emit(m.model.as_str(), "ach", &m.ach)?;
    }
    if let Some((t, a)) = &r.ensemble {
        emit("ensemble", "t_air", t)?;
        emit("ensemble", "ach", a)?;
    }
    w.flush().map_err(|e| Error::io("uq csv", e))?;
    Ok(())
}

pub fn write_sobol_csv<W: Write>(writer: W, r: &SobolReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SOBOL_HEADER)?;
    for row in &r.rows {
        let s = &row.summary;
        w.write_record([
            row.window.clone(),
            row.model.as_str().to_string(),
            row.quantity.to_string(),
            row.parameter.name().to_string(),
            s.min.to_string(),
            s.q25.to_string(),
            s.median.to_string(),
            s.q75.to_string(),
            s.max.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("sobol csv", e))?;
    Ok(())
}
