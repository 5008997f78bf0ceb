//! Wall-clock timestamps.
//!
//! Timestamps are seconds since the Unix epoch *of the local wall clock*:
//! an ISO-8601 value with a UTC offset keeps its local reading, so that
//! time-of-day windows (9:00–15:00 and so on) refer to the site's clock.

use chrono::{DateTime, NaiveDateTime, Timelike};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Parse an ISO-8601 timestamp (with or without offset, `T` or space
/// separator, optional fractional seconds) or a plain number of seconds.
pub fn parse_timestamp(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(naive_seconds(&dt.naive_local()));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(naive_seconds(&dt));
        }
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn naive_seconds(dt: &NaiveDateTime) -> f64 {
    let utc = dt.and_utc();
    utc.timestamp() as f64 + f64::from(utc.nanosecond()) * 1e-9
}

/// `YYYY-MM-DDTHH:MM:SS` for whole seconds, with a fractional part otherwise.
pub fn format_timestamp(t: f64) -> String {
    let secs = t.floor();
    let nanos = ((t - secs) * 1e9).round() as u32;
    match DateTime::from_timestamp(secs as i64, nanos.min(999_999_999)) {
        Some(dt) if nanos == 0 => dt.naive_utc().format("%Y-%m-%dT%H:%M:%S").to_string(),
        Some(dt) => dt.naive_utc().format("%Y-%m-%dT%H:%M:%S%.3f").to_string(),
        None => format!("{t}"),
    }
}

/// Seconds since local midnight.
pub fn time_of_day(t: f64) -> f64 {
    t.rem_euclid(SECONDS_PER_DAY)
}
