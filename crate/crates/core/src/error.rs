use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or argument. `path` names the offending field.
    #[error("invalid {path}: {msg}")]
    Invalid { path: String, msg: String },

    /// Malformed input file row.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The thermal solver left the plausibility band or an inner
    /// iteration failed to converge.
    #[error("solver failure at t = {time_s} s: {msg}")]
    Solver { time_s: f64, msg: String },

    /// Numerical routine (fit, root finder) failed to converge.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Too many Monte-Carlo samples aborted with solver failures.
    #[error("{failed} of {total} {what} aborted (limit {limit_percent} %)")]
    TooManyFailures {
        what: String,
        failed: usize,
        total: usize,
        limit_percent: f64,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Solver { .. } | Error::NoConvergence { .. } | Error::TooManyFailures { .. })
    }
}
