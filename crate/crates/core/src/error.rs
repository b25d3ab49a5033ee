use thiserror::Error;

/// Failures reported by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The truncated matching indicator keeps one sign on the search interval.
    /// `trace` holds sampled `(lambda, indicator)` pairs for diagnosis.
    #[error("no sign change of the matching indicator for m = {m} on ({lo}, {hi})")]
    NoSignChange {
        m: usize,
        lo: f64,
        hi: f64,
        trace: Vec<(f64, f64)>,
    },

    #[error("critical-length scan found {found} of {wanted} zeros below l = {cap}")]
    GridExhausted { found: usize, wanted: usize, cap: f64 },

    #[error("no commensurate mesh within 20% of h = {h_target}; nearest feasible h = {nearest}")]
    InfeasibleGrid { h_target: f64, nearest: f64 },

    #[error("null-vector residual {residual:e} exceeds {limit:e}")]
    Residual { residual: f64, limit: f64 },

    #[error("threshold solution is not unique: second singular value {0:e}")]
    NotUnique(f64),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
