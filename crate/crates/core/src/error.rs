use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("non-finite value encountered: {0}")]
    Numeric(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("sampling failed after {attempts} attempts")]
    Sampling { attempts: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("walk did not reach the boundary within {steps} steps")]
    NonConvergence { steps: usize },

    #[error("evaluation at a pole: w = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    /// Carries the traced polylines so a failed graph can be inspected.
    #[error("critical graph structure error: {message} ({} diagnostic polylines)", polylines.len())]
    Structure {
        message: String,
        polylines: Vec<Vec<num_complex::Complex64>>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
