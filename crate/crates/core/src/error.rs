use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("value outside the domain of {what}: {reason}")]
    Domain { what: &'static str, reason: String },

    #[error("condition cannot be satisfied: {0}")]
    Unsatisfiable(String),

    #[error("{what} did not converge: achieved {achieved:e}, target {target:e}")]
    NotConverged {
        what: &'static str,
        achieved: f64,
        target: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}
