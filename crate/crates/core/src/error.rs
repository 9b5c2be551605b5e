use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("Gram matrix is ill-conditioned (condition number {condition:.3e} exceeds {bound:.3e})")]
    IllConditioned { condition: f64, bound: f64 },

    #[error("beam {index} is not qualified (cap {cap:.3e} W is not positive)")]
    UnqualifiedBeam { index: usize, cap: f64 },

    #[error("{method} requires {requirement}")]
    Unsupported { method: &'static str, requirement: String },

    #[error("solver did not converge (constraint residual {residual:.3e} nats)")]
    NotConverged { residual: f64 },

    #[error("hybrid energy {hybrid:.12e} exceeds OMA energy {oma:.12e}")]
    DominanceViolated { hybrid: f64, oma: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures raised by a numerical routine rather than by bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. } | Error::NotConverged { .. } | Error::DominanceViolated { .. }
        )
    }
}
