use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a precondition (wrong range, zero count, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested evaluation point lies outside the supported domain.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// Adaptive integration ran out of refinement budget. Carries the best
    /// estimate and the error bound it actually achieved.
    #[error("integration tolerance not reached: value {value}, error estimate {err_est}")]
    Tolerance { value: f64, err_est: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
