use thiserror::Error;

/// Failure classes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A documented precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A numeric argument lies outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A covering bound's hypothesis does not hold for these parameters.
    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),
    /// The bound degenerates (required coverage is zero or negative).
    #[error("vacuous bound: {0}")]
    VacuousBound(String),
    /// Not enough defined mass exists to reach the requested coverage.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// A configured search or materialization cap was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A parameter search ran out of candidates.
    #[error("parameter search failed: {0}")]
    ParameterSearch(String),
    /// A snapshot or schedule document could not be read.
    #[error("load error at {position}: {message}")]
    Load { position: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! contract {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err($crate::Error::Contract(format!($($arg)*)));
        }
    };
}
pub(crate) use contract;
