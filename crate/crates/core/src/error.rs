use thiserror::Error;

/// Errors raised by the dynamics, solvers and analysis routines.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("order-parameter phase undefined: R = {r:e} is at or below R_MIN")]
    UndefinedPhase { r: f64 },

    #[error("non-finite state encountered at t = {time}")]
    NonFinite { time: f64 },

    #[error("total mass {total} differs from 1 by more than {tol:e}")]
    InvalidMass { total: f64, tol: f64 },

    #[error("frequency support too wide: max|omega|/K = {ratio} exceeds 1")]
    SupportTooWide { ratio: f64 },

    #[error("no supercritical coupling found up to K = {k_max}")]
    BracketNotFound { k_max: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
