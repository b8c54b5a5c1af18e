//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulation routines.
///
/// Variants split into two families: rejected inputs ([`Error::InvalidInput`],
/// [`Error::SizeLimit`], [`Error::BoundaryTouch`]) and failures discovered
/// during a computation ([`Error::Integrator`], [`Error::InsufficientData`],
/// [`Error::NumericalBreakdown`]). The CLI maps the first family to exit code
/// 2 and the second to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A request exceeded an implementation cap.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// A lattice computation reached the far boundary, invalidating the
    /// semi-infinite approximation for the requested experiment.
    #[error("lattice boundary touched: {0}")]
    BoundaryTouch(String),

    /// Too few usable samples or points for the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The adaptive integrator could not continue.
    #[error("integrator failed at t = {t_reached}: {message}")]
    Integrator { t_reached: f64, message: String },

    /// An iterative numerical procedure lost accuracy beyond repair.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

impl Error {
    /// True for errors caused by rejected inputs rather than runtime numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::SizeLimit(_) | Error::BoundaryTouch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
