//! Error type shared by all modules.

use alloc::string::String;

/// Everything that can go wrong across the quantization pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor or operation received a parameter outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A grid was not strictly increasing or contained non-finite points.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Mixture weights did not sum to one or a component was malformed.
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    /// Drift or volatility evaluated to a non-finite value.
    #[error("model evaluation returned a non-finite value at t={t}, x={x}")]
    ModelEvaluation { t: f64, x: f64 },

    /// The tridiagonal solve hit a zero or near-zero pivot.
    #[error("singular tridiagonal system: pivot {pivot:e} at row {row}")]
    SingularSystem { row: usize, pivot: f64 },

    /// A Newton step could not restore strict grid ordering.
    #[error("Newton step ordering unrecoverable after {halvings} halvings at iteration {iteration}")]
    OrderingUnrecoverable { iteration: usize, halvings: usize },

    /// A failure while constructing one tree level (Newton, model
    /// evaluation, or grid validation), tagged with the level index.
    #[error("building level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    /// The requested data is not stored on the tree.
    #[error("transition matrices were dropped at build time")]
    TransitionsDropped,
}

impl Error {
    /// Wraps an error with the tree level at which it occurred.
    pub(crate) fn at_level(self, level: usize) -> Self {
        Error::AtLevel {
            level,
            source: alloc::boxed::Box::new(self),
        }
    }
}
