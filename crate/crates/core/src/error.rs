//! Error type shared by every module in this crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two vectors that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A constructor or operation received an argument outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A gradient handed to a bettor exceeded the unit bound after scaling.
    /// Betting wealth guarantees only hold for gradients of norm at most one,
    /// so this is fatal rather than silently clipped.
    #[error("scaled gradient norm {norm} exceeds 1")]
    ScalingViolation { norm: f64 },

    /// Betting wealth dropped to zero or below, which breaks the invariant
    /// the iterate formula relies on. Indicates an unscaled or adversarially
    /// misscaled gradient stream.
    #[error("betting wealth exhausted: {wealth}")]
    WealthExhausted { wealth: f64 },

    /// Wraps an error raised inside a solver loop with the 1-based iteration
    /// at which it occurred.
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// Input text could not be parsed (malformed numbers, missing fields).
    /// `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input parsed but violates a structural rule of the format, such as
    /// non-increasing feature indices. `line` is 1-based.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// A dataset with zero samples where at least one is required.
    #[error("empty dataset")]
    EmptyDataset,

    /// A raw label not covered by the requested label remap.
    #[error("unmapped raw label {0}")]
    UnmappedLabel(f64),

    /// KL divergence is infinite because the first argument puts mass where
    /// the second has none.
    #[error("infinite KL divergence: p[{index}] > 0 but q[{index}] = 0")]
    InfiniteKl { index: usize },
}

impl Error {
    /// True for errors raised by the numerical core of a run (wealth or
    /// scaling violations), as opposed to bad configuration or bad data.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::ScalingViolation { .. } | Error::WealthExhausted { .. } => true,
            Error::AtIteration { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// The 1-based iteration attached to this error, if any.
    pub fn iteration(&self) -> Option<usize> {
        match self {
            Error::AtIteration { iteration, .. } => Some(*iteration),
            _ => None,
        }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Error {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_classification() {
        assert!(Error::WealthExhausted { wealth: -0.1 }.is_numerical());
        assert!(Error::ScalingViolation { norm: 1.5 }.is_numerical());
        assert!(Error::ScalingViolation { norm: 1.5 }
            .at_iteration(7)
            .is_numerical());
        assert!(!Error::EmptyDataset.is_numerical());
        assert!(!Error::InvalidArgument("x".into()).is_numerical());
    }

    #[test]
    fn iteration_is_attached() {
        let err = Error::WealthExhausted { wealth: 0.0 }.at_iteration(42);
        assert_eq!(err.iteration(), Some(42));
        assert_eq!(
            err.to_string(),
            "iteration 42: betting wealth exhausted: 0"
        );
    }
}
