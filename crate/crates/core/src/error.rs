//! Crate-wide error type.

use crate::half::HalfInt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode index: {0}")]
    InvalidMode(String),

    #[error("spin mismatch: expansion carries spin {expected}, term has spin {got}")]
    SpinMismatch { expected: HalfInt, got: HalfInt },

    #[error("operation requires spin {expected}, got spin {got}")]
    WrongSpin { expected: HalfInt, got: HalfInt },

    #[error("mode {0} is not in the physical spectrum (total spin must differ from the left label by the field spin)")]
    NonPhysicalMode(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("serialisation error: {0}")]
    Serde(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mathematical contradiction: {0}")]
    TheoremContradiction(String),

    #[error("search failed: {0}")]
    SearchFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
