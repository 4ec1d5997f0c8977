//! Error type shared by every module of the crate.

use alloc::boxed::Box;
use core::fmt;

pub type Result<T> = core::result::Result<T, CoreError>;

#[derive(Clone, Debug, PartialEq)]
pub enum CoreError {
    /// A scalar parameter violated its stated constraint.
    InvalidParam {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    /// Vector or matrix sizes do not line up.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// A matrix that must be symmetric positive definite failed to factor.
    NotPositiveDefinite { pivot: usize },
    /// SNR calibration was attempted on signals whose measurements carry no
    /// energy.
    DegenerateCalibration,
    /// A Gibbs chain failed at the given iteration; the cause is preserved.
    Chain {
        iteration: usize,
        cause: Box<CoreError>,
    },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidParam {
                name,
                value,
                constraint,
            } => write!(f, "parameter `{name}` = {value} violates: {constraint}"),
            CoreError::DimensionMismatch {
                context,
                expected,
                got,
            } => write!(f, "{context}: expected dimension {expected}, got {got}"),
            CoreError::NotPositiveDefinite { pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot})")
            }
            CoreError::DegenerateCalibration => {
                write!(f, "cannot calibrate noise: measurement energy is zero")
            }
            CoreError::Chain { iteration, cause } => {
                write!(f, "chain failed at iteration {iteration}: {cause}")
            }
        }
    }
}

impl core::error::Error for CoreError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            CoreError::Chain { cause, .. } => Some(cause.as_ref()),
            _ => None,
        }
    }
}

/// Shorthand used by the validation paths.
pub(crate) fn invalid(name: &'static str, value: f64, constraint: &'static str) -> CoreError {
    CoreError::InvalidParam {
        name,
        value,
        constraint,
    }
}
