//! Error type shared by all modules of the crate.

use alloc::string::String;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by subspace construction, iteration and rate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input matrix or vector contains NaN or infinite entries.
    NonFiniteInput,
    /// Vector or basis dimensions do not match the ambient space.
    DimensionMismatch { expected: usize, found: usize },
    /// A zero-dimensional subspace was passed where a positive dimension is required.
    EmptySubspace,
    /// A matrix claimed to have orthonormal columns fails the Gram check.
    NotOrthonormal { deviation: f64 },
    /// A scalar parameter lies outside its admissible range.
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    /// The Friedrichs angle does not exist because `U ⊆ V`.
    FriedrichsUndefined,
    /// Pair construction or the spectral oracle requires `p + q < n`.
    AmbientTooSmall { n: usize, p: usize, q: usize },
    /// A precondition on the arguments was violated.
    InvalidArgument(&'static str),
    /// A principal frame rebuilt from an ingested pair failed the orthogonality gate.
    FrameGate { deviation: f64 },
    /// Power iteration did not contract; the operator appears non-convergent.
    NotConvergent { ratio: f64 },
    /// A method name did not parse.
    UnknownMethod { name: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteInput => write!(f, "input contains non-finite entries"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptySubspace => write!(f, "zero-dimensional subspace not allowed here"),
            Error::NotOrthonormal { deviation } => {
                write!(f, "columns are not orthonormal (max Gram deviation {deviation:.3e})")
            }
            Error::ParameterOutOfRange { name, value, range } => {
                write!(f, "parameter {name} = {value} outside {range}")
            }
            Error::FriedrichsUndefined => {
                write!(f, "Friedrichs angle undefined: U contained in V")
            }
            Error::AmbientTooSmall { n, p, q } => write!(
                f,
                "construction needs p + q < n but p = {p}, q = {q}, n = {n}; \
                 raise the ambient dimension"
            ),
            Error::InvalidArgument(msg) => write!(f, "{msg}"),
            Error::FrameGate { deviation } => write!(
                f,
                "rebuilt principal frame fails orthogonality gate (deviation {deviation:.3e})"
            ),
            Error::NotConvergent { ratio } => {
                write!(f, "operator not convergent: sustained growth ratio {ratio}")
            }
            Error::UnknownMethod { name } => write!(f, "unknown method name: {name}"),
        }
    }
}

impl core::error::Error for Error {}
