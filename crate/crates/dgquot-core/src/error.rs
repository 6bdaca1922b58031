use alloc::string::String;
use core::fmt;

/// Contract violations surfaced by the algebraic layers.
///
/// These are caller errors (mismatched shapes, invalid inputs), not internal
/// failures; internal invariants are enforced with debug assertions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A matrix or vector had the wrong shape for the requested operation.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// Two elements belong to algebras built over different windows or
    /// instances.
    AlgebraMismatch,
    /// An element had the wrong homological degree for the operation.
    WrongDegree { expected: usize, found: usize },
    /// A submodule candidate is not closed under the ring action; names the
    /// first offending degree and basis column.
    NotClosed { degree: i64, column: usize },
    /// A submodule candidate has the wrong dimension at some degree.
    WrongFiberDimension {
        degree: i64,
        expected: usize,
        found: usize,
    },
    /// A Maurer-Cartan residual that was required to vanish does not.
    ResidualNonzero { label: String },
    /// A gauge block is square but singular.
    NonInvertibleBlock { degree: i64 },
    /// The dimension profile exceeds the module dimension at some degree.
    HilbertExceedsModule { degree: i64 },
    /// The operation needs a ring generated in degree 1.
    NotDegreeOneGenerated,
    /// The operation enumerates points and needs a prime field.
    PrimeFieldRequired,
    /// A scalar string failed to parse.
    BadScalar(String),
    /// A structured input violated a stated precondition.
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                context,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch in {context}: expected {expected}, found {found}"
            ),
            Error::AlgebraMismatch => write!(f, "elements belong to different algebras"),
            Error::WrongDegree { expected, found } => write!(
                f,
                "wrong homological degree: expected {expected}, found {found}"
            ),
            Error::NotClosed { degree, column } => write!(
                f,
                "submodule not closed under the action at degree {degree}, basis column {column}"
            ),
            Error::WrongFiberDimension {
                degree,
                expected,
                found,
            } => write!(
                f,
                "submodule has dimension {found} at degree {degree}, profile requires {expected}"
            ),
            Error::ResidualNonzero { label } => {
                write!(f, "Maurer-Cartan residual is nonzero at {label}")
            }
            Error::NonInvertibleBlock { degree } => {
                write!(f, "gauge block at degree {degree} is not invertible")
            }
            Error::HilbertExceedsModule { degree } => {
                write!(f, "hilbert exceeds module dimension at degree {degree}")
            }
            Error::NotDegreeOneGenerated => {
                write!(f, "ring is not generated in degree 1")
            }
            Error::PrimeFieldRequired => {
                write!(f, "point enumeration requires a prime field")
            }
            Error::BadScalar(s) => write!(f, "cannot parse scalar {s:?}"),
            Error::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}
