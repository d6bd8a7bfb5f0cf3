use thiserror::Error;

/// Errors raised when constructing model objects or calling the solvers with
/// inputs outside their domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{node} coincides with array element {element} (distance {distance:e} m)")]
    DegenerateGeometry {
        node: &'static str,
        element: usize,
        distance: f64,
    },

    #[error("offset {index} = {value} Hz outside [0, {max}] Hz")]
    OffsetOutOfRange { index: usize, value: f64, max: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("inner product {inner:e} exceeds Cauchy-Schwarz bound {bound:e}")]
    CauchySchwarz { inner: f64, bound: f64 },

    #[error("degenerate: {0}")]
    Degenerate(&'static str),

    #[error("empty interval: lower {lower} > upper {upper}")]
    EmptyInterval { lower: f64, upper: f64 },

    #[error("grid oracle supports at most 3 elements, got {0}")]
    OracleTooLarge(usize),

    #[error("csv output failed: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
