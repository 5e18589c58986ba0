//! Error type shared across the crate.

use std::fmt;

#[derive(Debug, Clone)]
pub enum Error {
    /// Input outside an operation's domain (near-singular inversion, pole, ...).
    Domain(String),
    /// Points or metrics of incompatible dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// A sampling or slicing operation produced no points.
    EmptySample(String),
    /// Expression evaluation failed (parse error, non-finite value, bad domain).
    Eval(String),
    /// Neighbor-graph scale too small or too large for the sample.
    Scale(String),
    /// Not enough extreme-band points to estimate directions or ladders.
    InsufficientTail(String),
    /// Two loci lie in different components of the descriptor or graph.
    Unreachable(String),
    /// Adaptive quadrature exceeded its depth cap.
    QuadratureFailure { depth: usize },
    /// Structured-text input could not be parsed; carries a line number.
    Parse { line: usize, msg: String },
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EmptySample(m) => write!(f, "empty sample: {m}"),
            Error::Eval(m) => write!(f, "evaluation error: {m}"),
            Error::Scale(m) => write!(f, "scale error: {m}"),
            Error::InsufficientTail(m) => write!(f, "insufficient tail: {m}"),
            Error::Unreachable(m) => write!(f, "unreachable: {m}"),
            Error::QuadratureFailure { depth } => {
                write!(f, "quadrature failed to converge within depth {depth}")
            }
            Error::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
