use thiserror::Error;

use crate::diagram::Ambient;

/// Gauss-code syntax errors. Positions are zero-based token indices.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed token {token:?} at position {position}")]
    MalformedToken { position: usize, token: String },
    #[error("arrow {id} has a second {kind} endpoint at position {position}")]
    DuplicateEndpoint {
        position: usize,
        id: String,
        kind: char,
    },
    #[error("arrow {id} occurs only once (position {position})")]
    UnpairedEndpoint { position: usize, id: String },
    #[error("sign of arrow {id} disagrees with its first occurrence at position {position}")]
    SignMismatch { position: usize, id: String },
    #[error("mark of arrow {id} disagrees with its first occurrence at position {position}")]
    MarkMismatch { position: usize, id: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::MalformedToken { position, .. }
            | ParseError::DuplicateEndpoint { position, .. }
            | ParseError::UnpairedEndpoint { position, .. }
            | ParseError::SignMismatch { position, .. }
            | ParseError::MarkMismatch { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("arrow {arrow} out of range for a diagram with {count} arrows")]
    UnknownArrow { arrow: usize, count: usize },
    #[error("an arrow is not linked with itself (arrow {0})")]
    SameArrow(usize),
    #[error("{operation} requires a {expected:?} diagram")]
    WrongAmbient {
        operation: &'static str,
        expected: Ambient,
    },
    #[error("{0} requires a non-empty diagram")]
    EmptyDiagram(&'static str),
    #[error("ambient mismatch between formal sums")]
    AmbientMismatch,
    #[error("marked and unmarked formal sums cannot be paired")]
    DecorationMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unknown formula {0:?}")]
    UnknownFormula(String),
    #[error("support violates quotient bounds: {0}")]
    QuotientViolation(String),
    #[error("formula is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("system is infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::InvalidDiagram(_) => "invalid_diagram",
            Error::UnknownArrow { .. } => "unknown_arrow",
            Error::SameArrow(_) => "same_arrow",
            Error::WrongAmbient { .. } => "wrong_ambient",
            Error::EmptyDiagram(_) => "empty_diagram",
            Error::AmbientMismatch => "ambient_mismatch",
            Error::DecorationMismatch => "decoration_mismatch",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidParameters(_) => "invalid_parameters",
            Error::UnknownFormula(_) => "unknown_formula",
            Error::QuotientViolation(_) => "quotient_violation",
            Error::NotHomogeneous(_) => "not_homogeneous",
            Error::Infeasible(_) => "infeasible",
        }
    }
}
