use thiserror::Error;

use crate::frenet::DegeneracyReport;
use crate::riccati::Streamline;

/// Failure to parse a field-definition string.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset} (variables: x, y, z; functions: sin, cos, tan, exp, ln, sqrt, tanh, abs)")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("exponent at byte {offset} must be constant; write exp(b*ln(a)) for a variable power")]
    NonConstantExponent { offset: usize },
    #[error("invalid number `{text}` at byte {offset}")]
    InvalidNumber { offset: usize, text: String },
    #[error("expected {expected} comma-separated components, found {found}")]
    ComponentCount { expected: usize, found: usize },
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NonConstantExponent { offset }
            | ParseError::InvalidNumber { offset, .. } => Some(*offset),
            ParseError::ComponentCount { .. } => None,
        }
    }
}

/// Evaluation outside an expression's natural domain.
#[derive(Clone, Debug, Error, PartialEq)]
#[error("domain error in `{node}`: {reason}")]
pub struct DomainError {
    pub node: String,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("degenerate frame: {0}")]
    Degenerate(DegeneracyReport),
    #[error("direction must be a unit vector (norm {norm})")]
    NonUnitDirection { norm: f64 },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("degenerate frame encountered at s = {s}: {report}")]
    DegenerateFrameEncountered {
        s: f64,
        report: DegeneracyReport,
        partial: Box<Streamline>,
    },
    #[error("step size underflow at s = {s} (h = {h:e})")]
    StepSizeUnderflow { s: f64, h: f64 },
    #[error("no valid projective chart at s = {s}")]
    NoValidChart { s: f64 },
    #[error("|Omega_b| = {omega_b:e} below floor at s = {s}")]
    OmegaBTooSmall { s: f64, omega_b: f64 },
    #[error("tracks do not share streamline samples")]
    MismatchedTracks,
    #[error("gradients are parallel at the point (|grad H1 x grad H2| = {norm:e})")]
    DegenerateGradients { norm: f64 },
    #[error("unknown system `{name}`; available: {}", available.join(", "))]
    UnknownSystem {
        name: String,
        available: Vec<String>,
    },
    #[error("catalog entry `{name}` failed its residual check: {detail}")]
    CatalogCheck { name: String, detail: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for the errors the command-line front end reports with exit code 2.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::DegenerateFrameEncountered { .. }
                | Error::OmegaBTooSmall { .. }
                | Error::DegenerateGradients { .. }
        )
    }

    pub fn degeneracy_report(&self) -> Option<&DegeneracyReport> {
        match self {
            Error::Degenerate(r) | Error::DegenerateFrameEncountered { report: r, .. } => Some(r),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
