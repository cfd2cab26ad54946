//! Error type shared by every module.
//!
//! Errors fall into two families: validation errors (bad input, violated
//! preconditions) and numerical failures (a computation that could not be
//! carried out or certified). Front ends map them to distinct exit codes.

use serde::Serialize;
use thiserror::Error;

/// Coarse classification used by front ends to choose an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Input or precondition violation.
    Validation,
    /// A computation failed or could not be certified.
    Numerical,
}

/// Every failure the library can report.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum BubbleError {
    /// A named input field violates its admissibility condition.
    #[error("{field}: {message}")]
    InvalidField { field: String, message: String },

    /// A required key is absent from a configuration block.
    #[error("missing key \"{0}\"")]
    MissingKey(String),

    /// A configuration document could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The state is not a point of the equilibrium manifold.
    #[error("state not on equilibrium manifold: {0}")]
    NotOnManifold(String),

    /// A state left the region in which the perturbative model is trusted.
    #[error("state left validity region: {0}")]
    ValidityRegion(String),

    /// Internal inconsistency that the mathematics rules out.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    /// A linear system was singular or numerically singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// Time stepping could not proceed.
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    /// An evaluation point is too close to a pole.
    #[error("pole proximity: {0}")]
    Pole(String),

    /// A root search left a cell unresolved.
    #[error("unresolved cell: {0}")]
    Unresolved(String),

    /// Any other numerical failure.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Filesystem or serialisation failure.
    #[error("io error: {0}")]
    Io(String),
}

impl BubbleError {
    /// Convenience constructor for [`BubbleError::InvalidField`].
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        BubbleError::InvalidField {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Which family this error belongs to.
    pub fn kind(&self) -> ErrorKind {
        match self {
            BubbleError::InvalidField { .. }
            | BubbleError::MissingKey(_)
            | BubbleError::Parse(_)
            | BubbleError::Precondition(_)
            | BubbleError::NotOnManifold(_)
            | BubbleError::Io(_) => ErrorKind::Validation,
            BubbleError::ValidityRegion(_)
            | BubbleError::Inconsistent(_)
            | BubbleError::Singular(_)
            | BubbleError::StepUnderflow { .. }
            | BubbleError::Pole(_)
            | BubbleError::Unresolved(_)
            | BubbleError::Numerical(_) => ErrorKind::Numerical,
        }
    }

    /// Short machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            BubbleError::InvalidField { .. } => "invalid_field",
            BubbleError::MissingKey(_) => "missing_key",
            BubbleError::Parse(_) => "parse",
            BubbleError::Precondition(_) => "precondition",
            BubbleError::NotOnManifold(_) => "not_on_manifold",
            BubbleError::ValidityRegion(_) => "validity_region",
            BubbleError::Inconsistent(_) => "inconsistent",
            BubbleError::Singular(_) => "singular",
            BubbleError::StepUnderflow { .. } => "step_underflow",
            BubbleError::Pole(_) => "pole",
            BubbleError::Unresolved(_) => "unresolved",
            BubbleError::Numerical(_) => "numerical",
            BubbleError::Io(_) => "io",
        }
    }

    /// Machine-readable JSON description of the error.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "error": self.code(),
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            BubbleError::InvalidField { field, .. } => v["field"] = field.clone().into(),
            BubbleError::MissingKey(key) => v["key"] = key.clone().into(),
            _ => {}
        }
        v
    }
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, BubbleError>;
