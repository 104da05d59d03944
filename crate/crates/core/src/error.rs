use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed word: {0}")]
    MalformedWord(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("feasibility guard tripped: estimated {estimate:.3e} exceeds limit {limit:.3e} ({what})")]
    Feasibility { what: String, estimate: f64, limit: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("not fillable: {0}")]
    NotFillable(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("{kind} violation: {msg}")]
    Validation { kind: ValidationKind, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationKind {
    Euler,
    FaceLabel,
    Involution,
    Connectivity,
}

impl std::fmt::Display for ValidationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ValidationKind::Euler => "euler",
            ValidationKind::FaceLabel => "face-label",
            ValidationKind::Involution => "involution",
            ValidationKind::Connectivity => "connectivity",
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn feasibility(what: impl Into<String>, estimate: f64, limit: f64) -> Result<()> {
    if estimate > limit {
        Err(Error::Feasibility { what: what.into(), estimate, limit })
    } else {
        Ok(())
    }
}
