use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    Validation(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// No layout or subgraph satisfied the constraints within the trial budget.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A backend limit was hit (dense qubit cap, weight overflow, ...).
    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("no shot survived postselection (zero Hamming-weight-1 bitstrings)")]
    EmptyPostselection,

    #[error("estimate undefined: shot table contains no set bits")]
    UndefinedEstimate,

    #[error("distribution is not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("baseline fidelity equals 1; baseline correction is undefined")]
    DegenerateBaseline,

    #[error("empty step range [{0}, {1}]")]
    EmptyRange(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse error category, used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Infeasible,
    Capability,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::UnknownNode(_)
            | Error::InvalidParameter(_)
            | Error::NotNormalized(_)
            | Error::DegenerateBaseline
            | Error::EmptyRange(..)
            | Error::Json(_) => ErrorKind::Validation,
            Error::Infeasible(_) => ErrorKind::Infeasible,
            Error::Capability(_) | Error::EmptyPostselection | Error::UndefinedEstimate => {
                ErrorKind::Capability
            }
            Error::Io(_) => ErrorKind::Io,
        }
    }
}
