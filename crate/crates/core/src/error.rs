use thiserror::Error;

use crate::gates::GateKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gate {gate} expects {expected} parameter(s), got {got}")]
    ParameterArity {
        gate: GateKind,
        expected: usize,
        got: usize,
    },

    #[error("unknown compilation target `{0}`")]
    UnknownTarget(String),

    #[error("width {width} exceeds the {limit}-qubit limit of {what}")]
    Capacity {
        what: &'static str,
        width: usize,
        limit: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("profile error: {0}")]
    Profile(String),

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("incompatible series: {0}")]
    IncompatibleSeries(String),

    #[error("no data: {0}")]
    NoData(String),

    #[error("suite aborted: {0}")]
    Aborted(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("I/O error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
