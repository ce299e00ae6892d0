use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph file: {0}")]
    Format(String),

    #[error("conductance of an empty vertex set is undefined")]
    EmptySet,

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: u64, n: u64 },

    #[error("invalid parameter `{field}`: {message}")]
    InvalidParam { field: &'static str, message: String },

    #[error("empty sweep input: no vertex has positive mass and positive degree")]
    EmptySweep,

    #[error("pushed volume {pushed_volume} exceeds the 1/(alpha*epsilon) bound {bound}")]
    WorkBoundExceeded { pushed_volume: u64, bound: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            message: message.into(),
        }
    }

    /// Name of the offending request field, when the error is attributable to one.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            Error::InvalidParam { field, .. } => Some(field),
            Error::VertexOutOfRange { .. } => Some("seed"),
            _ => None,
        }
    }
}
