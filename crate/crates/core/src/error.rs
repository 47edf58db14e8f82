use thiserror::Error;

/// Errors raised by the library. Monitors and validations that are
/// report-valued never use this type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ambient dimension {found} not supported here (expected {expected})")]
    Dimension { expected: usize, found: usize },

    #[error("requested time {requested} is outside the recorded history [{start}, {end}]")]
    InsufficientHistory { requested: f64, start: f64, end: f64 },

    #[error("sphere is not transversal to the network ({reason}); retry with the centre shifted by {suggested_shift:?}")]
    NonTransversal {
        reason: String,
        suggested_shift: Vec<f64>,
    },

    #[error("network is not orientable: odd cycle through edges {witness:?}")]
    NonOrientable { witness: Vec<usize> },

    #[error("surface mesh inverted near sheet {sheet}, column {column}, row {row}")]
    MeshInversion {
        sheet: usize,
        column: usize,
        row: usize,
    },

    #[error("root finding did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid network after edit: {0}")]
    InvalidNetwork(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
