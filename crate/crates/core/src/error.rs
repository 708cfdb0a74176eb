use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty complex not permitted")]
    EmptyComplex,
    #[error("empty simplex not permitted")]
    EmptySimplex,
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Vec<usize>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vertex {0} has no assigned value")]
    MissingVertex(usize),
    #[error("vertex sets differ")]
    VertexSetMismatch,
    #[error("direction is not a unit vector (norm {0})")]
    NotUnitDirection(f64),
    #[error("coordinate or value is not finite")]
    NonFinite,
    #[error("filtration not simplex-wise monotone")]
    NotMonotone,
    #[error("vertex function must be strictly positive (vertex {vertex} has value {value})")]
    NonPositivePhi { vertex: usize, value: f64 },
    #[error("integration window must be positive, got {0}")]
    InvalidWindow(f64),
    #[error("Wasserstein exponent p must be at least 1, got {0}")]
    InvalidExponent(f64),
    #[error("ground norm q must be at least 1, got {0}")]
    InvalidGroundNorm(f64),
    #[error("persistence {0} exceeds the supported range")]
    PersistenceOverflow(f64),
    #[error("brute-force matching supports at most {cap} points, got {found}")]
    BruteForceCap { cap: usize, found: usize },
    #[error("invalid direction scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid instance parameters: {0}")]
    InvalidParams(String),
    #[error("embedding not found: {0}")]
    EmbeddingNotFound(String),
    #[error("vertex function not found: {0}")]
    PhiNotFound(String),
    #[error("{context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
