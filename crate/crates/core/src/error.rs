use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid scenario field `{field}`: {detail}")]
    InvalidScenario { field: &'static str, detail: String },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("scenario generation failed for index {index}: {detail}")]
    Generation { index: usize, detail: String },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid configuration `{field}`: {detail}")]
    InvalidConfig { field: &'static str, detail: String },
    #[error("scenario `{0}` is infeasible")]
    Infeasible(String),
    #[error("path leaves the map bounds at vertex {0}")]
    OutOfBounds(usize),
    #[error("path endpoints do not match: {0}")]
    EndpointMismatch(String),
    #[error("scenario/path mismatch: {0}")]
    Mismatch(String),
    #[error("training aborted: {0}")]
    TrainingAborted(String),
}
