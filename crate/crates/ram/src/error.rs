use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shape mismatch between tensors or layers; names both shapes.
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: String,
        got: String,
    },

    /// An operation was called in an invalid order (e.g. backward before forward).
    #[error("invalid state: {0}")]
    State(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data is malformed or out of range.
    #[error("bad data: {0}")]
    Data(String),

    /// A binary file did not parse; reports the byte offset of the problem.
    #[error("format error in {path} at byte {offset}: {message}")]
    Format {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    /// An environment was driven outside its episode protocol.
    #[error("protocol violation: {0}")]
    Protocol(String),

    /// A gradient or loss became non-finite; names the parameter block.
    #[error("non-finite value in parameter block `{block}`: optimizer step aborted")]
    NonFinite { block: String },

    /// A checkpoint does not match the model it is being loaded into.
    #[error("checkpoint incompatible: {0}")]
    Compatibility(String),

    /// Hyperparameter search failed to produce any usable trial.
    #[error("search failed: {0}")]
    Search(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
