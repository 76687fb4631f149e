use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: expected a single-channel 8-bit label image, found {found}")]
    NotLabelImage { path: PathBuf, found: String },

    #[error("segmentation map has zero size ({width}x{height})")]
    EmptyMap { width: usize, height: usize },

    #[error("label grid has {actual} entries, expected {expected}")]
    GridSize { expected: usize, actual: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("failed to parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("raw label id {0} is assigned more than once")]
    DuplicateLabel(u8),

    #[error("structuring element side must be odd and >= 1, got {0}")]
    EvenKernel(usize),

    #[error("descriptor length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("expected {expected} layer descriptors, got {actual}")]
    LayerCount { expected: usize, actual: usize },

    #[error("layer descriptor at position {position} has index {index}")]
    LayerOrder { position: usize, index: usize },

    #[error("descriptor fingerprints differ ({left:016x} vs {right:016x}); databases were built with different parameters")]
    FingerprintMismatch { left: u64, right: u64 },

    #[error("descriptor database is empty")]
    EmptyDatabase,

    #[error("malformed descriptor database: {0}")]
    Database(String),

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
