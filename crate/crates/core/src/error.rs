use std::path::PathBuf;

use thiserror::Error;

use crate::tensor::Shape;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, col {col}, channel {channel}")]
    NonFinite {
        row: usize,
        col: usize,
        channel: usize,
    },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid probability map at row {row}, col {col}: {reason}")]
    InvalidProbability {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: Shape, actual: Shape },

    #[error("frame {frame}: shape {actual} differs from sequence shape {expected}")]
    ShapeDrift {
        frame: usize,
        expected: Shape,
        actual: Shape,
    },

    #[error("score map has {channels} channels but the category table has {categories} entries")]
    ChannelMismatch { channels: usize, categories: usize },

    #[error("label {label} at row {row}, col {col} is out of range for {categories} categories")]
    LabelOutOfRange {
        row: usize,
        col: usize,
        label: u8,
        categories: usize,
    },

    #[error("category {category} is out of range for {categories} categories")]
    CategoryOutOfRange { category: usize, categories: usize },

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("invalid category table: {0}")]
    InvalidCategories(String),

    #[error("frame buffer is empty")]
    EmptyBuffer,

    #[error("empty frame sequence")]
    EmptySequence,

    #[error("length mismatch: {predictions} predictions vs {truths} ground-truth masks")]
    LengthMismatch { predictions: usize, truths: usize },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips any file-context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::InFile { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Error {
        match self {
            e @ (Error::Io { .. } | Error::InFile { .. }) => e,
            e => Error::InFile {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Invalid fusion or synthesis parameters, or a malformed config file.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    MalformedLine { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },

    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error("buffer size must be at least 1")]
    ZeroBufferSize,

    #[error("weight I{index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weight I{index} is not finite")]
    NonFiniteWeight { index: usize },

    #[error("at least one weight must be positive")]
    NoPositiveWeight,

    #[error("{weights} weights given for buffer size {buffer_size}")]
    WeightsLength { buffer_size: usize, weights: usize },

    #[error("threshold must be finite and >= 0, got {0}")]
    NegativeThreshold(f64),

    #[error("unknown fusion method `{0}` (expected baseline, image_buffer or attention)")]
    UnknownMethod(String),

    #[error("synthetic config: {0}")]
    Synth(String),

    #[error("synthetic object leaves the {height}x{width} frame at frame {frame}")]
    ObjectExitsFrame {
        frame: usize,
        height: usize,
        width: usize,
    },
}

/// Malformed bytes in one of the on-disk formats.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unknown tensor kind byte {0}")]
    UnknownKind(u8),

    #[error("truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },

    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(u64),

    #[error("declared dimensions {height}x{width}x{channels} overflow the addressable size")]
    DimOverflow {
        height: u32,
        width: u32,
        channels: u32,
    },

    #[error("unsupported netpbm variant `{0}` (only binary P5 is accepted)")]
    UnsupportedPnm(String),

    #[error("PGM maxval must be 255, got {0}")]
    BadMaxval(u32),

    #[error("malformed PGM header: {0}")]
    PgmHeader(String),

    #[error("line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("metrics csv: {0}")]
    Csv(String),
}
