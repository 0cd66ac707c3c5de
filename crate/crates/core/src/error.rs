use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the motion-estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("malformed header token `{token}`: {reason}")]
    Header { token: String, reason: String },

    #[error("truncated payload in frame {frame}: expected {expected} bytes, got {got}")]
    TruncatedFrame {
        frame: usize,
        expected: usize,
        got: usize,
    },

    #[error("trailing partial frame: {remaining} bytes left over (frame size {frame_size})")]
    PartialFrame { remaining: usize, frame_size: usize },

    #[error("no complete frames in {0}")]
    NoFrames(PathBuf),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("block index {index} out of range for {count} blocks")]
    BlockIndex { index: usize, count: usize },

    #[error("displaced block at ({x}, {y}) size {size} lies outside {width}x{height} frame")]
    OutOfBounds {
        x: i64,
        y: i64,
        size: usize,
        width: usize,
        height: usize,
    },

    #[error("block size mismatch: {0} vs {1} samples")]
    BlockSizeMismatch(usize, usize),

    #[error("unknown algorithm `{0}` (expected es, ds, arps or pso-zmp)")]
    UnknownAlgorithm(String),

    #[error("unknown initialization pattern `{0}`")]
    UnknownPattern(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no ZMP threshold known for `{0}`; pass --zmp-threshold")]
    UnresolvedThreshold(String),

    #[error("motion field parse error on line {line}: {reason}")]
    MvfParse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Coarse classification used by the CLI for its exit code.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Config(_) | Error::UnresolvedThreshold(_) | Error::UnknownAlgorithm(_) => {
                ErrorKind::Usage
            }
            _ => ErrorKind::DataFormat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Io,
    DataFormat,
}

pub type Result<T> = std::result::Result<T, Error>;
