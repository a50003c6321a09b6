use std::fmt;
use std::io;

use thiserror::Error;

use crate::covering::CoveringViolation;
use crate::incremental::BatchViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A list of violations collected by a validation pass.
///
/// Validation never stops at the first problem so that callers can print
/// every violation at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport<V> {
    pub violations: Vec<V>,
}

impl<V> ValidationReport<V> {
    pub fn new(violations: Vec<V>) -> Self {
        Self { violations }
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<V: fmt::Display> fmt::Display for ValidationReport<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {}x{}, right is {}x{}", left.0, left.1, right.0, right.1)]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("invalid name `{0}`: names must be non-empty and contain no ':' or whitespace")]
    InvalidName(String),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid covering: {0}")]
    InvalidCovering(ValidationReport<CoveringViolation>),

    #[error("invalid update batch: {0}")]
    InvalidBatch(ValidationReport<BatchViolation>),

    #[error("name collision: `{0}` already exists")]
    NameCollision(String),

    #[error("state file: {0}")]
    Format(#[from] FormatError),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("incremental/non-incremental mismatch: {0}")]
    Tripwire(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Problems found while decoding a state file.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic")]
    BadMagic,
    #[error("truncated payload")]
    Truncated,
    #[error("trailing bytes after payload")]
    TrailingBytes,
    #[error("name table entry is not valid UTF-8")]
    BadUtf8,
    #[error("nonzero padding bits in {matrix} row {row}")]
    NonzeroPadding { matrix: &'static str, row: usize },
    #[error("stored {matrix} disagrees with the one derived from M at entry ({row}, {col})")]
    Derivation {
        matrix: &'static str,
        row: usize,
        col: usize,
    },
    #[error("{0}")]
    Structure(String),
}
