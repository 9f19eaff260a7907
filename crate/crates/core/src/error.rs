use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping used by front ends to pick a stable exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Data,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("malformed record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("cloud is empty after quality control")]
    EmptyCloud,

    #[error("scan holds {scan_points} points but label file holds {labels} labels")]
    SizeMismatch { scan_points: usize, labels: usize },

    #[error("{}: size {len} bytes is not a multiple of the {record}-byte record", path.display())]
    TruncatedFile {
        path: PathBuf,
        len: u64,
        record: usize,
    },

    #[error("semantic id {value} at point {index} is outside the unified schema")]
    UnknownClassId { value: u32, index: usize },

    #[error("class id {0} is outside 0..=19")]
    InvalidClassId(u32),

    #[error("invalid sequence id {0:?}")]
    InvalidSequenceId(String),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("conflicting rule for key {key:?}: line {first_line} maps to {first_target}, line {second_line} maps to {second_target}")]
    ConflictingRule {
        key: String,
        first_line: usize,
        first_target: u16,
        second_line: usize,
        second_target: u16,
    },

    #[error("invalid target id {value:?} at line {line}")]
    InvalidTargetId { line: usize, value: String },

    #[error("malformed csv at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },

    #[error("sequence {0} is already populated")]
    DuplicateSequence(String),

    #[error("sequence {0} does not exist")]
    MissingSequence(String),

    #[error("points span zero area in the XY plane")]
    DegenerateFootprint,

    #[error("need at least {needed} points, got {actual}")]
    TooFewPoints { needed: usize, actual: usize },

    #[error("class id {value} at position {index} is outside 0..=19")]
    ClassOutOfRange { value: u32, index: usize },

    #[error("no class has a defined metric")]
    NoDefinedClasses,

    #[error("missing prediction file {}", .0.display())]
    MissingPrediction(PathBuf),

    #[error("sequence {0} appears in more than one partition")]
    OverlappingSplit(String),

    #[error("malformed training config at line {line}: {message}")]
    MalformedConfig { line: usize, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn family(&self) -> ErrorFamily {
        match self {
            Error::Io { .. } => ErrorFamily::Io,
            _ => ErrorFamily::Data,
        }
    }
}

/// Attaches a path to raw `io::Error`s.
pub(crate) trait IoContext<T> {
    fn at(self, path: &std::path::Path) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: &std::path::Path) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
