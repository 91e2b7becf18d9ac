use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A field failed its bounds or shape check.
    #[error("invalid `{field}` in {subject}: {reason}")]
    Invalid {
        subject: String,
        field: &'static str,
        reason: String,
    },

    #[error("duplicate {what} `{key}`")]
    Duplicate { what: &'static str, key: String },

    #[error("unknown {what} `{name}`{context}")]
    Unknown {
        what: &'static str,
        name: String,
        context: String,
    },

    /// Malformed input text. Line and column are 1-based; 0 means unknown.
    #[error("parse error in {source_name} at line {line}, column {column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported schema_version {found} in {source_name} (expected {expected})")]
    SchemaVersion {
        source_name: String,
        found: u32,
        expected: u32,
    },

    #[error("catalog is not monotone, pruning would be unsound: slot `{slot}` option `{option}`: {reason}")]
    NonMonotone {
        slot: String,
        option: String,
        reason: String,
    },

    #[error("exact enumeration refused: system has {total_nodes} nodes, bound is {bound}")]
    EnumerationBound { total_nodes: usize, bound: usize },

    #[error("cannot merge records with different keys: `{left}` vs `{right}`")]
    KeyMismatch { left: String, right: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(subject: impl Into<String>, field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            subject: subject.into(),
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn from_json(source_name: &str, err: serde_json::Error) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// True for errors caused by unreadable or malformed input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::SchemaVersion { .. } | Error::Io { .. }
        )
    }
}
