//! Error type shared across the crate.

use std::fmt;
use std::io;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while reading corpora, detecting
/// duplicates, or computing statistics.
#[derive(Debug)]
pub enum Error {
    /// Underlying I/O failure.
    Io(io::Error),
    /// A malformed JSONL record (bad JSON, missing key, wrong type,
    /// unknown fold label, non-finite metric value). `line` is 1-based.
    Parse { line: usize, message: String },
    /// The same id appeared twice where ids must be unique.
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },
    /// A cluster file violated its structural invariants
    /// (overlapping groups, groups with fewer than two members, bad JSON).
    InvalidClusters(String),
    /// Source text could not be tokenized. Positions are 1-based.
    Lex {
        line: usize,
        column: usize,
        message: String,
    },
    /// A duplication report violated its invariants (e.g. a group member
    /// outside the universe).
    InvalidReport(String),
    /// A parameter or configuration value outside its legal range,
    /// or an operation applied to an input it is undefined for.
    InvalidParams(String),
    /// Ids present on one side of a join but not the other
    /// (metrics vs. report universe, split vs. universe).
    IdMismatch {
        context: &'static str,
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
            Error::DuplicateId {
                id,
                first_line,
                second_line,
            } => write!(
                f,
                "duplicate id {id:?} on lines {first_line} and {second_line}"
            ),
            Error::InvalidClusters(msg) => write!(f, "invalid cluster file: {msg}"),
            Error::Lex {
                line,
                column,
                message,
            } => write!(f, "lex error at {line}:{column}: {message}"),
            Error::InvalidReport(msg) => write!(f, "invalid duplication report: {msg}"),
            Error::InvalidParams(msg) => write!(f, "{msg}"),
            Error::IdMismatch {
                context,
                missing,
                unexpected,
            } => {
                write!(f, "id mismatch in {context}:")?;
                if !missing.is_empty() {
                    write!(f, " missing {}", sample(missing))?;
                }
                if !unexpected.is_empty() {
                    write!(f, " unexpected {}", sample(unexpected))?;
                }
                Ok(())
            }
        }
    }
}

// At most ten offenders per side, so a mismatch on a large corpus
// stays readable.
fn sample(ids: &[String]) -> String {
    let shown: Vec<&str> = ids.iter().take(10).map(String::as_str).collect();
    if ids.len() > 10 {
        format!("[{} … +{} more]", shown.join(", "), ids.len() - 10)
    } else {
        format!("[{}]", shown.join(", "))
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e)
    }
}
