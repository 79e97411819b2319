//! Crate-wide error type.
//!
//! All messages are single-line so the CLI can report them verbatim.

use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum Error {
    /// A beam or trap parameter violates its invariant.
    InvalidParameter { name: &'static str, reason: String },
    /// A configuration file key is missing or malformed.
    Config { key: String, reason: String },
    /// Initial-condition rejection sampling failed to produce a state.
    UnsatisfiableSampler { attempts: u32 },
    /// Tracker states were supplied out of time order.
    OutOfOrder { previous: f64, current: f64 },
    /// A table handed to the CSV writer was malformed.
    InvalidTable(String),
    /// File I/O failure, with the offending path.
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::Config { key, reason } => write!(f, "config key `{key}`: {reason}"),
            Error::UnsatisfiableSampler { attempts } => write!(
                f,
                "initial-condition sampling unsatisfiable after {attempts} consecutive rejections"
            ),
            Error::OutOfOrder { previous, current } => write!(
                f,
                "tracker fed out-of-order states: t={current} after t={previous}"
            ),
            Error::InvalidTable(reason) => write!(f, "invalid table: {reason}"),
            Error::Io { path, source } => write!(f, "io error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
