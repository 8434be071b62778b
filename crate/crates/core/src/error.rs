//! Error type shared by all modules.

use std::fmt;

/// Errors surfaced by the library. Every constructor rejects bad input with
/// one of these instead of panicking, so callers (in particular the CLI) can
/// map them onto stable exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A length/shape precondition was violated (divisibility, mismatch, ...).
    Length(String),
    /// A configuration value is out of its documented domain.
    Config(String),
    /// A matrix was too ill-conditioned to invert.
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Length(msg) => write!(f, "length error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Singular(msg) => write!(f, "singular matrix: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
