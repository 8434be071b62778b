//! Front-end plumbing for the `wnoma` binary: flat-key config files,
//! scenario presets, CSV emission and run manifests.

pub mod config;
pub mod output;
pub mod presets;

/// Stable process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// Front-end error split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag, key or value (exit code 2). The message names the key.
    Config(String),
    /// Filesystem failure (exit code 3).
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<wnoma_core::Error> for CliError {
    fn from(e: wnoma_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}
