//! Command-level errors and their process exit codes.

use d2t_core::error::Error as CoreError;

/// Exit status contract: 0 success, 1 usage error, 2 data error,
/// 3 training divergence.
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_DIVERGENCE: u8 = 3;

/// Anything a subcommand can fail with.
#[derive(Debug)]
pub enum CliError {
    /// The invocation itself is wrong (flag combinations, unknown keys).
    Usage(String),
    /// The toolkit rejected the data or the computation failed.
    Core(CoreError),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(CoreError::Divergence { .. }) => EXIT_DIVERGENCE,
            CliError::Core(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
