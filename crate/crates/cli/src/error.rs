use std::fmt;
use std::path::{Path, PathBuf};

use shadowtrack_core::Error as CoreError;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing required paths or invalid parameters.
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed input. `location` is a line number or byte offset.
    Format { path: PathBuf, location: Option<String>, message: String },
    Core(CoreError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, location: Option<String>, message: impl Into<String>) -> Self {
        CliError::Format { path: path.to_path_buf(), location, message: message.into() }
    }

    /// 1 usage, 2 data or format, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(CoreError::InvalidParameter { .. }) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Format { path, location: Some(at), message } => write!(f, "{}: {at}: {message}", path.display()),
            CliError::Format { path, location: None, message } => write!(f, "{}: {message}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            CliError::Core(e) => Some(e),
            _ => None,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}
