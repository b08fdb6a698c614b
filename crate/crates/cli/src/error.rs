use std::fmt;
use std::path::{Path, PathBuf};

/// Front-end failures, each mapped to a process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid config or input data (exit 2).
    Config(String),
    /// Numerical failure inside the pipeline (exit 3).
    Numerical(locapart_core::error::Error),
    /// File system failure (exit 4).
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<locapart_core::error::Error> for CliError {
    fn from(e: locapart_core::error::Error) -> Self {
        if e.is_validation() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e)
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure in {}: {e}", e.module()),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}
