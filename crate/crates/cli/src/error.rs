use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Parse(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("solver: {0}")]
    Solver(#[from] varfrac::Error),

    #[error("{0} inequality violations")]
    Violations(usize),
}

impl CliError {
    pub fn config(key: impl Into<String>, reason: impl ToString) -> Self {
        Self::Config { key: key.into(), reason: reason.to_string() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    /// 2 for anything wrong with the inputs, 1 for failures during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) | Self::Config { .. } | Self::Io { .. } => 2,
            Self::Solver(_) | Self::Violations(_) => 1,
        }
    }
}

/// Attributes a core error raised while building inputs to the config key it came from.
pub(crate) fn at_key(key: &'static str) -> impl FnOnce(varfrac::Error) -> CliError {
    move |e| CliError::config(key, e)
}
