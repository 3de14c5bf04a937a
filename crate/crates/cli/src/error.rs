use std::path::PathBuf;

use thiserror::Error;

/// Failure of a CLI run; each variant maps onto a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("tolerance failure: {0}")]
    Tolerance(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("non-finite value in column `{column}` at {point}")]
    NonFinite { column: String, point: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: tavis_core::Error,
    },

    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 config error, 2 tolerance failure, 3 internal error.
    pub fn exit_code(&self) -> i32 {
        use tavis_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Input { .. } => 1,
            CliError::Tolerance(_) => 2,
            CliError::Core { source, .. } => match source {
                E::InvalidParameter(_)
                | E::ZeroDetuning
                | E::CutoffLimit { .. }
                | E::InvalidSpace(_)
                | E::DimensionLimit { .. } => 1,
                _ => 3,
            },
            CliError::Internal(_) | CliError::NonFinite { .. } | CliError::Output { .. } => 3,
        }
    }

    pub fn core(context: impl Into<String>) -> impl FnOnce(tavis_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
