use std::process::ExitCode;

use thiserror::Error;

/// Exit status contract: 0 success, 1 check failure or runtime error,
/// 2 usage or configuration error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] pursuit_core::Error),

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use pursuit_core::Error as E;
        let code = match self {
            Self::Usage(_) => 2,
            Self::Core(
                E::Domain { .. }
                | E::TooFewActions(_)
                | E::TiedMaximum
                | E::NoReplicates
                | E::Config(_),
            ) => 2,
            _ => 1,
        };
        ExitCode::from(code)
    }
}
