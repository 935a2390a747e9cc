use std::path::PathBuf;
use std::process::ExitCode;

use pbs_core::PbsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(PbsError),
}

impl From<PbsError> for CliError {
    fn from(e: PbsError) -> Self {
        match e {
            PbsError::InvalidParameter { .. } => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    /// 2 for usage errors (as for argument parsing), 1 otherwise.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}
