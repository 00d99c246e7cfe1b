use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: mwbunch::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] mwbunch::Error),
}

impl CliError {
    /// 2 usage/config, 3 input schema, 4 estimation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use mwbunch::Error as E;
        let core = match self {
            CliError::Usage(_) => return 2,
            CliError::Io { .. } => return 1,
            CliError::Read { source, .. } | CliError::Core(source) => source,
        };
        match core {
            E::Config(_) => 2,
            E::Schema { .. } | E::InvalidRecord(_) | E::Csv(_) => 3,
            E::Estimation(_) => 4,
            E::Io(_) | E::Internal(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
