use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot read manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] fracwiener::Error),
}

impl CliError {
    /// 2 for usage, configuration and I/O problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use fracwiener::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Manifest { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Core(e) => match e {
                E::InvalidParameter { .. } | E::UnsupportedDimension(_) | E::WrongBasis { .. } | E::TooFewSamples { .. } => 2,
                _ => 3,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
