use std::path::PathBuf;

use qgld_core::error::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    /// 2 for bad input or I/O, 3 when the numerics give up.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Io { .. } => 2,
            Self::Core(e) => match e {
                CoreError::SingularMatrix { .. }
                | CoreError::NotPositiveSemidefinite { .. }
                | CoreError::RankDeficientBlock { .. }
                | CoreError::DegenerateEigenvalue { .. }
                | CoreError::ProbabilityOutOfRange { .. }
                | CoreError::FlatDistribution { .. }
                | CoreError::NearZeroEigenvalue { .. }
                | CoreError::UnconvergedEigenpair { .. }
                | CoreError::IllConditioned { .. } => 3,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
