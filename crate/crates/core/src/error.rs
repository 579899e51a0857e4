use std::io;
use std::path::PathBuf;

use crate::poly::DimensionError;
use crate::startsys::StartSystemError;
use crate::tracker::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("step 1 found no nonsingular finite solutions")]
    Step1Empty,
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error(transparent)]
    StartSystem(#[from] StartSystemError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl SweepError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
