use std::path::PathBuf;

use pipeflow::{GeometryError, GrowthError, MeshError, PoiseuilleError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("invalid section: {0}")]
    Geometry(#[from] GeometryError),
    #[error("invalid mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("{0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) | CliError::Growth(GrowthError::StepTooCoarse { .. }) => 3,
            _ => 2,
        }
    }
}

impl From<PoiseuilleError> for CliError {
    fn from(e: PoiseuilleError) -> Self {
        match e {
            PoiseuilleError::InvalidAlpha(_)
            | PoiseuilleError::InvalidFlux(_)
            | PoiseuilleError::BadOrder
            | PoiseuilleError::EmptyGrid => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}
