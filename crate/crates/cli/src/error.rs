use std::path::{Path, PathBuf};

use hbdm_core::equivariance::EquivarianceError;
use hbdm_core::geometry::GeometryError;
use hbdm_core::guidance::GuidanceError;
use hbdm_core::integrator::IntegratorError;
use hbdm_core::slater::SlaterError;
use hbdm_core::wavefunction::WavefunctionError;
use thiserror::Error;

fn location(path: &Option<PathBuf>) -> String {
    path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default()
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}{message}", location(path))]
    Parse { path: Option<PathBuf>, message: String },
    #[error("{}invalid field `{field}`: {message}", location(path))]
    Invalid {
        path: Option<PathBuf>,
        field: String,
        message: String,
    },
}

impl ConfigError {
    pub(crate) fn at(self, file: &Path) -> Self {
        match self {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: Some(file.to_path_buf()),
                message,
            },
            ConfigError::Invalid { field, message, .. } => ConfigError::Invalid {
                path: Some(file.to_path_buf()),
                field,
                message,
            },
            other => other,
        }
    }

    pub(crate) fn field(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: None,
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
    #[error("E10 geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("E11 wave function: {0}")]
    Wavefunction(#[from] WavefunctionError),
    #[error("E12 guidance: {0}")]
    Guidance(#[from] GuidanceError),
    #[error("E13 integrator: {0}")]
    Integrator(#[from] IntegratorError),
    #[error("E14 equivariance: {0}")]
    Equivariance(#[from] EquivarianceError),
    #[error("E15 slater: {0}")]
    Slater(#[from] SlaterError),
    #[error("cannot configure worker threads: {0}")]
    Threads(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Output { .. } | CliError::Threads(_) => 3,
            CliError::Geometry(_) => 10,
            CliError::Wavefunction(_) => 11,
            CliError::Guidance(_) => 12,
            CliError::Integrator(_) => 13,
            CliError::Equivariance(_) => 14,
            CliError::Slater(_) => 15,
        }
    }
}
