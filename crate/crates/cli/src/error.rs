use std::process::ExitCode;

use mlwalk_certify::CertError;
use mlwalk_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("statistical test failed: {0}")]
    Statistical(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Statistical(_) => 2,
            CliError::Certification(_) => 3,
        })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(e) => CliError::Io(e),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<CertError> for CliError {
    fn from(e: CertError) -> Self {
        match e {
            CertError::PsiDomain(_) | CertError::NoCertifyingN(_) | CertError::DenominatorVanished(_) => {
                CliError::Certification(e.to_string())
            }
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
