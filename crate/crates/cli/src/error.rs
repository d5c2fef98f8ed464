use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Integrate(#[from] hamfam_core::IntegrateError),
    #[error(transparent)]
    Symmetry(#[from] hamfam_core::SymmetryError),
    #[error(transparent)]
    Verify(#[from] hamfam_core::verify::VerifyError),
    #[error(transparent)]
    Hamiltonian(#[from] hamfam_core::HamiltonianError),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(2)
    }
}
