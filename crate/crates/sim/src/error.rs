use std::io;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("output error: {0}")]
    Output(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

impl SimError {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures, 1 for everything else.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            SimError::Config(_) => 2,
            SimError::Numerical(_) => 3,
            _ => 1,
        })
    }
}

impl From<gfcsa_core::Error> for SimError {
    fn from(e: gfcsa_core::Error) -> Self {
        use gfcsa_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::Parse { .. } => SimError::Config(e.to_string()),
            E::Quadrature { .. } => SimError::Numerical(e.to_string()),
            E::ProtocolViolation(_) => SimError::Internal(e.to_string()),
        }
    }
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for SimError {
    fn from(e: serde_json::Error) -> Self {
        SimError::Output(e.to_string())
    }
}
