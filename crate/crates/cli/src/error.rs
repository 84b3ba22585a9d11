use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{failed} check(s) failed: {names}")]
    Check { failed: usize, names: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Check { .. } => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        })
    }
}

impl From<dampwave::Error> for CliError {
    fn from(e: dampwave::Error) -> Self {
        use dampwave::Error as E;
        match e {
            E::Domain(_) | E::Config(_) => CliError::Config(e.to_string()),
            E::Io(m) => CliError::Io(std::io::Error::other(m)),
            E::Range(_) | E::Numerical(_) | E::Inconclusive { .. } | E::NoBlowup { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numerical(format!("report serialization: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
