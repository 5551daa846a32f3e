use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("experiment error: {0}")]
    Experiment(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Experiment(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<unibreak_core::Error> for CliError {
    fn from(e: unibreak_core::Error) -> Self {
        use unibreak_core::Error as E;
        match e {
            E::InvalidArgument { .. } | E::InvalidModel(_) | E::SizeLimit { .. } => CliError::Config(e.to_string()),
            other => CliError::Experiment(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
