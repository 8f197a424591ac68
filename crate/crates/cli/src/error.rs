use thiserror::Error;

/// Failures of a CLI verb, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or unreadable configuration, or an unusable output path (exit 1).
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical method failed (exit 2).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<gapdecay_core::Error> for CliError {
    fn from(e: gapdecay_core::Error) -> Self {
        use gapdecay_core::Error as E;
        match e {
            E::InvalidConfig { .. } | E::Parse(_) | E::InvalidGrid(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("json: {e}"))
    }
}
