use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or config.
    #[error("{0}")]
    Usage(String),
    /// Missing or unreadable input data.
    #[error("{0}")]
    Input(String),
    /// A computation failed on valid input.
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) | CliError::Input(_) => 2,
        }
    }

    pub fn compute(err: impl std::fmt::Display) -> Self {
        CliError::Compute(err.to_string())
    }
}
