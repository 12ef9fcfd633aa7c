use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {key}: {message}")]
    Config { key: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(#[from] calogero::Error),

    #[error("numerical failure: {0}")]
    Result(String),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        Self::Config { key: key.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } | Self::Output(_) => 2,
            Self::Numerical(_) | Self::Result(_) => 3,
        }
    }
}
