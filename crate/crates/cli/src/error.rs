use floquet_core::error::FloquetError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] FloquetError),
    #[error("cannot parse `{input}` as {what}")]
    Parse { what: &'static str, input: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config file: {0}")]
    Config(#[from] toml::de::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn parse(what: &'static str, input: &str) -> Self {
        CliError::Parse { what, input: input.to_string() }
    }

    pub fn is_invariant(&self) -> bool {
        matches!(self, CliError::Core(FloquetError::Invariant(_)))
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
