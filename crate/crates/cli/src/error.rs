use ibl_core::IblError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("invalid datum: {0}")]
    Validation(IblError),
    #[error("{module}: {source}")]
    Tolerance { module: &'static str, source: IblError },
}

impl CliError {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        CliError::Parse { line, msg: msg.into() }
    }

    /// Errors raised while running `module`: tolerance breaches exit with 3,
    /// everything else counts as invalid input.
    pub fn from_core(module: &'static str, e: IblError) -> Self {
        match e {
            IblError::Tolerance { .. } => CliError::Tolerance { module, source: e },
            other => CliError::Validation(other),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
