use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Computation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for bad input, 2 when a valid request cannot be computed.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Computation(_) => 2,
        }
    }
}

impl From<attrisk::Error> for CliError {
    fn from(err: attrisk::Error) -> Self {
        use attrisk::Error::*;
        match err {
            InvalidParameter(_) | InvalidTable(_) | Undefined(_) => {
                CliError::Validation(err.to_string())
            }
            CapExceeded { .. } | DegenerateConditioning { .. } => {
                CliError::Computation(err.to_string())
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
