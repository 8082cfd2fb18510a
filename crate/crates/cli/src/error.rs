use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {field}: {message}")]
    Parse { field: String, message: String },

    #[error("{0}")]
    Io(String),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] greenp2_core::Error),
}

impl CliError {
    pub fn parse(field: &str, message: String) -> Self {
        CliError::Parse { field: field.to_string(), message }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse_error",
            CliError::Io(_) => "io_error",
            CliError::Usage(_) => "usage_error",
            CliError::Core(e) => e.code(),
        }
    }
}
