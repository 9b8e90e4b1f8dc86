use thiserror::Error;

/// Exit status for a passing run.
pub const EXIT_OK: i32 = 0;
/// At least one property check failed.
pub const EXIT_PROPERTY: i32 = 1;
/// Bad flags, config or input data.
pub const EXIT_USAGE: i32 = 2;
/// A computation failed (divergence, non-contraction, instability, ...).
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: akns_lab::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<akns_lab::Error> for CliError {
    fn from(source: akns_lab::Error) -> Self {
        CliError::Core { context: "computation failed".into(), source }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } if source.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

/// Attaches context to core errors.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for akns_lab::Result<T> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { context: what.to_string(), source })
    }
}
