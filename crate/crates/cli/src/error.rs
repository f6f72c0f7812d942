use grazing_core::error::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// A config key or flag with an unparsable or out-of-range value.
    #[error("invalid value for `{key}`: {reason}")]
    Value { key: String, reason: String },

    #[error("config file {path}: line {line}: {reason}")]
    ConfigFile {
        path: String,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Lab(#[from] LabError),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn value(key: &str, reason: impl Into<String>) -> Self {
        CliError::Value {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// Short tag for the machine-readable status line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Value { .. } | CliError::ConfigFile { .. } => "config",
            CliError::Lab(LabError::InvalidParameter { .. }) => "parameter",
            CliError::Lab(LabError::Resource(_)) => "resource",
            CliError::Lab(_) => "compute",
            CliError::Io { .. } => "io",
        }
    }
}
