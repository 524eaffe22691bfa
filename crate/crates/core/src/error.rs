use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// A configuration field failed validation; `field` is the key name as it
    /// appears in the config file.
    #[error("invalid value for `{field}`: {message}")]
    ConfigField { field: String, message: String },

    #[error("photon cap exceeded: {photons} photons requested, cap is {cap}")]
    Capacity { photons: usize, cap: usize },

    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigField {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user configuration rather than by the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfiguration(_) | Error::ConfigField { .. }
        )
    }
}
