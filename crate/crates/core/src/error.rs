use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument outside the domain of a model formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value that violates a field invariant.
    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("unknown configuration key `{key}`{}", suggestion_suffix(.suggestion))]
    UnknownKey {
        key: String,
        suggestion: Option<String>,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("refusing to overwrite existing file {} (pass --force)", .0.display())]
    WouldOverwrite(PathBuf),

    #[error("trace of {len} transmissions exceeds the oracle limit of {limit}")]
    TraceTooLarge { len: usize, limit: usize },

    #[error("airtime overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn suggestion_suffix(suggestion: &Option<String>) -> String {
    match suggestion {
        Some(s) => format!(" (did you mean `{s}`?)"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user configuration rather than I/O.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidField { .. }
                | Error::UnknownKey { .. }
                | Error::Parse(_)
                | Error::UnknownPreset(_)
        )
    }
}
