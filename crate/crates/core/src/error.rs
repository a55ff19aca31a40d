use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A lookup fell outside the data a tabulated object covers.
    #[error("range error: {0}")]
    Range(String),

    /// An evaluation policy or run configuration is unusable.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// A text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An identity that must hold exactly was violated during evaluation.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
