use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("variable `{variable}` is unbound in the assignment")]
    Unbound { variable: String },

    #[error("value {value} is outside the domain of `{variable}` (size {size})")]
    OutOfDomain {
        variable: String,
        value: u32,
        size: u32,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("rules {first} and {second} of action `{action}` assign different values to `{variable}`")]
    Conflict {
        action: String,
        first: usize,
        second: usize,
        variable: String,
    },

    #[error("invalid {family} parameters: {reason}")]
    Parameter { family: String, reason: String },

    #[error("perception variable `{variable}` has no conditional for key {key:?}")]
    UndefinedConditional { variable: String, key: Vec<u32> },

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("environment: {0}")]
    Environment(String),

    #[error("configuration invalid: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("trace schema: {0}")]
    Schema(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
