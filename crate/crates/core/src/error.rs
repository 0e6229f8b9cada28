use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A size bound on an exhaustive computation was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A construction ran out of vertices or search nodes before finishing.
    #[error("budget exhausted: {0}")]
    Budget(String),
    /// A construction produced something that violates a required property.
    #[error("logical failure: {0}")]
    Logical(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }

    pub fn logical(msg: impl Into<String>) -> Self {
        Error::Logical(msg.into())
    }

    /// Prefixes the message with the stage that failed.
    pub fn context(self, ctx: &str) -> Self {
        match self {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{ctx}: {m}")),
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{ctx}: {msg}"),
            },
            Error::Resource(m) => Error::Resource(format!("{ctx}: {m}")),
            Error::Budget(m) => Error::Budget(format!("{ctx}: {m}")),
            Error::Logical(m) => Error::Logical(format!("{ctx}: {m}")),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }

    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Logical(_) => 1,
            Error::Budget(_) | Error::Resource(_) => 2,
            Error::InvalidInput(_) | Error::Parse { .. } => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
