use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input: bad config key, value out of range, malformed override.
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Arguments outside the domain of a formula.
    #[error("{op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A numerical routine failed to produce a trustworthy answer.
    #[error("{op}: numerical failure: {reason}")]
    Numerical { op: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn numerical(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Numerical {
            op,
            reason: reason.into(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
