use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("inadmissible space: failed conditions {0:?}")]
    Inadmissible(Vec<String>),
    #[error("case hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown id `{id}`; available: {available}")]
    UnknownId { id: String, available: String },
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn unknown_id<'a>(id: &str, available: impl IntoIterator<Item = &'a str>) -> Error {
    Error::UnknownId {
        id: id.to_string(),
        available: available.into_iter().collect::<Vec<_>>().join(", "),
    }
}

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        reason: reason.into(),
    }
}
