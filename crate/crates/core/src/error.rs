use thiserror::Error;

use crate::events::Event;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("events belong to different algebras")]
    AlgebraMismatch,
    #[error("structural error: {0}")]
    Structural(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("ordering precondition fails on event {event}: {detail}")]
    Ordering { event: Event, detail: String },
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("underdetermined: {0}")]
    Underdetermined(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AlgebraMismatch => "algebra-mismatch",
            Error::Structural(_) => "structural",
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Malformed(_) => "malformed",
            Error::Precondition(_) => "precondition",
            Error::Ordering { .. } => "ordering",
            Error::Degenerate(_) => "degenerate",
            Error::Underdetermined(_) => "underdetermined",
        }
    }
}
