use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or out-of-range input.
    Input,
    /// A configured budget (enumeration, BFS states, region) was exhausted.
    Resource,
    /// An operation was applied outside its domain, e.g. non-composable arrows.
    Domain,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} is outside the alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: u8, alphabet_size: u8 },

    #[error("{what} budget of {budget} exceeded")]
    BudgetExceeded { what: &'static str, budget: u64 },

    #[error(
        "ball budget of {budget} states exceeded after completing radius {completed_radius}"
    )]
    BallBudgetExceeded {
        budget: u64,
        completed_radius: usize,
        sizes: Vec<u64>,
    },

    #[error("{table} table covers 0..={available}, but {needed} was requested")]
    TableTooShort {
        table: &'static str,
        needed: u64,
        available: u64,
    },

    #[error("arrows are not composable: source of the left factor differs from range of the right")]
    NotComposable,

    #[error("element of length {length} escapes the enumerated region (cap {cap})")]
    RegionEscape { length: u64, cap: u64 },

    #[error("power {completed_step} complete; next square has length {length} beyond cap {cap}")]
    PowerRegionEscape {
        completed_step: usize,
        length: u64,
        cap: u64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::BudgetExceeded { .. }
            | Error::BallBudgetExceeded { .. }
            | Error::RegionEscape { .. }
            | Error::PowerRegionEscape { .. } => ErrorKind::Resource,
            Error::NotComposable => ErrorKind::Domain,
            Error::SymbolOutOfRange { .. }
            | Error::TableTooShort { .. }
            | Error::InvalidParameter(_)
            | Error::Parse(_)
            | Error::Io(_) => ErrorKind::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
