use thiserror::Error;

/// Errors raised by the key-rate models, simulator and phase-channel tools.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{quantity} = {value} is outside its domain {expected}")]
    Domain {
        quantity: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("tally group `{group}` has no trials")]
    EmptyGroup { group: String },

    #[error("no reference clicks recorded; phase offset is unobservable")]
    ZeroClicks,

    #[error("incompatible tally tables: {0}")]
    IncompatibleTallies(String),

    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(quantity: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        quantity,
        value,
        expected,
    }
}
