use thiserror::Error;

/// Unified error type for simulation setup, numerics, and data ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// A population or sample set was smaller than an operation requires.
    #[error("need at least {min} entries, got {got}")]
    InvalidSize { min: usize, got: usize },

    /// An operation that consumes samples received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// An agent index fell outside the population.
    #[error("agent index {index} out of range for population of {len}")]
    InvalidAgent { index: usize, len: usize },

    /// A parameter violated its documented range or relation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A snapshot schedule was not strictly increasing or exceeded the step count.
    #[error("snapshot schedule must be strictly increasing and bounded by the step count")]
    InvalidSchedule,

    /// The profit surface has no stationary point inside the allowed box.
    #[error("no interior profit optimum within the labor/capital bounds")]
    NoInteriorOptimum,

    /// Every trader requested a zero stock fraction, so no price is defined.
    #[error("no demand: all stock preferences are zero")]
    NoDemand,

    /// Requested stock holdings meet or exceed supply, so no finite price clears.
    #[error("no market-clearing price for the drawn preferences")]
    NoClearing,

    /// The drift/diffusion profile does not admit a normalizable stationary density.
    #[error("stationary density is not normalizable on the given support")]
    DivergentSolution,

    /// Too few samples beyond the tail threshold to fit a tail exponent.
    #[error("insufficient tail samples: need {need}, got {got}")]
    InsufficientTail { need: usize, got: usize },

    /// Lorenz/Gini statistics are undefined when the total is zero or negative.
    #[error("total of samples is not positive; Lorenz curve undefined")]
    ZeroTotal,

    /// An input file could not be read.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// An input file could not be parsed as CSV.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// An input file parsed but its content was not usable.
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for `InvalidParameter` with a formatted reason.
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
