use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// A plug-in quantity does not exist for the given counts.
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("enumeration grid has {outcomes} joint outcomes, above the cap of {cap}")]
    CapExceeded { outcomes: u128, cap: u128 },

    #[error("conditioning on D != 0 discarded all {replications} replications")]
    DegenerateConditioning { replications: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
