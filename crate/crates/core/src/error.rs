use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(&'static str),
    #[error("power-law fit needs at least {needed} points with k >= k_min, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph is not simple: {0}")]
    NotSimple(&'static str),
    #[error("bit stream ended after {read} bits, before the program was complete")]
    IncompleteProgram { read: usize },
    #[error("enumeration up to {len} bits exceeds the limit of {limit} bits")]
    EnumerationTooLarge { len: usize, limit: usize },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("step {requested} is outside the trajectory (last step {last})")]
    Range { requested: usize, last: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
