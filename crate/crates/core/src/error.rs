use thiserror::Error;

/// Errors raised by the library. Variants map onto the failure classes the
/// CLI distinguishes: invalid inputs, regime mismatches, resource bounds and
/// simulation aborts.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid offspring law: {0}")]
    InvalidOffspring(String),

    /// The offspring mean is at or below one, so the population dies out
    /// almost surely. Kept separate from `InvalidOffspring` because the
    /// simulation front end reports it as an abort rather than a config error.
    #[error("offspring mean {mean} is not above 1: the population dies out almost surely")]
    Subcritical { mean: f64 },

    #[error("invalid step law: {0}")]
    InvalidStep(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),

    #[error("simulation aborted: {0}")]
    SimulationAbort(String),

    #[error("estimation error: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
