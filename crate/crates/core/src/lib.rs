//! Laboratory for maxima of branching random walks with stretched-exponential
//! displacement tails: analytic rate functions, exact small-scale oracles and
//! a seeded, reproducible Monte Carlo engine for the branching random walk
//! and its independent-walks reference model.

pub mod acceptance;
pub mod error;
pub mod estimate;
pub mod gw;
pub mod oracle;
pub mod rates;
pub mod rng;
pub mod simulate;
pub mod stats;
pub mod step;

pub use error::{Error, Result};
pub use estimate::{TailEstimate, TailEvent};
pub use gw::{OffspringLaw, Regime, ZDistribution};
pub use oracle::LatticeDist;
pub use rates::{ModelParams, RateCurve, RateKind, RateModel};
pub use simulate::{BrwRunResult, Displacement, Engine, SimConfig, SimModel};
pub use step::{LatticeStepLaw, StepLaw};
