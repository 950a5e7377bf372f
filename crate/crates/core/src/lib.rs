//! Coverage probability and rate of an aerial user served by a terrestrial
//! PPP network and a finite aerial BPP network, analytically and by
//! Monte Carlo.

pub mod association;
pub mod channel;
pub mod config;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod interference;
pub mod metrics;
pub mod montecarlo;
pub mod numerics;

pub use association::{assoc_probs, AssociationProbs};
pub use config::{
    db_to_linear, validate, AngleUnit, Environment, LosModel, NetworkParams, SpectrumPolicy, TierLabel,
    ValidatedParams,
};
pub use error::{Error, Result};
pub use interference::LaplaceEvalRequest;
pub use metrics::{coverage, rate, CoverageResult, Method, RateResult};
pub use montecarlo::{EstimateWithCI, SimMode, TrialOutcome};
