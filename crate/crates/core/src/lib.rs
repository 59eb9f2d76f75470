//! Estimation of the mean count of recurrent events over time, an upper
//! bound on its variance, and incidence-rate confidence intervals, for
//! counting processes whose event intensity changes with each successive
//! event.
//!
//! The crate provides:
//!
//! - a validated subject/cohort data model with CSV ingestion
//!   ([`event_data`]);
//! - pooled event grids and stratified risk sets with delayed entry
//!   ([`risk_model`]);
//! - the history-stratified mean estimator, occupancy probabilities,
//!   conditional Kaplan-Meier curves, the Nelson-Aalen reference, variance
//!   upper bounds, and incidence-rate confidence intervals ([`estimators`]);
//! - a deterministic scenario simulator and replicate-study harness
//!   ([`simulator`]).
//!
//! With the default `parallel` feature, cohort generation and replicate
//! studies fan out over rayon; outputs are bit-identical to the sequential
//! fallback at any thread count.

pub mod error;
pub mod estimators;
pub mod event_data;
mod exec;
pub mod risk_model;
pub mod simulator;
#[cfg(test)]
pub(crate) mod test_fixtures;

pub use error::{Error, Result};
pub use estimators::{
    BoundMode, IncidenceRateCi, MeanEstimate, StepFunction, VarianceBound,
};
pub use event_data::{CohortDataset, CountPath, EndKind, RawRecord, RecordKind, SubjectHistory};
pub use risk_model::{EventTimeGrid, StratumSnapshot};
pub use simulator::{ReplicateSummary, ScenarioParams};
