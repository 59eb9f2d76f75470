use thiserror::Error;

/// Errors raised by cohort validation, CSV ingestion, and estimator inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("subject {subject_id} has no CENSOR record")]
    MissingCensor { subject_id: String },

    #[error("subject {subject_id} has more than one CENSOR record")]
    DuplicateCensor { subject_id: String },

    #[error("subject {subject_id}: event at t={time} is after the censoring time t={censor_time}")]
    EventAfterCensor {
        subject_id: String,
        time: f64,
        censor_time: f64,
    },

    #[error("subject {subject_id}: duplicate event time t={time}")]
    DuplicateEventTime { subject_id: String, time: f64 },

    #[error("subject {subject_id}: time t={time} must be positive")]
    NonPositiveTime { subject_id: String, time: f64 },

    #[error("cohort has no subjects")]
    EmptyCohort,

    #[error("csv row {row}: {message}")]
    Csv { row: u64, message: String },

    #[error("confidence level {level} is outside (0, 1)")]
    InvalidLevel { level: f64 },

    #[error("invalid scenario parameters: {0}")]
    InvalidScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-friendly name of the error variant, used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MissingCensor { .. } => "MissingCensor",
            Error::DuplicateCensor { .. } => "DuplicateCensor",
            Error::EventAfterCensor { .. } => "EventAfterCensor",
            Error::DuplicateEventTime { .. } => "DuplicateEventTime",
            Error::NonPositiveTime { .. } => "NonPositiveTime",
            Error::EmptyCohort => "EmptyCohort",
            Error::Csv { .. } => "Csv",
            Error::InvalidLevel { .. } => "InvalidLevel",
            Error::InvalidScenario(_) => "InvalidScenario",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
