//! Hand-checkable cohorts shared across unit tests.

use crate::event_data::{validate_cohort, CohortDataset, RawRecord, RecordKind};

fn rec(id: &str, t: f64, kind: RecordKind) -> RawRecord {
    RawRecord::new(id, t, kind)
}

/// S1 event@1, S2 event@2, S3 none; all censored@3.
pub(crate) fn fixture_d1() -> CohortDataset {
    validate_cohort([
        rec("S1", 1.0, RecordKind::Event),
        rec("S1", 3.0, RecordKind::Censor),
        rec("S2", 2.0, RecordKind::Event),
        rec("S2", 3.0, RecordKind::Censor),
        rec("S3", 3.0, RecordKind::Censor),
    ])
    .unwrap()
}

/// A events@1,@2; B none; both censored@3.
pub(crate) fn fixture_d2() -> CohortDataset {
    validate_cohort([
        rec("A", 1.0, RecordKind::Event),
        rec("A", 2.0, RecordKind::Event),
        rec("A", 3.0, RecordKind::Censor),
        rec("B", 3.0, RecordKind::Censor),
    ])
    .unwrap()
}

/// S1 event@1 then drop-out@1.5; S2 event@2; S3 none; S2, S3 censored@3.
pub(crate) fn fixture_d3() -> CohortDataset {
    validate_cohort([
        rec("S1", 1.0, RecordKind::Event),
        rec("S1", 1.5, RecordKind::Censor),
        rec("S2", 2.0, RecordKind::Event),
        rec("S2", 3.0, RecordKind::Censor),
        rec("S3", 3.0, RecordKind::Censor),
    ])
    .unwrap()
}
