//! Subject/cohort data model for recurrent-event observation, raw-record
//! validation, and the cohort CSV interchange format.
//!
//! A subject is observed from time 0 until a single end-of-observation time
//! (drop-out or administrative study end); events before that time are
//! recorded with their occurrence times in days. Within one subject event
//! times must be strictly increasing: the counting path jumps by exactly one
//! at a time, so a tied pair of event times is treated as a data error rather
//! than jittered. Ties *across* subjects are legitimate and handled by the
//! risk-set conventions downstream.

use std::collections::HashMap;
use std::io;

use crate::error::{Error, Result};

/// Why observation of a subject ended.
///
/// Both kinds are treated as right-censoring by every estimator; the
/// distinction is kept for reporting only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndKind {
    /// The subject left the study before the administrative cutoff.
    Dropout,
    /// Observation was truncated at the study-completion time.
    Administrative,
}

/// One subject's ordered event times plus its end-of-observation time.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectHistory {
    subject_id: String,
    event_times: Vec<f64>,
    observation_end: f64,
    end_kind: EndKind,
}

impl SubjectHistory {
    /// Builds a validated history. `event_times` must be strictly increasing,
    /// positive, and bounded by `observation_end` (an event exactly at the
    /// end of observation counts: events are recorded before censoring).
    pub fn new(
        subject_id: impl Into<String>,
        event_times: Vec<f64>,
        observation_end: f64,
        end_kind: EndKind,
    ) -> Result<Self> {
        let subject_id = subject_id.into();
        if !(observation_end > 0.0) || !observation_end.is_finite() {
            return Err(Error::NonPositiveTime {
                subject_id,
                time: observation_end,
            });
        }
        for (i, &t) in event_times.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::NonPositiveTime { subject_id, time: t });
            }
            if i > 0 {
                if t == event_times[i - 1] {
                    return Err(Error::DuplicateEventTime { subject_id, time: t });
                }
                if t < event_times[i - 1] {
                    // callers sort first; reaching here is a logic error
                    return Err(Error::DuplicateEventTime { subject_id, time: t });
                }
            }
            if t > observation_end {
                return Err(Error::EventAfterCensor {
                    subject_id,
                    time: t,
                    censor_time: observation_end,
                });
            }
        }
        Ok(Self {
            subject_id,
            event_times,
            observation_end,
            end_kind,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    /// Strictly increasing event times; the k-th element (1-based) is the
    /// time of the subject's k-th (order-k) event.
    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn observation_end(&self) -> f64 {
        self.observation_end
    }

    pub fn end_kind(&self) -> EndKind {
        self.end_kind
    }

    /// Total number of observed events.
    pub fn event_count(&self) -> usize {
        self.event_times.len()
    }

    /// Number of events that occurred by time `t` (right-continuous: an
    /// event exactly at `t` is counted).
    pub fn count_at(&self, t: f64) -> usize {
        self.event_times.partition_point(|&e| e <= t)
    }

    /// Number of events strictly before `t`.
    pub fn count_before(&self, t: f64) -> usize {
        self.event_times.partition_point(|&e| e < t)
    }

    /// The subject's counting path as an explicit step function.
    pub fn count_path(&self) -> CountPath {
        CountPath {
            breakpoints: self.event_times.clone(),
            counts: (1..=self.event_times.len() as u32).collect(),
        }
    }
}

/// Number of events that occurred to `subject` by time `t`.
///
/// Free-function form of [`SubjectHistory::count_at`].
pub fn count_at(subject: &SubjectHistory, t: f64) -> usize {
    subject.count_at(t)
}

/// A subject's cumulative event count over time: zero before the first
/// breakpoint, increasing by exactly one at each breakpoint, constant
/// elsewhere (right-continuous).
#[derive(Debug, Clone, PartialEq)]
pub struct CountPath {
    breakpoints: Vec<f64>,
    counts: Vec<u32>,
}

impl CountPath {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Count value at time `t`.
    pub fn at(&self, t: f64) -> u32 {
        self.breakpoints.partition_point(|&b| b <= t) as u32
    }
}

/// Validated collection of subject histories sharing the time origin 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortDataset {
    subjects: Vec<SubjectHistory>,
    max_order: usize,
    horizon: f64,
}

impl CohortDataset {
    /// Builds a cohort from validated histories. Rejects empty cohorts and
    /// duplicate subject ids.
    pub fn new(subjects: Vec<SubjectHistory>) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::EmptyCohort);
        }
        let mut seen = HashMap::with_capacity(subjects.len());
        for (i, s) in subjects.iter().enumerate() {
            if seen.insert(s.subject_id.as_str(), i).is_some() {
                return Err(Error::Csv {
                    row: 0,
                    message: format!("duplicate subject id {}", s.subject_id),
                });
            }
        }
        let max_order = subjects.iter().map(|s| s.event_count()).max().unwrap_or(0);
        let horizon = subjects
            .iter()
            .map(|s| s.observation_end)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            subjects,
            max_order,
            horizon,
        })
    }

    pub fn subjects(&self) -> &[SubjectHistory] {
        &self.subjects
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    /// Largest event count observed across subjects.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Largest end-of-observation time.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Total number of events across all subjects.
    pub fn total_events(&self) -> usize {
        self.subjects.iter().map(|s| s.event_count()).sum()
    }
}

/// Raw record kind as it appears in the ingestion CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Event,
    Censor,
}

/// One raw input row: `(subject_id, time, kind)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub subject_id: String,
    pub time: f64,
    pub kind: RecordKind,
}

impl RawRecord {
    pub fn new(subject_id: impl Into<String>, time: f64, kind: RecordKind) -> Self {
        Self {
            subject_id: subject_id.into(),
            time,
            kind,
        }
    }
}

/// Validates raw records into a cohort.
///
/// Record order is irrelevant: events are sorted per subject. Each subject
/// must carry exactly one `Censor` record, which becomes its end of
/// observation. Subjects appear in the cohort in order of first appearance
/// in the input. Ingested records carry no drop-out marker, so the end kind
/// is recorded as [`EndKind::Administrative`]; estimates do not depend on it.
pub fn validate_cohort<I>(records: I) -> Result<CohortDataset>
where
    I: IntoIterator<Item = RawRecord>,
{
    struct Builder {
        events: Vec<f64>,
        censor: Option<f64>,
    }

    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, Builder> = HashMap::new();
    for rec in records {
        let entry = by_id.entry(rec.subject_id.clone()).or_insert_with(|| {
            order.push(rec.subject_id.clone());
            Builder {
                events: Vec::new(),
                censor: None,
            }
        });
        match rec.kind {
            RecordKind::Event => entry.events.push(rec.time),
            RecordKind::Censor => {
                if entry.censor.replace(rec.time).is_some() {
                    return Err(Error::DuplicateCensor {
                        subject_id: rec.subject_id,
                    });
                }
            }
        }
    }

    let mut subjects = Vec::with_capacity(order.len());
    for id in order {
        let mut b = by_id.remove(&id).expect("builder exists for every id");
        let censor = b.censor.ok_or_else(|| Error::MissingCensor {
            subject_id: id.clone(),
        })?;
        b.events.sort_unstable_by(f64::total_cmp);
        subjects.push(SubjectHistory::new(
            id,
            b.events,
            censor,
            EndKind::Administrative,
        )?);
    }
    CohortDataset::new(subjects)
}

/// Converts a cohort back to raw records (events ascending, censor last per
/// subject), in cohort subject order.
pub fn to_records(cohort: &CohortDataset) -> Vec<RawRecord> {
    let mut out = Vec::with_capacity(cohort.total_events() + cohort.len());
    for s in cohort.subjects() {
        for &t in s.event_times() {
            out.push(RawRecord::new(s.subject_id(), t, RecordKind::Event));
        }
        out.push(RawRecord::new(
            s.subject_id(),
            s.observation_end(),
            RecordKind::Censor,
        ));
    }
    out
}

const CSV_HEADER: [&str; 3] = ["subject_id", "time", "kind"];

/// Reads a cohort from the ingestion CSV format.
///
/// The format is fixed: header `subject_id,time,kind`, one row per event or
/// censor record, `kind` exactly `EVENT` or `CENSOR` (case-sensitive), and
/// `time` a non-negative decimal number of days. Diagnostics carry the
/// 1-based file row number.
pub fn read_cohort_csv<R: io::Read>(reader: R) -> Result<CohortDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    {
        let headers = rdr.headers().map_err(|e| Error::Csv {
            row: 1,
            message: e.to_string(),
        })?;
        if headers.len() != 3 || headers.iter().zip(CSV_HEADER).any(|(h, want)| h != want) {
            return Err(Error::Csv {
                row: 1,
                message: format!(
                    "expected header `{}`, found `{}`",
                    CSV_HEADER.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Csv {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(Error::Csv {
                row: line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let time: f64 = row[1].parse().map_err(|_| Error::Csv {
            row: line,
            message: format!("invalid time `{}`", &row[1]),
        })?;
        if !time.is_finite() || time < 0.0 {
            return Err(Error::Csv {
                row: line,
                message: format!("time must be a finite non-negative decimal, found `{}`", &row[1]),
            });
        }
        let kind = match &row[2] {
            "EVENT" => RecordKind::Event,
            "CENSOR" => RecordKind::Censor,
            other => {
                return Err(Error::Csv {
                    row: line,
                    message: format!("invalid kind `{other}` (expected EVENT or CENSOR)"),
                })
            }
        };
        records.push(RawRecord::new(row[0].to_string(), time, kind));
    }
    validate_cohort(records)
}

/// Writes a cohort in the ingestion CSV format. Times use the shortest
/// round-trip decimal representation, so re-reading reproduces the cohort
/// exactly.
pub fn write_cohort_csv<W: io::Write>(mut writer: W, cohort: &CohortDataset) -> Result<()> {
    writeln!(writer, "{}", CSV_HEADER.join(","))?;
    for rec in to_records(cohort) {
        let kind = match rec.kind {
            RecordKind::Event => "EVENT",
            RecordKind::Censor => "CENSOR",
        };
        writeln!(writer, "{},{},{}", rec.subject_id, rec.time, kind)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, t: f64, kind: RecordKind) -> RawRecord {
        RawRecord::new(id, t, kind)
    }

    #[test]
    fn minimal_valid_cohort() {
        let cohort = validate_cohort([
            rec("S1", 1.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
            rec("S2", 3.0, RecordKind::Censor),
        ])
        .unwrap();
        assert_eq!(cohort.len(), 2);
        assert_eq!(cohort.max_order(), 1);
        assert_eq!(cohort.horizon(), 3.0);
    }

    #[test]
    fn input_order_is_irrelevant() {
        let a = validate_cohort([
            rec("S1", 3.0, RecordKind::Censor),
            rec("S1", 1.0, RecordKind::Event),
        ])
        .unwrap();
        let b = validate_cohort([
            rec("S1", 1.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
        ])
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn event_after_censor_rejected() {
        let err = validate_cohort([
            rec("S1", 5.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
        ])
        .unwrap_err();
        assert_eq!(err.name(), "EventAfterCensor");
    }

    #[test]
    fn event_at_censor_time_is_kept() {
        let cohort = validate_cohort([
            rec("S1", 3.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
        ])
        .unwrap();
        assert_eq!(cohort.subjects()[0].event_count(), 1);
    }

    #[test]
    fn missing_censor_rejected() {
        let err = validate_cohort([rec("S1", 1.0, RecordKind::Event)]).unwrap_err();
        assert_eq!(err.name(), "MissingCensor");
    }

    #[test]
    fn duplicate_censor_rejected() {
        let err = validate_cohort([
            rec("S1", 3.0, RecordKind::Censor),
            rec("S1", 4.0, RecordKind::Censor),
        ])
        .unwrap_err();
        assert_eq!(err.name(), "DuplicateCensor");
    }

    #[test]
    fn within_subject_tie_rejected() {
        let err = validate_cohort([
            rec("S1", 1.0, RecordKind::Event),
            rec("S1", 1.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
        ])
        .unwrap_err();
        assert_eq!(err.name(), "DuplicateEventTime");
    }

    #[test]
    fn cross_subject_tie_allowed() {
        let cohort = validate_cohort([
            rec("S1", 1.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
            rec("S2", 1.0, RecordKind::Event),
            rec("S2", 3.0, RecordKind::Censor),
        ])
        .unwrap();
        assert_eq!(cohort.total_events(), 2);
    }

    #[test]
    fn non_positive_time_rejected() {
        let err = validate_cohort([
            rec("S1", 0.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
        ])
        .unwrap_err();
        assert_eq!(err.name(), "NonPositiveTime");
        let err = validate_cohort([rec("S1", 0.0, RecordKind::Censor)]).unwrap_err();
        assert_eq!(err.name(), "NonPositiveTime");
    }

    #[test]
    fn empty_cohort_rejected() {
        let err = validate_cohort([]).unwrap_err();
        assert_eq!(err.name(), "EmptyCohort");
    }

    #[test]
    fn count_at_examples() {
        let s = SubjectHistory::new("A", vec![1.0, 2.0], 3.0, EndKind::Administrative).unwrap();
        assert_eq!(s.count_at(1.5), 1);
        assert_eq!(s.count_at(2.0), 2); // right-continuous at the jump
        assert_eq!(s.count_at(0.5), 0);
        let empty = SubjectHistory::new("B", vec![], 3.0, EndKind::Administrative).unwrap();
        assert_eq!(empty.count_at(100.0), 0);
    }

    #[test]
    fn count_at_is_monotone_and_exhaustive() {
        let s = SubjectHistory::new("A", vec![0.5, 1.25, 4.0], 4.5, EndKind::Dropout).unwrap();
        let mut prev = 0;
        for i in 0..=50 {
            let t = i as f64 * 0.1;
            let c = s.count_at(t);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(s.count_at(s.observation_end()), s.event_count());
    }

    #[test]
    fn count_path_unit_jumps() {
        let s = SubjectHistory::new("A", vec![1.0, 2.0, 2.5], 3.0, EndKind::Administrative).unwrap();
        let path = s.count_path();
        assert_eq!(path.counts(), &[1, 2, 3]);
        assert_eq!(path.at(0.9), 0);
        assert_eq!(path.at(2.0), 2);
        assert_eq!(path.at(3.0), 3);
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let records = vec![
            rec("S1", 1.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
            rec("S2", 2.5, RecordKind::Event),
            rec("S2", 2.75, RecordKind::Event),
            rec("S2", 3.0, RecordKind::Censor),
        ];
        let cohort = validate_cohort(records).unwrap();
        let mut buf = Vec::new();
        write_cohort_csv(&mut buf, &cohort).unwrap();
        let back = read_cohort_csv(buf.as_slice()).unwrap();
        assert_eq!(back, cohort);
        let mut buf2 = Vec::new();
        write_cohort_csv(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn csv_rejects_lowercase_kind_with_row_number() {
        let data = "subject_id,time,kind\nS1,1,EVENT\nS1,2,event\n";
        let err = read_cohort_csv(data.as_bytes()).unwrap_err();
        match err {
            Error::Csv { row, message } => {
                assert_eq!(row, 3);
                assert!(message.contains("event"), "message: {message}");
            }
            other => panic!("expected Csv error, got {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_wrong_header() {
        let data = "id,time,kind\n";
        let err = read_cohort_csv(data.as_bytes()).unwrap_err();
        assert_eq!(err.name(), "Csv");
    }

    #[test]
    fn csv_rejects_negative_time() {
        let data = "subject_id,time,kind\nS1,-1,EVENT\n";
        let err = read_cohort_csv(data.as_bytes()).unwrap_err();
        match err {
            Error::Csv { row, .. } => assert_eq!(row, 2),
            other => panic!("expected Csv error, got {other:?}"),
        }
    }

    #[test]
    fn fractional_times_accepted() {
        let data = "subject_id,time,kind\nS1,1.25,EVENT\nS1,370.5,CENSOR\n";
        let cohort = read_cohort_csv(data.as_bytes()).unwrap();
        assert_eq!(cohort.subjects()[0].event_times(), &[1.25]);
    }
}
