//! Pooled event-time grid and stratified risk sets with delayed entry.
//!
//! Subjects are stratified by their current event count: stratum `j` holds
//! the subjects that have had exactly `j` events so far. A subject enters
//! stratum `j`'s risk set at the instant of its `j`-th event (delayed entry)
//! and leaves it at its `(j+1)`-th event or at its end of observation,
//! whichever comes first.
//!
//! Conventions (standard product-limit risk-set rules):
//! - stratum membership at time `t` requires the `j`-th event *strictly
//!   before* `t`, so a subject is at risk in stratum `j-1` at the very time
//!   of its `j`-th event;
//! - censoring acts just after `t`: a subject censored exactly at `t` is
//!   still at risk at `t`.

use crate::event_data::CohortDataset;
use crate::exec;

/// Strictly increasing distinct times at which at least one event (of any
/// order) occurs in the cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTimeGrid {
    times: Vec<f64>,
}

impl EventTimeGrid {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Sorted distinct union of all subjects' event times.
pub fn event_time_grid(cohort: &CohortDataset) -> EventTimeGrid {
    let mut times = Vec::with_capacity(cohort.total_events());
    for s in cohort.subjects() {
        times.extend_from_slice(s.event_times());
    }
    exec::sort_times(&mut times);
    times.dedup();
    EventTimeGrid { times }
}

/// At-risk and event counts for one stratum at one grid time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StratumSnapshot {
    /// Event order `j` of the stratum.
    pub stratum: usize,
    /// Number of subjects with exactly `j` events strictly before the time
    /// and still under observation at it.
    pub at_risk: usize,
    /// Number of subjects whose `(j+1)`-th event occurs exactly at the time.
    pub events: usize,
}

/// Risk-set snapshot of stratum `j` at time `t`, by direct enumeration.
pub fn stratum_snapshot(cohort: &CohortDataset, j: usize, t: f64) -> StratumSnapshot {
    let mut at_risk = 0;
    let mut events = 0;
    for s in cohort.subjects() {
        if s.count_before(t) == j && s.observation_end() >= t {
            at_risk += 1;
        }
        if s.event_times().get(j) == Some(&t) {
            events += 1;
        }
    }
    StratumSnapshot {
        stratum: j,
        at_risk,
        events,
    }
}

/// Sorted risk-set transition times for one stratum, consumed by the
/// estimator sweeps. A subject contributes one entry/exit pair per stratum
/// it reaches; entries at time 0 (stratum 0) are folded into `initial`.
#[derive(Debug, Clone, Default)]
pub(crate) struct StratumArrays {
    /// Subjects in the stratum's risk set from time 0 on.
    pub initial: usize,
    /// Entry times (the stratum's own event order); risk set membership at
    /// `t` requires entry < `t`.
    pub entries: Vec<f64>,
    /// Exit times (next-order event or end of observation); membership at
    /// `t` requires `t` <= exit.
    pub exits: Vec<f64>,
    /// Times of `(j+1)`-th events, with multiplicity.
    pub events: Vec<f64>,
}

/// Builds the per-stratum transition arrays for strata `0..=max_order`.
pub(crate) fn stratum_arrays(cohort: &CohortDataset) -> Vec<StratumArrays> {
    let n_strata = cohort.max_order() + 1;
    let mut arrays: Vec<StratumArrays> = vec![StratumArrays::default(); n_strata];
    for s in cohort.subjects() {
        let times = s.event_times();
        let end = s.observation_end();
        for j in 0..=times.len() {
            if j == 0 {
                arrays[0].initial += 1;
            } else {
                arrays[j].entries.push(times[j - 1]);
            }
            if j < times.len() {
                arrays[j].exits.push(times[j]);
                arrays[j].events.push(times[j]);
            } else {
                arrays[j].exits.push(end);
            }
        }
    }
    for arr in &mut arrays {
        exec::sort_times(&mut arr.entries);
        exec::sort_times(&mut arr.exits);
        exec::sort_times(&mut arr.events);
    }
    arrays
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_data::{validate_cohort, RawRecord, RecordKind};
    use crate::test_fixtures::{fixture_d1, fixture_d2, fixture_d3};

    fn rec(id: &str, t: f64, kind: RecordKind) -> RawRecord {
        RawRecord::new(id, t, kind)
    }

    #[test]
    fn grid_is_distinct_union_of_event_times() {
        assert_eq!(event_time_grid(&fixture_d1()).times(), &[1.0, 2.0]);
        assert_eq!(event_time_grid(&fixture_d2()).times(), &[1.0, 2.0]);
        let no_events = validate_cohort([rec("S1", 3.0, RecordKind::Censor)]).unwrap();
        assert!(event_time_grid(&no_events).is_empty());
    }

    #[test]
    fn snapshots_match_hand_enumeration() {
        let d1 = fixture_d1();
        let s = stratum_snapshot(&d1, 0, 1.0);
        assert_eq!((s.at_risk, s.events), (3, 1));
        let s = stratum_snapshot(&d1, 0, 2.0);
        assert_eq!((s.at_risk, s.events), (2, 1));

        let d2 = fixture_d2();
        let s = stratum_snapshot(&d2, 1, 2.0);
        assert_eq!((s.at_risk, s.events), (1, 1));

        let d3 = fixture_d3();
        let s = stratum_snapshot(&d3, 1, 2.0);
        assert_eq!((s.at_risk, s.events), (0, 0));
    }

    #[test]
    fn snapshot_counts_censored_subject_at_its_censor_time() {
        // censoring acts just after t: a subject censored at t is at risk at t
        let cohort = validate_cohort([
            rec("S1", 2.0, RecordKind::Event),
            rec("S1", 3.0, RecordKind::Censor),
            rec("S2", 2.0, RecordKind::Censor),
        ])
        .unwrap();
        let s = stratum_snapshot(&cohort, 0, 2.0);
        assert_eq!((s.at_risk, s.events), (2, 1));
    }

    #[test]
    fn partition_and_conservation() {
        for cohort in [fixture_d1(), fixture_d2(), fixture_d3()] {
            let grid = event_time_grid(&cohort);
            let n = cohort.len();
            for &t in grid.times() {
                let in_strata: usize = (0..=cohort.max_order())
                    .map(|j| stratum_snapshot(&cohort, j, t).at_risk)
                    .sum();
                let censored_before = cohort
                    .subjects()
                    .iter()
                    .filter(|s| s.observation_end() < t)
                    .count();
                assert_eq!(in_strata + censored_before, n, "partition at t={t}");
            }
            for j in 0..=cohort.max_order() {
                let total_events: usize = grid
                    .times()
                    .iter()
                    .map(|&t| stratum_snapshot(&cohort, j, t).events)
                    .sum();
                let reaching: usize = cohort
                    .subjects()
                    .iter()
                    .filter(|s| s.event_count() >= j + 1)
                    .count();
                assert_eq!(total_events, reaching, "conservation for stratum {j}");
            }
        }
    }

    #[test]
    fn stratum_arrays_agree_with_snapshots() {
        for cohort in [fixture_d1(), fixture_d2(), fixture_d3()] {
            let grid = event_time_grid(&cohort);
            let arrays = stratum_arrays(&cohort);
            for (j, arr) in arrays.iter().enumerate() {
                for &t in grid.times() {
                    let at_risk = arr.initial + arr.entries.partition_point(|&e| e < t)
                        - arr.exits.partition_point(|&e| e < t);
                    let events = arr.events.partition_point(|&e| e <= t)
                        - arr.events.partition_point(|&e| e < t);
                    let snap = stratum_snapshot(&cohort, j, t);
                    assert_eq!(at_risk, snap.at_risk, "at_risk j={j} t={t}");
                    assert_eq!(events, snap.events, "events j={j} t={t}");
                }
            }
        }
    }

    #[test]
    fn max_order_stratum_has_no_events() {
        for cohort in [fixture_d1(), fixture_d2(), fixture_d3()] {
            let grid = event_time_grid(&cohort);
            let j = cohort.max_order();
            for &t in grid.times() {
                assert_eq!(stratum_snapshot(&cohort, j, t).events, 0);
            }
        }
    }
}
