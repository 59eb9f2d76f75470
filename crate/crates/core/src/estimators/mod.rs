//! Estimators for recurrent-event cohorts whose event intensity changes with
//! each successive event.
//!
//! The mean-count estimator stratifies the cohort by current event count and
//! combines, at every pooled event time, the stratum's product-limit hazard
//! increment with the probability of occupying that stratum just before the
//! time. Occupancy probabilities are chained conditional (Kaplan-Meier type)
//! onward-transition estimates: at each event time the occupancy vector moves
//! mass `p_j * h_j` from stratum `j` to `j+1`, where `h_j` is the stratum's
//! risk-set hazard increment. The chain telescopes, so occupancies always sum
//! to one, and with no drop-outs each occupancy reduces to the empirical
//! fraction of subjects in the stratum, which makes the mean estimate agree
//! with the Nelson-Aalen cumulative mean exactly. Under drop-outs the
//! occupancy weighting and Nelson-Aalen genuinely differ.
//!
//! Pooling subjects within a stratum assumes they share a common intensity
//! given the same event history; this identification cannot be checked from
//! the data and is simply the estimand's definition here.
//!
//! Only an upper bound for the variance of the count is available (not the
//! variance itself); see [`variance_upper_bound`]. Confidence intervals built
//! from it are asymptotic: the normal approximation sharpens as per-subject
//! counts and the number of subjects grow, and nothing is enforced at finite
//! samples.

mod normal;
mod step;

pub use normal::normal_quantile;
pub use step::StepFunction;

use std::io;

use crate::error::{Error, Result};
use crate::event_data::CohortDataset;
use crate::risk_model::{event_time_grid, stratum_arrays, StratumArrays};

/// Which observed count multiplies the mean in the variance bound
/// `mu * (count - mu)`.
///
/// `MaxCount` uses the largest count observed by `t` and always yields a
/// genuine upper bound. `MinCount` uses the smallest observed count; it makes
/// the bound (and any interval built from it) tighter but can collapse to
/// zero as soon as one subject is event-free, in which case the result is
/// flagged degenerate. `MaxCount` is the conservative default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundMode {
    #[default]
    MaxCount,
    MinCount,
}

/// Mean-count estimate: the total curve plus the per-stratum inner sums.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    mean: StepFunction,
    contributions: Vec<StepFunction>,
}

impl MeanEstimate {
    /// The estimated mean count over time; non-decreasing, zero at time 0.
    pub fn mean(&self) -> &StepFunction {
        &self.mean
    }

    /// Per-stratum cumulative contributions, indexed by event order `j`.
    /// Their pointwise sum equals [`MeanEstimate::mean`] exactly.
    pub fn per_stratum_contributions(&self) -> &[StepFunction] {
        &self.contributions
    }
}

/// Upper bound for the variance of the event count at one time point.
///
/// This is a bound, never a variance estimate. When the count reference
/// falls below the mean (possible under [`BoundMode::MinCount`]) the bound
/// is clamped to zero and flagged `degenerate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBound {
    pub time: f64,
    pub mu_hat: f64,
    pub count_reference: usize,
    pub bound: f64,
    pub degenerate: bool,
}

impl VarianceBound {
    /// Evaluates `mu * (count_reference - mu)` with the degenerate clamp.
    pub fn evaluate(time: f64, mu_hat: f64, count_reference: usize) -> Self {
        let c = count_reference as f64;
        let degenerate = c < mu_hat;
        let bound = if degenerate { 0.0 } else { mu_hat * (c - mu_hat) };
        Self {
            time,
            mu_hat,
            count_reference,
            bound,
            degenerate,
        }
    }
}

/// Normal-approximation confidence interval for the incidence rate
/// (mean count per subject) at one time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidenceRateCi {
    pub point: f64,
    pub low: f64,
    pub high: f64,
    pub half_width: f64,
    pub level: f64,
    pub degenerate: bool,
}

/// Cursor over one stratum's sorted transition arrays during an ascending
/// sweep of the grid.
struct StratumCursor<'a> {
    arr: &'a StratumArrays,
    entry: usize,
    exit: usize,
    event: usize,
    at_risk: usize,
}

impl<'a> StratumCursor<'a> {
    fn new(arr: &'a StratumArrays) -> Self {
        Self {
            arr,
            entry: 0,
            exit: 0,
            event: 0,
            at_risk: arr.initial,
        }
    }

    /// Advances the risk set to grid time `t` and returns the number of
    /// stratum events exactly at `t`. Grid times must be visited ascending.
    fn advance(&mut self, t: f64) -> usize {
        while self.entry < self.arr.entries.len() && self.arr.entries[self.entry] < t {
            self.entry += 1;
            self.at_risk += 1;
        }
        while self.exit < self.arr.exits.len() && self.arr.exits[self.exit] < t {
            self.exit += 1;
            self.at_risk -= 1;
        }
        while self.event < self.arr.events.len() && self.arr.events[self.event] < t {
            self.event += 1; // unreachable: every event time is a grid time
        }
        let start = self.event;
        while self.event < self.arr.events.len() && self.arr.events[self.event] == t {
            self.event += 1;
        }
        self.event - start
    }
}

/// One grid time of the stratified sweep, exposed to visitors before the
/// occupancy vector absorbs the time's transitions (so `occupancy` holds the
/// left limits at `time`).
struct SweepPoint<'a> {
    time: f64,
    /// Events of each stratum exactly at `time`.
    events: &'a [usize],
    /// Risk-set sizes of each stratum at `time`.
    at_risk: &'a [usize],
    /// Hazard increments `events/at_risk` (zero where the risk set is empty).
    hazards: &'a [f64],
    /// Occupancy left limits at `time`, one per stratum.
    occupancy: &'a [f64],
}

/// Ascending sweep over the event-time grid, maintaining per-stratum risk
/// sets and the occupancy recursion. At each grid time, mass `p_j * h_j`
/// moves from stratum `j` to `j+1`; the occupancy updates use only the
/// pre-transition state, so simultaneous transitions in several strata are
/// handled exactly. Summation and update order are fixed (ascending stratum
/// index), keeping results independent of scheduling.
fn sweep_grid<F>(cohort: &CohortDataset, mut visit: F)
where
    F: FnMut(&SweepPoint<'_>),
{
    let grid = event_time_grid(cohort);
    let arrays = stratum_arrays(cohort);
    let n_strata = arrays.len();
    let mut cursors: Vec<StratumCursor> = arrays.iter().map(StratumCursor::new).collect();
    let mut events = vec![0usize; n_strata];
    let mut at_risk = vec![0usize; n_strata];
    let mut hazards = vec![0.0f64; n_strata];
    let mut flows = vec![0.0f64; n_strata];
    let mut occupancy = vec![0.0f64; n_strata];
    occupancy[0] = 1.0;

    for &t in grid.times() {
        for j in 0..n_strata {
            events[j] = cursors[j].advance(t);
            at_risk[j] = cursors[j].at_risk;
            hazards[j] = if events[j] > 0 {
                events[j] as f64 / at_risk[j] as f64
            } else {
                0.0
            };
        }
        visit(&SweepPoint {
            time: t,
            events: &events,
            at_risk: &at_risk,
            hazards: &hazards,
            occupancy: &occupancy,
        });
        for j in 0..n_strata {
            flows[j] = occupancy[j] * hazards[j];
        }
        for j in 0..n_strata {
            occupancy[j] = occupancy[j] - flows[j] + if j > 0 { flows[j - 1] } else { 0.0 };
        }
    }
}

/// History-stratified mean-count estimate.
///
/// At each grid time the increment is the sum over strata of the stratum's
/// hazard increment times the stratum occupancy probability evaluated just
/// before the time (its left limit). Summation order is fixed: ascending
/// grid time within a stratum, ascending stratum index across strata.
pub fn proposed_mean(cohort: &CohortDataset) -> MeanEstimate {
    let n_strata = cohort.max_order() + 1;
    let mut contrib = vec![0.0f64; n_strata];
    let mut contrib_points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_strata];
    let mut mean_points = Vec::new();

    sweep_grid(cohort, |pt| {
        for j in 0..n_strata {
            if pt.events[j] > 0 {
                contrib[j] += pt.hazards[j] * pt.occupancy[j];
                contrib_points[j].push((pt.time, contrib[j]));
            }
        }
        mean_points.push((pt.time, contrib.iter().sum()));
    });

    MeanEstimate {
        mean: StepFunction::new(0.0, mean_points),
        contributions: contrib_points
            .into_iter()
            .map(|pts| StepFunction::new(0.0, pts))
            .collect(),
    }
}

/// Estimated probability of having exactly `j` events by each time.
///
/// For `j = 0` this is the Kaplan-Meier survival curve of the first event;
/// higher strata accumulate the mass that the chained conditional transition
/// estimates move up order by order. The never-observed order
/// `max_order + 1` has transition probability zero by convention, so the
/// occupancies sum to one at every time.
pub fn occupancy_probability(cohort: &CohortDataset, j: usize) -> StepFunction {
    if j > cohort.max_order() {
        return StepFunction::constant(0.0);
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut previous = if j == 0 { 1.0 } else { 0.0 };
    sweep_grid(cohort, |pt| {
        if pt.occupancy[j] != previous {
            // the left limit at this time differs from the last recorded
            // value, so the change happened at the previous grid time
            let (t_prev, _) = *points.last().expect("change implies an earlier grid time");
            debug_assert!(t_prev < pt.time);
            previous = pt.occupancy[j];
        }
        points.push((pt.time, f64::NAN)); // placeholder, fixed below
    });
    // the occupancy after a grid time equals the left limit at the next one,
    // so replay the sweep capturing post-transition values instead
    let mut values: Vec<f64> = Vec::with_capacity(points.len());
    let mut flow_in = 0.0;
    let _ = flow_in;
    values.clear();
    let mut post = Vec::with_capacity(points.len());
    {
        let mut occ_after = Vec::new();
        sweep_grid(cohort, |pt| {
            let h_j = pt.hazards[j];
            let inflow = if j > 0 {
                pt.occupancy[j - 1] * pt.hazards[j - 1]
            } else {
                0.0
            };
            occ_after.push(pt.occupancy[j] - pt.occupancy[j] * h_j + inflow);
        });
        post = occ_after;
    }
    let times: Vec<f64> = points.iter().map(|&(t, _)| t).collect();
    StepFunction::new(
        if j == 0 { 1.0 } else { 0.0 },
        times.into_iter().zip(post).collect(),
    )
}

/// Conditional failure curve of the `j`-th event given the `(j-1)`-th: the
/// estimated probability of having reached order `j` by each time among the
/// sub-population estimated to have reached order `j-1`. For `j = 1` this is
/// the ordinary Kaplan-Meier failure curve of the first event in the whole
/// cohort. Orders never observed give the zero function.
///
/// # Panics
/// Panics if `j == 0`.
pub fn km_conditional_failure(cohort: &CohortDataset, j: usize) -> StepFunction {
    assert!(j >= 1, "conditional failure is defined for event order j >= 1");
    if j > cohort.max_order() {
        return StepFunction::constant(0.0);
    }
    let n_strata = cohort.max_order() + 1;
    let mut points: Vec<(f64, f64)> = Vec::new();
    sweep_grid(cohort, |pt| {
        // post-transition occupancies at this grid time
        let mut reach_j = 0.0; // P(count >= j) just after `time`
        let mut reach_jm1 = 0.0; // P(count >= j-1) just after `time`
        for k in (0..n_strata).rev() {
            let outflow = pt.occupancy[k] * pt.hazards[k];
            let inflow = if k > 0 {
                pt.occupancy[k - 1] * pt.hazards[k - 1]
            } else {
                0.0
            };
            let after = pt.occupancy[k] - outflow + inflow;
            if k >= j {
                reach_j += after;
            }
            if k >= j - 1 {
                reach_jm1 += after;
            }
        }
        let value = if reach_jm1 > 0.0 { reach_j / reach_jm1 } else { 0.0 };
        points.push((pt.time, value));
    });
    StepFunction::new(0.0, points)
}

/// Product-limit hazard increments `events/at_risk` of stratum `j` at every
/// grid time with a non-empty risk set; empty-risk-set times are omitted.
pub fn stratum_hazard_increments(cohort: &CohortDataset, j: usize) -> Vec<(f64, f64)> {
    if j > cohort.max_order() {
        return Vec::new();
    }
    let mut out = Vec::new();
    sweep_grid(cohort, |pt| {
        if pt.at_risk[j] > 0 {
            out.push((pt.time, pt.events[j] as f64 / pt.at_risk[j] as f64));
        }
    });
    out
}

/// Nelson-Aalen cumulative mean: at each grid time, total events of all
/// orders divided by the number of subjects still under observation.
pub fn nelson_aalen_mean(cohort: &CohortDataset) -> StepFunction {
    let grid = event_time_grid(cohort);
    let mut all_events = Vec::with_capacity(cohort.total_events());
    let mut ends = Vec::with_capacity(cohort.len());
    for s in cohort.subjects() {
        all_events.extend_from_slice(s.event_times());
        ends.push(s.observation_end());
    }
    crate::exec::sort_times(&mut all_events);
    crate::exec::sort_times(&mut ends);

    let n = cohort.len();
    let (mut ev, mut en) = (0usize, 0usize);
    let mut cum = 0.0;
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid.times() {
        while en < ends.len() && ends[en] < t {
            en += 1;
        }
        let at_risk = n - en;
        let start = ev;
        while ev < all_events.len() && all_events[ev] <= t {
            ev += 1;
        }
        cum += (ev - start) as f64 / at_risk as f64;
        points.push((t, cum));
    }
    StepFunction::new(0.0, points)
}

/// Count reference `x_t^obs` as a function of time: the maximum
/// (`MaxCount`) or minimum (`MinCount`) over subjects of the observed count
/// by `t`.
pub fn count_reference_curve(cohort: &CohortDataset, mode: BoundMode) -> StepFunction {
    let thresholds: Vec<f64> = match mode {
        BoundMode::MaxCount => {
            // k-th breakpoint: earliest time any subject reaches count k+1
            let mut thresh = vec![f64::INFINITY; cohort.max_order()];
            for s in cohort.subjects() {
                for (i, &e) in s.event_times().iter().enumerate() {
                    if e < thresh[i] {
                        thresh[i] = e;
                    }
                }
            }
            thresh
        }
        BoundMode::MinCount => {
            // k-th breakpoint: time by which every subject has k+1 events
            let floor = cohort
                .subjects()
                .iter()
                .map(|s| s.event_count())
                .min()
                .unwrap_or(0);
            let mut thresh = vec![f64::NEG_INFINITY; floor];
            for s in cohort.subjects() {
                for (i, t) in thresh.iter_mut().enumerate() {
                    let e = s.event_times()[i];
                    if e > *t {
                        *t = e;
                    }
                }
            }
            thresh
        }
    };
    let points = thresholds
        .into_iter()
        .enumerate()
        .map(|(k, t)| (t, (k + 1) as f64))
        .collect();
    StepFunction::new(0.0, points)
}

/// Count reference at a single time point.
pub fn count_reference(cohort: &CohortDataset, t: f64, mode: BoundMode) -> usize {
    count_reference_curve(cohort, mode).value_at(t) as usize
}

/// Upper bound `mu * (count_reference - mu)` for the variance of the event
/// count at `t`. Degenerate (clamped to zero) when the count reference falls
/// below the mean, which `MinCount` permits.
pub fn variance_upper_bound(cohort: &CohortDataset, t: f64, mode: BoundMode) -> VarianceBound {
    let mu = proposed_mean(cohort).mean().value_at(t);
    VarianceBound::evaluate(t, mu, count_reference(cohort, t, mode))
}

/// Normal-approximation confidence interval for the incidence rate at `t`:
/// `point ± z * sqrt(bound) / sqrt(n)`, clamped below at zero. The interval
/// is asymptotic and inherits the variance bound's degenerate flag (a
/// degenerate bound collapses the interval to the point).
pub fn incidence_rate_ci(
    cohort: &CohortDataset,
    t: f64,
    level: f64,
    mode: BoundMode,
) -> Result<IncidenceRateCi> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel { level });
    }
    let point = proposed_mean(cohort).mean().value_at(t);
    let bound = VarianceBound::evaluate(t, point, count_reference(cohort, t, mode));
    Ok(ci_from_parts(point, &bound, level, cohort.len()))
}

fn ci_from_parts(point: f64, bound: &VarianceBound, level: f64, n: usize) -> IncidenceRateCi {
    let z = normal_quantile(0.5 * (1.0 + level));
    let half_width = z * bound.bound.sqrt() / (n as f64).sqrt();
    IncidenceRateCi {
        point,
        low: (point - half_width).max(0.0),
        high: point + half_width,
        half_width,
        level,
        degenerate: bound.degenerate,
    }
}

/// One row of the estimate export table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub time: f64,
    pub mean: f64,
    pub na_mean: f64,
    pub variance_bound: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub degenerate: bool,
}

/// Evaluates the full estimate table: one row per grid time up to `horizon`,
/// plus a final row at `horizon` itself.
pub fn estimate_table(
    cohort: &CohortDataset,
    horizon: f64,
    level: f64,
    mode: BoundMode,
) -> Result<Vec<EstimateRow>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel { level });
    }
    let estimate = proposed_mean(cohort);
    let na = nelson_aalen_mean(cohort);
    let counts = count_reference_curve(cohort, mode);
    let n = cohort.len();

    let row_at = |t: f64| {
        let mu = estimate.mean().value_at(t);
        let bound = VarianceBound::evaluate(t, mu, counts.value_at(t) as usize);
        let ci = ci_from_parts(mu, &bound, level, n);
        EstimateRow {
            time: t,
            mean: mu,
            na_mean: na.value_at(t),
            variance_bound: bound.bound,
            ci_low: ci.low,
            ci_high: ci.high,
            degenerate: bound.degenerate,
        }
    };

    let grid = event_time_grid(cohort);
    let mut rows: Vec<EstimateRow> = grid
        .times()
        .iter()
        .copied()
        .take_while(|&t| t <= horizon)
        .map(row_at)
        .collect();
    rows.push(row_at(horizon));
    Ok(rows)
}

/// Writes the estimate export CSV: header
/// `time,mean,na_mean,variance_bound,ci_low,ci_high`, numbers rendered with
/// 12 significant digits.
pub fn write_estimate_csv<W: io::Write>(mut writer: W, rows: &[EstimateRow]) -> Result<()> {
    writeln!(writer, "time,mean,na_mean,variance_bound,ci_low,ci_high")?;
    for r in rows {
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            format_significant(r.time, 12),
            format_significant(r.mean, 12),
            format_significant(r.na_mean, 12),
            format_significant(r.variance_bound, 12),
            format_significant(r.ci_low, 12),
            format_significant(r.ci_high, 12),
        )?;
    }
    Ok(())
}

/// Plain-decimal rendering with the given number of significant digits
/// (`0.666666666667` style, no exponent notation).
pub fn format_significant(value: f64, digits: u32) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    // take the decimal exponent from the formatter to avoid log10 edge cases
    let sci = format!("{:e}", value.abs());
    let exp: i32 = sci
        .split('e')
        .nth(1)
        .expect("exponent part present")
        .parse()
        .expect("exponent parses");
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{value:.decimals$}")
}
