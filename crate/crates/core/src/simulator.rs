//! Synthetic cohort generation and replicate studies.
//!
//! Each subject draws successive inter-event gaps from per-order exponential
//! distributions (so the event intensity changes with each occurrence), a
//! competing exponential drop-out time, and is administratively truncated at
//! the scenario cutoff.
//!
//! # Reproducibility
//!
//! Everything is a pure function of `(params, seed)`:
//!
//! - subject `k` of a cohort draws from its own `ChaCha12` stream
//!   (`rand_chacha` 0.3): the 32-byte key is the first four outputs of a
//!   SplitMix64 sequence seeded with the cohort seed, and the ChaCha stream
//!   number is `k`;
//! - within a subject the draw order is fixed: one gap per event order,
//!   then the drop-out time (drawn only when the drop-out rate is positive);
//! - uniforms map a 53-bit draw to the open interval (0, 1) via
//!   `(bits + 0.5) * 2^-53`, and exponentials are inverse-CDF transforms
//!   `-ln(u) / rate`, so gaps are strictly positive;
//! - replicate `r` of a study uses the `r`-th output of a SplitMix64
//!   sequence seeded with the base seed as its cohort seed.
//!
//! Per-subject and per-replicate streams make the parallel and sequential
//! paths bit-identical, whatever the thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::estimators::{nelson_aalen_mean, proposed_mean};
use crate::event_data::{CohortDataset, EndKind, SubjectHistory};
use crate::exec;

/// Scenario definition for cohort generation.
///
/// Rates are per day; the cutoff is in days. A subject can accumulate at
/// most `gap_rates.len()` events, one per configured order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    n_subjects: usize,
    gap_rates: Vec<f64>,
    dropout_rate: f64,
    admin_cutoff: f64,
}

impl ScenarioParams {
    /// Validates rates and cutoff. A zero `n_subjects` is accepted here and
    /// surfaces as [`Error::EmptyCohort`] when a cohort is generated.
    pub fn new(
        n_subjects: usize,
        gap_rates: Vec<f64>,
        dropout_rate: f64,
        admin_cutoff: f64,
    ) -> Result<Self> {
        if gap_rates.is_empty() {
            return Err(Error::InvalidScenario(
                "at least one event-order rate is required".into(),
            ));
        }
        if gap_rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidScenario(
                "event rates must be finite and >= 0".into(),
            ));
        }
        if !dropout_rate.is_finite() || dropout_rate < 0.0 {
            return Err(Error::InvalidScenario(
                "drop-out rate must be finite and >= 0".into(),
            ));
        }
        if !admin_cutoff.is_finite() || admin_cutoff <= 0.0 {
            return Err(Error::InvalidScenario("cutoff must be positive".into()));
        }
        Ok(Self {
            n_subjects,
            gap_rates,
            dropout_rate,
            admin_cutoff,
        })
    }

    pub fn n_subjects(&self) -> usize {
        self.n_subjects
    }

    /// Exponential rate per event order; the length is the event cap.
    pub fn gap_rates(&self) -> &[f64] {
        &self.gap_rates
    }

    pub fn max_events(&self) -> usize {
        self.gap_rates.len()
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn admin_cutoff(&self) -> f64 {
        self.admin_cutoff
    }
}

/// Per-replicate comparison record evaluated at the scenario cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateSummary {
    pub replicate_index: usize,
    pub na_at_horizon: f64,
    pub proposed_at_horizon: f64,
    pub max_count_observed: usize,
}

/// SplitMix64 sequence (Steele, Lea & Flood): used for seed derivation only.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }
}

impl Iterator for SplitMix64 {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Some(z ^ (z >> 31))
    }
}

fn subject_rng(cohort_seed: u64, subject_index: usize) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip(SplitMix64::new(cohort_seed)) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(subject_index as u64);
    rng
}

/// Uniform draw on the open interval (0, 1), 53-bit resolution.
fn unit_open(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF exponential draw; rate 0 means the event never happens.
fn exponential(rng: &mut ChaCha12Rng, rate: f64) -> f64 {
    let u = unit_open(rng);
    if rate == 0.0 {
        f64::INFINITY
    } else {
        -u.ln() / rate
    }
}

fn simulate_subject(params: &ScenarioParams, cohort_seed: u64, index: usize) -> SubjectHistory {
    let mut rng = subject_rng(cohort_seed, index);
    let mut events = Vec::with_capacity(params.max_events());
    let mut t = 0.0_f64;
    for &rate in &params.gap_rates {
        t += exponential(&mut rng, rate);
        events.push(t);
    }
    let dropout = if params.dropout_rate > 0.0 {
        exponential(&mut rng, params.dropout_rate)
    } else {
        f64::INFINITY
    };
    let observation_end = dropout.min(params.admin_cutoff);
    events.retain(|&e| e <= observation_end);
    let end_kind = if dropout < params.admin_cutoff {
        EndKind::Dropout
    } else {
        EndKind::Administrative
    };
    SubjectHistory::new(format!("S{}", index + 1), events, observation_end, end_kind)
        .expect("generated histories satisfy the data invariants")
}

/// Generates one cohort; identical `(params, seed)` yield identical cohorts
/// on every platform and thread count.
pub fn simulate_cohort(params: &ScenarioParams, seed: u64) -> Result<CohortDataset> {
    CohortDataset::new(exec::map_indexed(params.n_subjects, |k| {
        simulate_subject(params, seed, k)
    }))
}

/// Sequential twin of [`simulate_cohort`]; always runs on the calling
/// thread and must produce identical output.
pub fn simulate_cohort_seq(params: &ScenarioParams, seed: u64) -> Result<CohortDataset> {
    CohortDataset::new(exec::map_indexed_seq(params.n_subjects, |k| {
        simulate_subject(params, seed, k)
    }))
}

fn summarize(index: usize, cohort: &CohortDataset, horizon: f64) -> ReplicateSummary {
    ReplicateSummary {
        replicate_index: index,
        na_at_horizon: nelson_aalen_mean(cohort).value_at(horizon),
        proposed_at_horizon: proposed_mean(cohort).mean().value_at(horizon),
        max_count_observed: cohort
            .subjects()
            .iter()
            .map(|s| s.count_at(horizon))
            .max()
            .unwrap_or(0),
    }
}

fn replicate_seeds(base_seed: u64, n_replicates: usize) -> Vec<u64> {
    SplitMix64::new(base_seed).take(n_replicates).collect()
}

/// Runs `n_replicates` independent simulations and evaluates both estimators
/// at the scenario cutoff. Output order is by replicate index and the values
/// are independent of scheduling.
pub fn run_replicates(
    params: &ScenarioParams,
    n_replicates: usize,
    base_seed: u64,
) -> Result<Vec<ReplicateSummary>> {
    if params.n_subjects == 0 {
        return Err(Error::EmptyCohort);
    }
    let seeds = replicate_seeds(base_seed, n_replicates);
    Ok(exec::map_indexed(n_replicates, |r| {
        let cohort = simulate_cohort(params, seeds[r]).expect("n_subjects > 0");
        summarize(r, &cohort, params.admin_cutoff)
    }))
}

/// Sequential twin of [`run_replicates`].
pub fn run_replicates_seq(
    params: &ScenarioParams,
    n_replicates: usize,
    base_seed: u64,
) -> Result<Vec<ReplicateSummary>> {
    if params.n_subjects == 0 {
        return Err(Error::EmptyCohort);
    }
    let seeds = replicate_seeds(base_seed, n_replicates);
    Ok(exec::map_indexed_seq(n_replicates, |r| {
        let cohort = simulate_cohort_seq(params, seeds[r]).expect("n_subjects > 0");
        summarize(r, &cohort, params.admin_cutoff)
    }))
}

/// Writes the replicate summary CSV: header
/// `replicate,na_at_horizon,proposed_at_horizon,max_count`.
pub fn write_replicate_csv<W: std::io::Write>(
    mut writer: W,
    summaries: &[ReplicateSummary],
) -> Result<()> {
    writeln!(writer, "replicate,na_at_horizon,proposed_at_horizon,max_count")?;
    for s in summaries {
        writeln!(
            writer,
            "{},{},{},{}",
            s.replicate_index, s.na_at_horizon, s.proposed_at_horizon, s.max_count_observed
        )?;
    }
    Ok(())
}
