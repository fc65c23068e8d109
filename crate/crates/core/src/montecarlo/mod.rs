//! P-value priors, seeded exceedance streams and the sequential sampling loop.
//!
//! All randomness is keyed by [`StreamSeed`], so every result is a pure
//! function of the experiment specification and the master seed, whatever
//! the number of worker threads.

mod prior;
mod stream;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confseq::{ConfidenceSequence, Engine, IntervalEstimate};
use crate::error::{check_closed_unit, check_open_unit};
use crate::partition::{Classification, ThresholdPartition};
use crate::procedures::{partial_decisions, DecisionState, ProcedureSpec};
use crate::{Error, Real, Result};

pub use prior::{sample_prior, PriorSpec};
pub use stream::{bernoulli_stream, binomial_counts, BernoulliStream, StreamSeed};

/// Sampling state of one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisState<T> {
    /// Known only to the simulator.
    pub true_p: T,
    pub n: u64,
    pub s: u64,
    pub current_interval: IntervalEstimate<T>,
    pub classification: Classification,
}

impl<T: Real> HypothesisState<T> {
    pub fn new(true_p: T) -> Self {
        Self {
            true_p,
            n: 0,
            s: 0,
            current_interval: IntervalEstimate::vacuous(),
            classification: Classification::Undecided,
        }
    }

    pub fn p_hat(&self) -> T {
        if self.n == 0 {
            T::zero()
        } else {
            T::from_count(self.s) / T::from_count(self.n)
        }
    }
}

/// Stopping times of one hypothesis.
///
/// `tau_operational` is the first `n` at which the interval is classified
/// into a cell; `tau_theoretical` the first `n` with `|S/n - p| < D/2` and
/// interval length `< D/2`. Either equals the cap, with its flag set, if it
/// was not reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRecord<T> {
    pub tau_operational: u64,
    pub tau_theoretical: u64,
    pub truncated: bool,
    pub theoretical_truncated: bool,
    /// `D`: distance from the true p-value to the nearest cell boundary.
    pub boundary_distance: T,
    /// `D = 0`; nothing was sampled and both times are the cap.
    pub on_boundary: bool,
    /// Cell reported at `tau_operational`.
    pub decided_cell: Option<usize>,
    pub final_state: HypothesisState<T>,
}

impl<T: Real> StoppingRecord<T> {
    /// Per-hypothesis time used for order statistics.
    pub fn tau(&self, kind: StoppingKind) -> u64 {
        match kind {
            StoppingKind::Operational => self.tau_operational,
            StoppingKind::Theoretical => self.tau_theoretical,
        }
    }

    pub fn is_truncated(&self, kind: StoppingKind) -> bool {
        match kind {
            StoppingKind::Operational => self.truncated,
            StoppingKind::Theoretical => self.theoretical_truncated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoppingKind {
    Operational,
    Theoretical,
}

/// Samples one hypothesis until both stopping times are reached or `cap`
/// draws have been made.
pub fn run_hypothesis<T: Real>(
    true_p: T,
    engine: Engine,
    partition: &ThresholdPartition<T>,
    epsilon: T,
    cap: u64,
    seed: StreamSeed,
) -> Result<StoppingRecord<T>> {
    check_closed_unit("true_p", true_p)?;
    check_open_unit("epsilon", epsilon)?;
    if cap == 0 {
        return Err(Error::out_of_range("cap", "[1, inf)", 0.0));
    }
    let distance = partition.min_boundary_distance(true_p)?;
    let mut state = HypothesisState::new(true_p);
    if distance == T::zero() {
        return Ok(StoppingRecord {
            tau_operational: cap,
            tau_theoretical: cap,
            truncated: true,
            theoretical_truncated: true,
            boundary_distance: distance,
            on_boundary: true,
            decided_cell: None,
            final_state: state,
        });
    }

    let half_d = distance * T::lit(0.5);
    let mut sequence = engine.start(epsilon)?;
    let mut stream = bernoulli_stream(true_p, seed);
    let mut operational: Option<(u64, usize)> = None;
    let mut theoretical: Option<u64> = None;
    for n in 1..=cap {
        let x = stream.next().expect("endless stream");
        let interval = sequence.observe(x);
        state.n = n;
        state.s += u64::from(x);
        state.current_interval = interval;
        state.classification = partition.classify(interval.lower, interval.upper);
        if operational.is_none() {
            if let Classification::Decided(j) = state.classification {
                operational = Some((n, j));
            }
        }
        if theoretical.is_none() && (state.p_hat() - true_p).abs() < half_d && interval.length() < half_d {
            theoretical = Some(n);
        }
        if operational.is_some() && theoretical.is_some() {
            break;
        }
    }

    Ok(StoppingRecord {
        tau_operational: operational.map_or(cap, |(n, _)| n),
        tau_theoretical: theoretical.unwrap_or(cap),
        truncated: operational.is_none(),
        theoretical_truncated: theoretical.is_none(),
        boundary_distance: distance,
        on_boundary: false,
        decided_cell: operational.map(|(_, j)| j),
        final_state: state,
    })
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec<T> {
    pub prior: PriorSpec<T>,
    pub procedure: ProcedureSpec<T>,
    pub engine: Engine,
    pub epsilon: T,
    pub cap: u64,
    pub repetitions: usize,
    pub master_seed: u64,
}

/// One repetition: the sampled p-values, each hypothesis' stopping record and
/// the decisions forced by the cells found at the operational stopping times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord<T> {
    pub repetition: usize,
    pub pvalues: Vec<T>,
    pub stops: Vec<StoppingRecord<T>>,
    pub decisions: DecisionState,
}

/// Runs `spec.repetitions` repetitions on `workers` threads (0 = one per
/// core). Output is identical for every worker count.
pub fn run_experiment<T: Real>(spec: &ExperimentSpec<T>, workers: usize) -> Result<Vec<RepetitionRecord<T>>> {
    let partition = spec.procedure.partition()?;
    let m = spec.procedure.m;
    let pvalues = (0..spec.repetitions)
        .map(|r| sample_prior(&spec.prior, m, StreamSeed::new(spec.master_seed, r as u64, 0)))
        .collect::<Result<Vec<_>>>()?;

    let stops = run_in_pool(workers, spec.repetitions * m, |unit| {
        let (r, h) = (unit / m, unit % m);
        run_hypothesis(
            pvalues[r][h],
            spec.engine,
            &partition,
            spec.epsilon,
            spec.cap,
            StreamSeed::new(spec.master_seed, r as u64, h as u64),
        )
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    pvalues
        .into_iter()
        .zip(stops.chunks(m.max(1)))
        .enumerate()
        .map(|(repetition, (pvalues, stops))| {
            let knowledge: Vec<Classification> = stops
                .iter()
                .map(|s| s.decided_cell.map_or(Classification::Undecided, Classification::Decided))
                .collect();
            Ok(RepetitionRecord {
                repetition,
                decisions: partial_decisions(&spec.procedure, &knowledge, &partition)?,
                pvalues,
                stops: stops.to_vec(),
            })
        })
        .collect()
}

/// `f(0), …, f(count - 1)` computed on a pool of `workers` threads
/// (0 = one per core), returned in index order.
pub fn run_in_pool<R: Send>(workers: usize, count: usize, f: impl Fn(usize) -> R + Sync + Send) -> Result<Vec<R>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(f).collect()))
}
