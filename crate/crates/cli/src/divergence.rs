//! Truncated means of stopping-time order statistics across growing caps.
//!
//! Each scenario is simulated once at the largest cap; `min(τ, N)` for a
//! smaller cap `N` is exact from those runs.

use serde::Serialize;
use seqmc::analysis::{expected_truncated_wald, order_statistic, truncated_mean};
use seqmc::montecarlo::{run_experiment, ExperimentSpec, PriorSpec, RepetitionRecord, StoppingKind};
use seqmc::partition::Classification;
use seqmc::procedures::{partial_decisions, ProcedureKind, ProcedureSpec};

use crate::config::{ExperimentConfig, Scenario};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub scenario: String,
    pub cap: u64,
    pub statistic: String,
    pub value: f64,
    /// Fraction of repetitions whose statistic reached the cap; empty for
    /// the analytic oracle rows.
    pub truncated_fraction: Option<f64>,
}

/// `10³, 10⁴, …` up to and including `cap`; just `cap` when it is below 10³.
pub fn cap_grid(cap: u64) -> Vec<u64> {
    let mut caps: Vec<u64> = std::iter::successors(Some(1000u64), |c| c.checked_mul(10))
        .take_while(|&c| c <= cap)
        .collect();
    if caps.last() != Some(&cap) {
        caps.push(cap);
    }
    caps
}

/// The experiment behind one scenario.
pub fn scenario_spec(config: &ExperimentConfig, scenario: Scenario) -> Result<ExperimentSpec<f64>, CliError> {
    let m = config.m[0];
    let (procedure, prior) = match scenario {
        Scenario::Uniform => (ProcedureSpec::new(config.procedure, config.alpha, m)?, PriorSpec::Uniform01),
        Scenario::Single => (ProcedureSpec::new(config.procedure, config.alpha, 1)?, PriorSpec::Uniform01),
        Scenario::RegionA => {
            let bh = ProcedureSpec::new(ProcedureKind::BenjaminiHochberg, config.alpha, m)?;
            let alphas = bh.thresholds();
            let eta = config.eta_fraction * (alphas[m - 1] - alphas[m - 2]);
            (bh, PriorSpec::region_a(&bh.partition()?, eta)?)
        }
    };
    Ok(ExperimentSpec {
        prior,
        procedure,
        engine: config.engine,
        epsilon: config.epsilon,
        cap: config.cap,
        repetitions: config.repetitions,
        master_seed: config.master_seed,
    })
}

/// Named per-repetition statistics of a scenario: order statistics of both
/// stopping times and the first time any decision is forced.
pub fn repetition_statistics(
    records: &[RepetitionRecord<f64>],
    procedure: &ProcedureSpec<f64>,
    cap: u64,
) -> Result<Vec<(String, Vec<u64>)>, CliError> {
    let m = procedure.m;
    let mut ranks = vec![("1", 1)];
    if m >= 3 {
        ranks.push(("m-2", m - 2));
    }
    if m >= 2 {
        ranks.push(("m", m));
    }
    let mut stats = Vec::new();
    for (label, kind) in [("theoretical", StoppingKind::Theoretical), ("operational", StoppingKind::Operational)] {
        for &(name, r) in &ranks {
            let values = records
                .iter()
                .map(|rec| {
                    let taus: Vec<u64> = rec.stops.iter().map(|s| s.tau(kind)).collect();
                    order_statistic(&taus, r)
                })
                .collect::<Result<Vec<_>, _>>()?;
            stats.push((format!("{label}:tau({name})"), values));
        }
    }
    let first = records
        .iter()
        .map(|rec| first_forced_decision(rec, procedure, cap))
        .collect::<Result<Vec<_>, _>>()?;
    stats.push(("operational:first-decision".to_string(), first));
    Ok(stats)
}

/// Earliest operational stopping time at which the cells known so far force
/// at least one decision; `cap` if that never happens.
pub fn first_forced_decision(
    record: &RepetitionRecord<f64>,
    procedure: &ProcedureSpec<f64>,
    cap: u64,
) -> Result<u64, CliError> {
    let partition = procedure.partition()?;
    let mut times: Vec<u64> = record
        .stops
        .iter()
        .filter(|s| s.decided_cell.is_some())
        .map(|s| s.tau_operational)
        .collect();
    times.sort_unstable();
    times.dedup();
    for t in times {
        let knowledge: Vec<Classification> = record
            .stops
            .iter()
            .map(|s| match s.decided_cell {
                Some(j) if s.tau_operational <= t => Classification::Decided(j),
                _ => Classification::Undecided,
            })
            .collect();
        let state = partial_decisions(procedure, &knowledge, &partition)?;
        if state.undecided.len() < procedure.m {
            return Ok(t);
        }
    }
    Ok(cap)
}

/// Rows for every configured scenario, cap and statistic.
pub fn run_divergence(config: &ExperimentConfig) -> Result<Vec<DivergenceRow>, CliError> {
    config.validate()?;
    let caps = cap_grid(config.cap);
    let mut rows = Vec::new();
    for &scenario in &config.scenarios {
        let spec = scenario_spec(config, scenario)?;
        let records = run_experiment(&spec, config.workers)?;
        for (statistic, values) in repetition_statistics(&records, &spec.procedure, config.cap)? {
            let samples: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            for &cap in &caps {
                let reached = values.iter().filter(|&&v| v >= cap).count();
                rows.push(DivergenceRow {
                    scenario: scenario.name().to_string(),
                    cap,
                    statistic: statistic.clone(),
                    value: truncated_mean(&samples, cap as f64)?,
                    truncated_fraction: Some(reached as f64 / values.len() as f64),
                });
            }
        }
        if scenario == Scenario::Single {
            for &cap in &caps {
                rows.push(DivergenceRow {
                    scenario: "single".to_string(),
                    cap,
                    statistic: "wald-bound-oracle".to_string(),
                    value: expected_truncated_wald(config.alpha, config.epsilon, cap as f64, 1e-12, 1.0 - 1e-12)?,
                    truncated_fraction: None,
                });
            }
        }
    }
    Ok(rows)
}
