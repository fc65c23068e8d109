//! Survival function of the number of undecided hypotheses when all but the
//! `leave_undecided` hypotheses closest to a threshold are classified.

use serde::Serialize;
use seqmc::analysis::{empirical_survival, SurvivalCurve};
use seqmc::montecarlo::{run_in_pool, sample_prior, StreamSeed};
use seqmc::procedures::{undecided_count_experiment, ProcedureSpec};

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig1Row {
    pub m: usize,
    pub t: usize,
    pub survival: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Curve {
    pub m: usize,
    /// Undecided count of each repetition.
    pub counts: Vec<usize>,
    pub curve: SurvivalCurve<f64>,
}

impl Fig1Curve {
    /// Lower median of the undecided counts.
    pub fn median(&self) -> usize {
        let mut sorted = self.counts.clone();
        sorted.sort_unstable();
        sorted[(sorted.len() - 1) / 2]
    }
}

/// One curve per configured `m`, evaluated at `t = 0, 1, …, m`.
pub fn run_fig1(config: &ExperimentConfig) -> Result<Vec<Fig1Curve>, CliError> {
    config.validate()?;
    config
        .m
        .iter()
        .map(|&m| {
            let spec = ProcedureSpec::new(config.procedure, config.alpha, m)?;
            let counts = run_in_pool(config.workers, config.repetitions, |r| {
                let seed = StreamSeed::new(config.master_seed, r as u64, m as u64);
                let pvalues = sample_prior(&config.prior, m, seed)?;
                undecided_count_experiment(&spec, &pvalues, config.leave_undecided)
            })?
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            let samples: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let grid: Vec<f64> = (0..=m).map(|t| t as f64).collect();
            let curve = empirical_survival(&samples, &grid)?;
            Ok(Fig1Curve { m, counts, curve })
        })
        .collect()
}

pub fn fig1_rows(curves: &[Fig1Curve]) -> Vec<Fig1Row> {
    curves
        .iter()
        .flat_map(|c| {
            c.curve.values.iter().enumerate().map(move |(t, &survival)| Fig1Row {
                m: c.m,
                t,
                survival,
            })
        })
        .collect()
}
