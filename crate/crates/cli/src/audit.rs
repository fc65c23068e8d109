//! Property audits runnable from the command line: interval length bounds,
//! anytime coverage, and partial decisions against the brute-force oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqmc::confseq::{
    cp_exact_interval, cp_length_bound, robbins_interval, robbins_length_bound, BinomialCount, ConfidenceSequence,
    Engine,
};
use seqmc::montecarlo::{bernoulli_stream, binomial_counts, run_in_pool, StreamSeed};
use seqmc::partition::Classification;
use seqmc::procedures::{brute_force_decisions, partial_decisions, ProcedureKind, ProcedureSpec};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::CliError;

const KEPT_VIOLATIONS: usize = 20;

/// Outcome of one audit. Only the first few offending inputs are kept.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuditReport {
    pub name: String,
    pub checked: u64,
    pub violation_count: u64,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl AuditReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Self::default()
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violation_count += 1;
            if self.violations.len() < KEPT_VIOLATIONS {
                self.violations.push(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{}: {} ({} checked, {} violations)\n",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checked,
            self.violation_count
        );
        for note in &self.notes {
            out += &format!("  {note}\n");
        }
        for v in &self.violations {
            out += &format!("  violation: {v}\n");
        }
        if self.violation_count as usize > self.violations.len() {
            out += &format!("  … {} more\n", self.violation_count as usize - self.violations.len());
        }
        out
    }
}

pub const CP_AUDIT_N: [u64; 7] = [10, 31, 100, 316, 1000, 3162, 10_000];
pub const CP_AUDIT_RHO: [f64; 3] = [0.05, 0.01, 1e-4];
pub const ROBBINS_AUDIT_N: [u64; 7] = [1000, 3162, 10_000, 31_623, 100_000, 316_228, 1_000_000];
pub const ROBBINS_AUDIT_P: [f64; 3] = [0.01, 0.1, 0.5];

/// Clopper–Pearson length at per-side level `ρ` against
/// `2 sqrt(-ln ρ / 2n)`, for every `S` at every grid `n`.
pub fn cp_bound_audit(ns: &[u64], rhos: &[f64]) -> Result<AuditReport, CliError> {
    let mut report = AuditReport::new("cp length bound");
    for &n in ns {
        for &rho in rhos {
            let bound = cp_length_bound(n, rho);
            for s in 0..=n {
                let ci = cp_exact_interval(BinomialCount::new(n, s)?, rho)?;
                report.check(ci.length() <= bound, || {
                    format!("n={n} S={s} rho={rho}: length {} > {bound}", ci.length())
                });
            }
        }
    }
    Ok(report)
}

/// Robbins length at `epsilon` against `n^(-1/2) sqrt(ln(4 n ln n))` for
/// `draws` counts `S ~ Binomial(n, p)` per grid point.
///
/// Notes the smallest grid `n₀` from which every larger grid point complies,
/// per `p` and overall.
pub fn robbins_bound_audit(
    ns: &[u64],
    ps: &[f64],
    epsilon: f64,
    draws: usize,
    seed: u64,
) -> Result<AuditReport, CliError> {
    let mut report = AuditReport::new("robbins length bound");
    let mut complies = vec![vec![true; ns.len()]; ps.len()];
    for (i, &p) in ps.iter().enumerate() {
        for (k, &n) in ns.iter().enumerate() {
            let bound = robbins_length_bound::<f64>(n)?;
            let mut worst = 0.0f64;
            for s in binomial_counts(n, p, draws, StreamSeed::new(seed, i as u64, k as u64)) {
                let ci = robbins_interval(BinomialCount::new(n, s)?, epsilon)?;
                worst = worst.max(ci.length());
                report.check(ci.length() <= bound, || {
                    format!("p={p} n={n} S={s}: length {:.6} > {bound:.6}", ci.length())
                });
            }
            complies[i][k] = worst <= bound;
        }
    }
    let n0 = |flags: &[bool]| {
        let from = flags.iter().rposition(|&ok| !ok).map_or(0, |k| k + 1);
        ns.get(from).map_or("none on the grid".to_string(), |n| n.to_string())
    };
    for (i, &p) in ps.iter().enumerate() {
        report.notes.push(format!("p={p}: n0 = {}", n0(&complies[i])));
    }
    let all: Vec<bool> = (0..ns.len()).map(|k| complies.iter().all(|c| c[k])).collect();
    report.notes.push(format!("all p: n0 = {}", n0(&all)));
    Ok(report)
}

/// Coverage cell: fraction of streams whose interval ever missed `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCell {
    pub engine: Engine,
    pub p: f64,
    pub misses: usize,
    pub streams: usize,
    pub limit: f64,
}

impl CoverageCell {
    pub fn fraction(&self) -> f64 {
        self.misses as f64 / self.streams as f64
    }

    pub fn passed(&self) -> bool {
        self.fraction() <= self.limit
    }
}

/// Runs `streams` sequences of `horizon` draws per engine and `p`; a cell
/// passes when its miss fraction is at most `ε + 3 sqrt(ε(1-ε)/streams)`.
pub fn coverage_audit(
    engines: &[Engine],
    ps: &[f64],
    epsilon: f64,
    horizon: u64,
    streams: usize,
    seed: u64,
    workers: usize,
) -> Result<(AuditReport, Vec<CoverageCell>), CliError> {
    let mut report = AuditReport::new("anytime coverage");
    let mut cells = Vec::new();
    let limit = epsilon + 3.0 * (epsilon * (1.0 - epsilon) / streams as f64).sqrt();
    for (e, &engine) in engines.iter().enumerate() {
        for (i, &p) in ps.iter().enumerate() {
            let missed = run_in_pool(workers, streams, |r| -> Result<bool, CliError> {
                let mut seq = engine.start(epsilon)?;
                let stream_seed = StreamSeed::new(seed, r as u64, (e * ps.len() + i) as u64);
                Ok(bernoulli_stream(p, stream_seed)
                    .take(horizon as usize)
                    .any(|x| !seq.observe(x).contains(p)))
            })?
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
            let cell = CoverageCell {
                engine,
                p,
                misses: missed.iter().filter(|&&m| m).count(),
                streams,
                limit,
            };
            report.check(cell.passed(), || {
                format!("{engine:?} p={p}: {} of {streams} streams missed (limit {limit:.4})", cell.misses)
            });
            report.notes.push(format!(
                "{engine:?} p={p}: miss fraction {:.4} (limit {limit:.4})",
                cell.fraction()
            ));
            cells.push(cell);
        }
    }
    Ok((report, cells))
}

const KINDS: [ProcedureKind; 3] = [ProcedureKind::Bonferroni, ProcedureKind::BenjaminiHochberg, ProcedureKind::Holm];

fn compare(report: &mut AuditReport, spec: &ProcedureSpec<f64>, knowledge: &[Classification]) -> Result<(), CliError> {
    let partition = spec.partition()?;
    let fast = partial_decisions(spec, knowledge, &partition)?;
    let slow = brute_force_decisions(spec, knowledge, &partition)?;
    report.check(fast == slow, || {
        format!("{:?} m={} knowledge {knowledge:?}: {fast:?} vs oracle {slow:?}", spec.kind, spec.m)
    });
    Ok(())
}

/// Every knowledge vector for `m` in `exhaustive_m`, and `random` random
/// vectors for each `m` in `random_m`, under all three procedures.
pub fn partial_decision_audit(
    alpha: f64,
    exhaustive_m: &[usize],
    random_m: &[usize],
    random: usize,
    seed: u64,
) -> Result<AuditReport, CliError> {
    let mut report = AuditReport::new("partial decisions vs brute force");
    for &m in exhaustive_m {
        for kind in KINDS {
            let spec = ProcedureSpec::new(kind, alpha, m)?;
            // each entry: Undecided or one of the K + 1 cells
            let options = spec.thresholds().len() + 2;
            let total = options.pow(m as u32);
            for code in 0..total {
                let knowledge: Vec<Classification> = (0..m)
                    .map(|i| match (code / options.pow(i as u32)) % options {
                        0 => Classification::Undecided,
                        c => Classification::Decided(c - 1),
                    })
                    .collect();
                compare(&mut report, &spec, &knowledge)?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &m in random_m {
        for _ in 0..random {
            let kind = KINDS[rng.random_range(0..KINDS.len())];
            let spec = ProcedureSpec::new(kind, alpha, m)?;
            let cells = spec.thresholds().len() + 1;
            let knowledge: Vec<Classification> = (0..m)
                .map(|_| {
                    if rng.random_bool(1.0 / 3.0) {
                        Classification::Undecided
                    } else {
                        Classification::Decided(rng.random_range(0..cells))
                    }
                })
                .collect();
            compare(&mut report, &spec, &knowledge)?;
        }
    }
    Ok(report)
}

/// The audits named in `which` (any of the three audit kinds), with the
/// parameters from `config`.
pub fn run_audits(config: &ExperimentConfig, which: &[ExperimentKind]) -> Result<Vec<AuditReport>, CliError> {
    config.validate()?;
    let mut reports = Vec::new();
    if which.contains(&ExperimentKind::BoundAudit) {
        reports.push(cp_bound_audit(&CP_AUDIT_N, &CP_AUDIT_RHO)?);
        reports.push(robbins_bound_audit(
            &ROBBINS_AUDIT_N,
            &ROBBINS_AUDIT_P,
            config.epsilon,
            50,
            config.master_seed,
        )?);
    }
    if which.contains(&ExperimentKind::CoverageAudit) {
        let (report, _) = coverage_audit(
            &[Engine::ClopperPearson, Engine::Robbins],
            &config.coverage_p,
            config.epsilon,
            config.horizon,
            config.repetitions,
            config.master_seed,
            config.workers,
        )?;
        reports.push(report);
    }
    if which.contains(&ExperimentKind::PartialDecisionAudit) {
        reports.push(partial_decision_audit(config.alpha, &[2, 3], &[4, 5], 10_000, config.master_seed)?);
    }
    Ok(reports)
}

pub const ALL_AUDITS: [ExperimentKind; 3] = [
    ExperimentKind::BoundAudit,
    ExperimentKind::CoverageAudit,
    ExperimentKind::PartialDecisionAudit,
];
