use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seqmc::analysis::wald_lower_bound;
use seqmc_cli::audit::{run_audits, ALL_AUDITS};
use seqmc_cli::divergence::run_divergence;
use seqmc_cli::fig1::{fig1_rows, run_fig1};
use seqmc_cli::output::{csv_bytes, emit};
use seqmc_cli::{CliError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "seqmc", version, about = "Sequential Monte Carlo multiple-testing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Survival curves of the undecided-hypothesis count.
    Fig1(Common),
    /// Truncated means of stopping-time order statistics across caps.
    Diverge(Common),
    /// Length-bound, coverage and partial-decision audits; exits 1 on any violation.
    Audit(Common),
    /// Wald's lower bound on the expected number of draws.
    Wald {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        epsilon: f64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file overriding the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
}

impl Common {
    fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::load(kind, self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        if let Some(cap) = self.cap {
            cfg.cap = cap;
        }
        if let Some(reps) = self.reps {
            cfg.repetitions = reps;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Fig1(common) => {
            let cfg = common.resolve(ExperimentKind::Fig1)?;
            let curves = run_fig1(&cfg)?;
            for c in &curves {
                eprintln!("m={}: median undecided count {}", c.m, c.median());
            }
            emit(&cfg, &csv_bytes(&cfg, &fig1_rows(&curves))?)?;
        }
        Command::Diverge(common) => {
            let cfg = common.resolve(ExperimentKind::RuntimeDivergence)?;
            let rows = run_divergence(&cfg)?;
            emit(&cfg, &csv_bytes(&cfg, &rows)?)?;
        }
        Command::Audit(common) => {
            let cfg = common.resolve(ExperimentKind::CoverageAudit)?;
            // a config file naming one audit runs just that one
            let which = match &common.config {
                Some(path) if ExperimentConfig::names_experiment(path)? && ALL_AUDITS.contains(&cfg.experiment) => {
                    vec![cfg.experiment]
                }
                _ => ALL_AUDITS.to_vec(),
            };
            let reports = run_audits(&cfg, &which)?;
            let text: String = reports.iter().map(|r| r.render()).collect();
            emit(&cfg, text.as_bytes())?;
            if reports.iter().any(|r| !r.passed()) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Wald { p1, alpha, epsilon } => {
            let value = wald_lower_bound(p1, alpha, epsilon).map_err(|e| CliError::Config(e.to_string()))?;
            println!("{value}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
