//! Experiment configuration: built-in defaults per experiment, overlaid by a
//! TOML file, overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use seqmc::montecarlo::PriorSpec;
use seqmc::{Engine, ProcedureKind};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Fig1,
    RuntimeDivergence,
    CoverageAudit,
    BoundAudit,
    PartialDecisionAudit,
}

/// Divergence scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `m` hypotheses with uniform p-values under the configured procedure.
    Uniform,
    /// One hypothesis with a uniform p-value, threshold `alpha`.
    Single,
    /// `m` hypotheses drawn from region A of the BH partition.
    RegionA,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Uniform => "uniform",
            Scenario::Single => "single",
            Scenario::RegionA => "region-a",
        }
    }
}

/// Every knob of every experiment. Fields irrelevant to the chosen
/// experiment are carried along unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Hypothesis counts; fig1 produces one curve per entry, the other
    /// experiments use the first.
    pub m: Vec<usize>,
    pub repetitions: usize,
    pub alpha: f64,
    pub procedure: ProcedureKind,
    pub engine: Engine,
    pub epsilon: f64,
    /// Maximum draws per hypothesis; for the divergence run the largest cap.
    pub cap: u64,
    pub master_seed: u64,
    /// Hypotheses left unclassified in fig1.
    pub leave_undecided: usize,
    /// Region A half-width `η` as a fraction of `α_m - α_{m-1}`.
    pub eta_fraction: f64,
    pub scenarios: Vec<Scenario>,
    /// Coverage audit: true p-values and stream length.
    pub coverage_p: Vec<f64>,
    pub horizon: u64,
    /// 0 = one thread per core. Does not affect any output.
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub prior: PriorSpec<f64>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let base = ExperimentConfig {
            experiment,
            m: vec![10, 100],
            repetitions: 1000,
            alpha: 0.1,
            procedure: ProcedureKind::BenjaminiHochberg,
            engine: Engine::ClopperPearson,
            epsilon: 0.01,
            cap: 1_000_000,
            master_seed: 20_240_601,
            leave_undecided: 2,
            eta_fraction: 0.125,
            scenarios: vec![Scenario::Uniform, Scenario::Single, Scenario::RegionA],
            coverage_p: vec![0.01, 0.05, 0.1, 0.5],
            horizon: 10_000,
            workers: 0,
            output: None,
            prior: PriorSpec::SandveMixture {
                pi0: 0.8,
                a: 0.5,
                b: 25.0,
            },
        };
        match experiment {
            ExperimentKind::Fig1 => base,
            ExperimentKind::RuntimeDivergence => ExperimentConfig {
                m: vec![10],
                repetitions: 500,
                procedure: ProcedureKind::Bonferroni,
                cap: 100_000,
                prior: PriorSpec::Uniform01,
                ..base
            },
            ExperimentKind::CoverageAudit | ExperimentKind::BoundAudit | ExperimentKind::PartialDecisionAudit => {
                ExperimentConfig {
                    m: vec![3],
                    ..base
                }
            }
        }
    }

    /// Defaults for `experiment`, overlaid key by key with the TOML file at
    /// `path`. The file's own `experiment` key, if present, wins.
    pub fn load(experiment: ExperimentKind, path: Option<&Path>) -> Result<Self, CliError> {
        let defaults = Self::defaults(experiment);
        let Some(path) = path else { return Ok(defaults) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::overlay(defaults, &text)
    }

    /// Whether the TOML file at `path` sets `experiment` itself.
    pub fn names_experiment(path: &Path) -> Result<bool, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        Ok(file.contains_key("experiment"))
    }

    pub fn overlay(defaults: Self, text: &str) -> Result<Self, CliError> {
        let file: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        let mut merged = toml::Table::try_from(&defaults).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(kind) = file.get("experiment") {
            // start again from the defaults of the experiment the file names
            let kind: ExperimentKind = kind
                .clone()
                .try_into()
                .map_err(|e| CliError::Config(format!("experiment: {e}")))?;
            merged = toml::Table::try_from(Self::defaults(kind)).map_err(|e| CliError::Config(e.to_string()))?;
        }
        for (key, value) in file {
            merged.insert(key, value);
        }
        toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// Field-level validation.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, why: String| Err(CliError::Config(format!("{field}: {why}")));
        if self.m.is_empty() || self.m.contains(&0) {
            return bad("m", format!("every entry must be at least 1, got {:?}", self.m));
        }
        if self.repetitions == 0 {
            return bad("repetitions", "must be at least 1".into());
        }
        for (name, x) in [("alpha", self.alpha), ("epsilon", self.epsilon)] {
            if !(x > 0.0 && x < 1.0) {
                return bad(name, format!("must lie in (0, 1), got {x}"));
            }
        }
        if self.cap == 0 {
            return bad("cap", "must be at least 1".into());
        }
        if let Err(e) = self.prior.validate() {
            return bad("prior", e.to_string());
        }
        match self.experiment {
            ExperimentKind::Fig1 => {
                if let Some(&m) = self.m.iter().find(|&&m| m < self.leave_undecided) {
                    return bad("leave_undecided", format!("{} exceeds m = {m}", self.leave_undecided));
                }
            }
            ExperimentKind::RuntimeDivergence => {
                if self.m[0] < 3 && self.scenarios.iter().any(|&s| s != Scenario::Single) {
                    return bad("m", format!("the multi-hypothesis scenarios need m >= 3, got {}", self.m[0]));
                }
                if !(self.eta_fraction > 0.0 && self.eta_fraction < 0.25) {
                    return bad("eta_fraction", format!("must lie in (0, 0.25), got {}", self.eta_fraction));
                }
                if self.scenarios.is_empty() {
                    return bad("scenarios", "at least one scenario is required".into());
                }
            }
            ExperimentKind::CoverageAudit => {
                if self.horizon == 0 {
                    return bad("horizon", "must be at least 1".into());
                }
                if let Some(p) = self.coverage_p.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
                    return bad("coverage_p", format!("{p} is not a probability"));
                }
            }
            ExperimentKind::BoundAudit | ExperimentKind::PartialDecisionAudit => {}
        }
        Ok(())
    }

    /// SHA-256 of the configuration with the fields that cannot affect the
    /// output (`workers`, `output`) cleared.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig {
            workers: 0,
            output: None,
            ..self.clone()
        };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for kind in [
            ExperimentKind::Fig1,
            ExperimentKind::RuntimeDivergence,
            ExperimentKind::CoverageAudit,
        ] {
            let mut cfg = ExperimentConfig::defaults(kind);
            cfg.output = Some("out.csv".into());
            let text = cfg.to_toml();
            let back = ExperimentConfig::overlay(ExperimentConfig::defaults(ExperimentKind::BoundAudit), &text).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn file_overrides_defaults() {
        let cfg = ExperimentConfig::overlay(
            ExperimentConfig::defaults(ExperimentKind::Fig1),
            "m = [1000]\nprior = { kind = \"uniform01\" }\n",
        )
        .unwrap();
        assert_eq!(cfg.m, vec![1000]);
        assert_eq!(cfg.prior, PriorSpec::Uniform01);
        assert_eq!(cfg.repetitions, 1000);
    }

    #[test]
    fn rejects_unknown_and_invalid_fields() {
        let d = || ExperimentConfig::defaults(ExperimentKind::Fig1);
        assert!(ExperimentConfig::overlay(d(), "colour = 3").is_err());
        assert!(ExperimentConfig::overlay(d(), "alpha = \"high\"").is_err());
        let cfg = ExperimentConfig::overlay(d(), "alpha = 1.5").unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");
        let cfg = ExperimentConfig::overlay(d(), "prior = { kind = \"sandve-mixture\", pi0 = 2.0, a = 1.0, b = 1.0 }").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("prior"));
    }

    #[test]
    fn hash_ignores_workers_and_output() {
        let a = ExperimentConfig::defaults(ExperimentKind::Fig1);
        let b = ExperimentConfig {
            workers: 7,
            output: Some("x.csv".into()),
            ..a.clone()
        };
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig { master_seed: 1, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
    }
}
