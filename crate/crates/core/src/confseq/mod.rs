//! Anytime-valid binomial confidence sequences for a p-value estimated from
//! exceedance indicators.
//!
//! Three engines are provided:
//!
//! * [`ClopperPearson`](Engine::ClopperPearson): exact intervals at a
//!   per-step risk `ρ_n` taken from a [`SpendingSchedule`], intersected over
//!   time. Total miscoverage is at most `Σ ρ_n ≤ ε`.
//! * [`Robbins`](Engine::Robbins): the likelihood-ratio set
//!   `{p : (n+1) C(n,S) p^S (1-p)^(n-S) > ε}`, valid simultaneously for all `n`.
//! * [`Normal`](Engine::Normal): Wald intervals at the same spending levels.
//!   Heuristic only, with no simultaneous coverage guarantee.
//!
//! [`bounds`] holds the analytic length bounds the exact engines are audited
//! against.

pub mod bounds;
mod cp;
mod normal;
mod robbins;
mod root;

use serde::{Deserialize, Serialize};

use crate::error::check_open_unit;
use crate::{Error, Real, Result};

pub use bounds::{cp_length_bound, hoeffding_tail, robbins_length_bound};
pub use cp::{cp_exact_interval, CpSequence};
pub use normal::{normal_interval, NormalSequence};
pub use robbins::{robbins_interval, RobbinsSequence};

/// `n` draws of which `S` were exceedances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinomialCount {
    draws: u64,
    exceedances: u64,
}

impl BinomialCount {
    pub fn new(draws: u64, exceedances: u64) -> Result<Self> {
        if draws == 0 || exceedances > draws {
            return Err(Error::Count { draws, exceedances });
        }
        Ok(Self { draws, exceedances })
    }

    #[inline]
    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn exceedances(&self) -> u64 {
        self.exceedances
    }

    /// Maximum-likelihood estimate `S / n`.
    #[inline]
    pub fn p_hat<T: Real>(&self) -> T {
        T::from_count(self.exceedances) / T::from_count(self.draws)
    }
}

/// A confidence interval for a p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate<T> {
    pub lower: T,
    pub upper: T,
    /// Draw count the interval was built from; 0 for the vacuous prior interval.
    pub n: u64,
    /// Error probability spent to obtain this interval.
    pub risk_spent: T,
    /// Set when the interval had to be repaired: an empty Robbins set, or a
    /// running intersection that no longer contained `S/n`.
    pub flagged: bool,
}

impl<T: Real> IntervalEstimate<T> {
    /// `[0, 1]` before any draws.
    pub fn vacuous() -> Self {
        Self {
            lower: T::zero(),
            upper: T::one(),
            n: 0,
            risk_spent: T::zero(),
            flagged: false,
        }
    }

    pub(crate) fn point(p: T, n: u64, risk_spent: T) -> Self {
        Self {
            lower: p,
            upper: p,
            n,
            risk_spent,
            flagged: true,
        }
    }

    #[inline]
    pub fn length(&self) -> T {
        self.upper - self.lower
    }

    #[inline]
    pub fn contains(&self, p: T) -> bool {
        self.lower <= p && p <= self.upper
    }

    /// `self ⊆ other`.
    pub fn is_within(&self, other: &Self) -> bool {
        other.lower <= self.lower && self.upper <= other.upper
    }
}

/// How the total risk `ε` is spread over the checking times `n = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum SpendingRule<T> {
    /// `ρ_n = 6ε / (π² n²)`.
    Quadratic,
    /// `ρ_n = table[n-1]`; past the end of the table the unspent budget is
    /// spread quadratically over the remaining steps.
    Table { levels: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpendingSchedule<T> {
    epsilon: T,
    rule: SpendingRule<T>,
    table_sum: T,
}

impl<T: Real> SpendingSchedule<T> {
    pub fn quadratic(epsilon: T) -> Result<Self> {
        check_open_unit("epsilon", epsilon)?;
        Ok(Self {
            epsilon,
            rule: SpendingRule::Quadratic,
            table_sum: T::zero(),
        })
    }

    /// The table must be strictly positive and sum to strictly less than
    /// `epsilon`, so that the quadratic continuation keeps every level positive.
    pub fn table(epsilon: T, levels: Vec<T>) -> Result<Self> {
        check_open_unit("epsilon", epsilon)?;
        if let Some(bad) = levels.iter().find(|&&l| !(l > T::zero())) {
            return Err(Error::Spending(format!("level {bad} is not positive")));
        }
        let table_sum = levels.iter().fold(T::zero(), |acc, &l| acc + l);
        if table_sum >= epsilon {
            return Err(Error::Spending(format!(
                "levels sum to {table_sum}, which leaves no budget below epsilon = {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            rule: SpendingRule::Table { levels },
            table_sum,
        })
    }

    #[inline]
    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn rule(&self) -> &SpendingRule<T> {
        &self.rule
    }

    /// Risk `ρ_n` spent at step `n ≥ 1`.
    pub fn level(&self, n: u64) -> T {
        debug_assert!(n >= 1);
        let quadratic = |budget: T, k: u64| {
            let k = T::from_count(k);
            T::lit(6.0) * budget / (T::PI() * T::PI() * k * k)
        };
        match &self.rule {
            SpendingRule::Quadratic => quadratic(self.epsilon, n),
            SpendingRule::Table { levels } => {
                let len = levels.len() as u64;
                if n <= len {
                    levels[(n - 1) as usize]
                } else {
                    quadratic(self.epsilon - self.table_sum, n - len)
                }
            }
        }
    }
}

/// `ρ_n` for the given schedule.
pub fn spending_level<T: Real>(n: u64, schedule: &SpendingSchedule<T>) -> T {
    schedule.level(n)
}

/// A sequence of intervals updated one exceedance indicator at a time.
pub trait ConfidenceSequence<T: Real> {
    /// Feeds one draw and returns the interval after it.
    fn observe(&mut self, exceedance: bool) -> IntervalEstimate<T>;

    /// Latest interval; [`IntervalEstimate::vacuous`] before the first draw.
    fn current(&self) -> IntervalEstimate<T>;

    /// `(n, S)` so far.
    fn tally(&self) -> (u64, u64);
}

/// Choice of confidence-sequence construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    ClopperPearson,
    Robbins,
    Normal,
}

impl Engine {
    /// Starts an empty sequence with total risk `epsilon`; CP and normal use
    /// the quadratic spending rule.
    pub fn start<T: Real>(self, epsilon: T) -> Result<Sequence<T>> {
        Ok(match self {
            Engine::ClopperPearson => Sequence::ClopperPearson(CpSequence::new(SpendingSchedule::quadratic(epsilon)?)),
            Engine::Robbins => Sequence::Robbins(RobbinsSequence::new(epsilon)?),
            Engine::Normal => Sequence::Normal(NormalSequence::new(SpendingSchedule::quadratic(epsilon)?)),
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clopper-pearson" | "cp" => Ok(Engine::ClopperPearson),
            "robbins" => Ok(Engine::Robbins),
            "normal" => Ok(Engine::Normal),
            other => Err(format!("unknown engine `{other}` (expected clopper-pearson, robbins or normal)")),
        }
    }
}

/// Enum dispatch over the three engines.
#[derive(Debug, Clone)]
pub enum Sequence<T> {
    ClopperPearson(CpSequence<T>),
    Robbins(RobbinsSequence<T>),
    Normal(NormalSequence<T>),
}

impl<T: Real> ConfidenceSequence<T> for Sequence<T> {
    #[inline]
    fn observe(&mut self, exceedance: bool) -> IntervalEstimate<T> {
        match self {
            Sequence::ClopperPearson(s) => s.observe(exceedance),
            Sequence::Robbins(s) => s.observe(exceedance),
            Sequence::Normal(s) => s.observe(exceedance),
        }
    }

    fn current(&self) -> IntervalEstimate<T> {
        match self {
            Sequence::ClopperPearson(s) => s.current(),
            Sequence::Robbins(s) => s.current(),
            Sequence::Normal(s) => s.current(),
        }
    }

    fn tally(&self) -> (u64, u64) {
        match self {
            Sequence::ClopperPearson(s) => s.tally(),
            Sequence::Robbins(s) => s.tally(),
            Sequence::Normal(s) => s.tally(),
        }
    }
}
