//! Sequential Monte Carlo multiple testing.
//!
//! Unknown p-values are approximated by streams of Bernoulli exceedance
//! indicators. Each stream feeds an anytime-valid confidence sequence
//! ([`confseq`]); the running interval is classified into a cell of the
//! threshold partition ([`partition`]); a multiple-testing procedure then
//! reports which decisions are already forced by what is known
//! ([`procedures`]). [`montecarlo`] drives the sampling loop and measures
//! stopping times, and [`analysis`] turns those into survival curves,
//! truncated means and tail-exponent fits.
//!
//! All numerical code is generic over [`Real`]; the `*64` aliases below fix
//! the scalar to `f64`, which is what the experiments use.

pub mod analysis;
pub mod binomial;
pub mod confseq;
mod error;
pub mod montecarlo;
pub mod partition;
pub mod procedures;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance for interval endpoints found by root bracketing.
    ///
    /// `f32` cannot resolve `1e-10` near 1, so it gets a looser tolerance.
    fn root_tolerance() -> Self;

    /// Converts an `f64` literal. Never fails for the two provided impls.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }
}

impl Real for f32 {
    fn root_tolerance() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn root_tolerance() -> Self {
        1e-10
    }
}

pub type BinomialCount = confseq::BinomialCount;
pub type IntervalEstimate64 = confseq::IntervalEstimate<f64>;
pub type SpendingSchedule64 = confseq::SpendingSchedule<f64>;
pub type ThresholdPartition64 = partition::ThresholdPartition<f64>;
pub type ProcedureSpec64 = procedures::ProcedureSpec<f64>;
pub type PriorSpec64 = montecarlo::PriorSpec<f64>;
pub type HypothesisState64 = montecarlo::HypothesisState<f64>;
pub type StoppingRecord64 = montecarlo::StoppingRecord<f64>;
pub type RepetitionRecord64 = montecarlo::RepetitionRecord<f64>;
pub type SurvivalCurve64 = analysis::SurvivalCurve<f64>;
pub type TailFit64 = analysis::TailFit<f64>;

pub use confseq::Engine;
pub use partition::Classification;
pub use procedures::{DecisionState, ProcedureKind};
