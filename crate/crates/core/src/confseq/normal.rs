use statrs::distribution::{ContinuousCDF, Normal};

use super::{BinomialCount, ConfidenceSequence, IntervalEstimate, SpendingSchedule};
use crate::error::check_open_unit;
use crate::{Real, Result};

/// Upper `tail` quantile of the standard normal.
fn z_upper<T: Real>(tail: T) -> T {
    let std = Normal::standard();
    T::lit(-std.inverse_cdf(tail.to_f64().expect("finite")))
}

/// Wald interval `p̂ ± z sqrt(v / n)` clipped to `[0, 1]`.
///
/// When `S = 0` or `S = n` the plug-in variance vanishes; `v` then uses the
/// shrunk estimate `(S + 1/2) / (n + 1)` instead. This is a large-sample
/// heuristic with no finite-sample or simultaneous guarantee.
pub fn normal_interval<T: Real>(count: BinomialCount, tail_level: T) -> Result<IntervalEstimate<T>> {
    check_open_unit("tail_level", tail_level)?;
    Ok(wald(count, z_upper(tail_level), (T::lit(2.0) * tail_level).min(T::one())))
}

fn wald<T: Real>(count: BinomialCount, z: T, risk_spent: T) -> IntervalEstimate<T> {
    let (n, s) = (count.draws(), count.exceedances());
    let nf = T::from_count(n);
    let p_hat: T = count.p_hat();
    let centre = if s == 0 || s == n {
        (T::from_count(s) + T::lit(0.5)) / (nf + T::one())
    } else {
        p_hat
    };
    let half = z * (centre * (T::one() - centre) / nf).sqrt();
    IntervalEstimate {
        lower: (p_hat - half).max(T::zero()),
        upper: (p_hat + half).min(T::one()),
        n,
        risk_spent,
        flagged: false,
    }
}

/// [`normal_interval`] at `ρ_n / 2` per side, recomputed at every `n`.
#[derive(Debug, Clone)]
pub struct NormalSequence<T> {
    schedule: SpendingSchedule<T>,
    draws: u64,
    exceedances: u64,
    spent: T,
    current: IntervalEstimate<T>,
}

impl<T: Real> NormalSequence<T> {
    pub fn new(schedule: SpendingSchedule<T>) -> Self {
        Self {
            schedule,
            draws: 0,
            exceedances: 0,
            spent: T::zero(),
            current: IntervalEstimate::vacuous(),
        }
    }
}

impl<T: Real> ConfidenceSequence<T> for NormalSequence<T> {
    fn observe(&mut self, exceedance: bool) -> IntervalEstimate<T> {
        self.draws += 1;
        self.exceedances += u64::from(exceedance);
        let rho = self.schedule.level(self.draws);
        self.spent = (self.spent + rho).min(T::one());
        let count = BinomialCount::new(self.draws, self.exceedances).expect("n >= 1 and s <= n");
        self.current = wald(count, z_upper(rho * T::lit(0.5)), self.spent);
        self.current
    }

    fn current(&self) -> IntervalEstimate<T> {
        self.current
    }

    fn tally(&self) -> (u64, u64) {
        (self.draws, self.exceedances)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Standard normal CDF by composite Simpson quadrature of the density.
    fn oracle_cdf(x: f64) -> f64 {
        let steps = 200_000;
        let (a, b) = (-12.0, x);
        let h = (b - a) / steps as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = pdf(a) + pdf(b);
        for i in 1..steps {
            acc += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    fn oracle_quantile(upper_tail: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - oracle_cdf(mid) > upper_tail {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn half_at_one_hundred_draws() {
        let z = oracle_quantile(0.025);
        assert!((z - 1.959964).abs() < 1e-6);
        let ci = normal_interval(BinomialCount::new(100, 50).unwrap(), 0.025f64).unwrap();
        assert!((ci.lower - (0.5 - z * 0.05)).abs() < 1e-8);
        assert!((ci.upper - (0.5 + z * 0.05)).abs() < 1e-8);
    }

    #[test]
    fn quadrupling_n_halves_width() {
        let a = normal_interval(BinomialCount::new(100, 30).unwrap(), 0.01f64).unwrap();
        let b = normal_interval(BinomialCount::new(400, 120).unwrap(), 0.01f64).unwrap();
        assert!((a.length() / b.length() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_exceedances_clip_and_keep_width() {
        let ci = normal_interval(BinomialCount::new(100, 0).unwrap(), 0.025f64).unwrap();
        assert_eq!(ci.lower, 0.0);
        assert!(ci.upper > 0.0);
        let ci = normal_interval(BinomialCount::new(100, 100).unwrap(), 0.025f64).unwrap();
        assert_eq!(ci.upper, 1.0);
        assert!(ci.lower < 1.0);
    }
}
