use super::root::decreasing_root;
use super::{BinomialCount, ConfidenceSequence, IntervalEstimate, SpendingSchedule};
use crate::binomial::{ln_choose, lower_tail_below, lower_tail_with, upper_tail_below, upper_tail_with};
use crate::error::check_open_unit;
use crate::{Real, Result};

/// `(ln P(X <= S | p) - ln level, d/dp)`; decreasing in `p`, root at the upper endpoint.
#[inline]
fn upper_eval<T: Real>(ln_binom: T, s: u64, n: u64, ln_level: T, p: T) -> (T, T) {
    let parts = lower_tail_with(ln_binom, s, n, p);
    let slope = -T::from_count(n - s) / (T::one() - p) * (parts.ln_pmf - parts.ln_tail).exp();
    (parts.ln_tail - ln_level, slope)
}

/// `(ln level - ln P(X >= S | p), d/dp)`; decreasing in `p`, root at the lower endpoint.
#[inline]
fn lower_eval<T: Real>(ln_binom: T, s: u64, n: u64, ln_level: T, p: T) -> (T, T) {
    let parts = upper_tail_with(ln_binom, s, n, p);
    let slope = -T::from_count(s) / p * (parts.ln_pmf - parts.ln_tail).exp();
    (ln_level - parts.ln_tail, slope)
}

/// Two-sided Clopper–Pearson interval with `tail_level` in each tail.
///
/// The upper end solves `P(X <= S | p_u) = tail_level` (`p_u = 1` when
/// `S = n`), the lower end `P(X >= S | p_l) = tail_level` (`p_l = 0` when
/// `S = 0`). Roots are bracketed inside the Hoeffding band
/// `S/n ± sqrt(-ln(tail_level) / 2n)` and refined to [`Real::root_tolerance`].
/// Endpoints never cross `S/n`, so the interval always contains it.
pub fn cp_exact_interval<T: Real>(count: BinomialCount, tail_level: T) -> Result<IntervalEstimate<T>> {
    check_open_unit("tail_level", tail_level)?;
    let (n, s) = (count.draws(), count.exceedances());
    let p_hat: T = count.p_hat();
    let ln_binom = ln_choose::<T>(n, s);
    let ln_level = tail_level.ln();
    let tol = T::root_tolerance();
    let xi = (-ln_level / (T::lit(2.0) * T::from_count(n))).sqrt() * T::lit(1.000_001) + tol;

    let upper = if s == n {
        T::one()
    } else {
        let eval = |p| upper_eval(ln_binom, s, n, ln_level, p);
        if eval(p_hat).0 <= T::zero() {
            p_hat
        } else {
            let mut hi = (p_hat + xi).min(T::one());
            let mut at_hi = eval(hi);
            if at_hi.0 > T::zero() {
                hi = T::one();
                at_hi = eval(hi);
            }
            decreasing_root(p_hat, hi, (hi, at_hi), tol, eval)
        }
    };

    let lower = if s == 0 {
        T::zero()
    } else {
        let eval = |p| lower_eval(ln_binom, s, n, ln_level, p);
        if eval(p_hat).0 >= T::zero() {
            p_hat
        } else {
            let mut lo = (p_hat - xi).max(T::zero());
            let mut at_lo = eval(lo);
            if at_lo.0 < T::zero() {
                lo = T::zero();
                at_lo = eval(lo);
            }
            decreasing_root(lo, p_hat, (lo, at_lo), tol, eval)
        }
    };

    Ok(IntervalEstimate {
        lower,
        upper,
        n,
        risk_spent: (T::lit(2.0) * tail_level).min(T::one()),
        flagged: false,
    })
}

/// Clopper–Pearson intervals at `ρ_n / 2` per side, intersected over time.
///
/// Each step first checks whether the new interval cuts the running one at
/// all; only then is the endpoint solved, warm-started from the running end.
/// The result is identical to computing every interval in full.
///
/// If the running intersection ever stops containing `S/n` (possible only
/// after an earlier interval missed), it is replaced by the current step's
/// interval and flagged; nesting holds between unflagged steps.
#[derive(Debug, Clone)]
pub struct CpSequence<T> {
    schedule: SpendingSchedule<T>,
    draws: u64,
    exceedances: u64,
    running: IntervalEstimate<T>,
    conflicts: u64,
}

impl<T: Real> CpSequence<T> {
    pub fn new(schedule: SpendingSchedule<T>) -> Self {
        Self {
            schedule,
            draws: 0,
            exceedances: 0,
            running: IntervalEstimate::vacuous(),
            conflicts: 0,
        }
    }

    pub fn schedule(&self) -> &SpendingSchedule<T> {
        &self.schedule
    }

    /// Number of steps at which the running intersection had to be reset.
    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    /// Per-side tail level used at step `n`.
    pub fn tail_level(&self, n: u64) -> T {
        self.schedule.level(n) * T::lit(0.5)
    }
}

impl<T: Real> ConfidenceSequence<T> for CpSequence<T> {
    fn observe(&mut self, exceedance: bool) -> IntervalEstimate<T> {
        self.draws += 1;
        self.exceedances += u64::from(exceedance);
        let (n, s) = (self.draws, self.exceedances);
        let tail = self.tail_level(n);
        let spent = (self.running.risk_spent + tail + tail).min(T::one());
        let p_hat = T::from_count(s) / T::from_count(n);

        if !self.running.contains(p_hat) {
            self.conflicts += 1;
            let count = BinomialCount::new(n, s).expect("n >= 1 and s <= n");
            let raw = cp_exact_interval(count, tail).expect("spending levels lie in (0, 1)");
            self.running = IntervalEstimate {
                risk_spent: spent,
                flagged: true,
                ..raw
            };
            return self.running;
        }

        let ln_binom = ln_choose::<T>(n, s);
        let ln_level = tail.ln();
        let tol = T::root_tolerance();
        let mut upper = self.running.upper;
        let mut lower = self.running.lower;

        if s < n && lower_tail_below(ln_binom, s, n, upper, ln_level) {
            let eval = |p| upper_eval(ln_binom, s, n, ln_level, p);
            upper = decreasing_root(p_hat, upper, (upper, eval(upper)), tol, eval);
        }
        if s > 0 && upper_tail_below(ln_binom, s, n, lower, ln_level) {
            let eval = |p| lower_eval(ln_binom, s, n, ln_level, p);
            lower = decreasing_root(lower, p_hat, (lower, eval(lower)), tol, eval);
        }

        self.running = IntervalEstimate {
            lower,
            upper,
            n,
            risk_spent: spent,
            flagged: false,
        };
        self.running
    }

    fn current(&self) -> IntervalEstimate<T> {
        self.running
    }

    fn tally(&self) -> (u64, u64) {
        (self.draws, self.exceedances)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confseq::bounds::cp_length_bound;

    /// Tail sums by direct multiplication and endpoints by plain bisection:
    /// shares nothing with the log-space path under test.
    fn oracle_pmf(i: u64, n: u64, p: f64) -> f64 {
        let mut c = 1.0;
        for j in 0..i {
            c *= (n - j) as f64 / (j + 1) as f64;
        }
        c * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32)
    }

    fn oracle_tail_le(s: u64, n: u64, p: f64) -> f64 {
        (0..=s).map(|i| oracle_pmf(i, n, p)).sum()
    }

    fn oracle_tail_ge(s: u64, n: u64, p: f64) -> f64 {
        (s..=n).map(|i| oracle_pmf(i, n, p)).sum()
    }

    fn oracle_cp(n: u64, s: u64, tail: f64) -> (f64, f64) {
        let bisect = |f: &dyn Fn(f64) -> bool| {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            0.5 * (lo + hi)
        };
        let upper = if s == n { 1.0 } else { bisect(&|p| oracle_tail_le(s, n, p) > tail) };
        let lower = if s == 0 {
            0.0
        } else {
            bisect(&|p| oracle_tail_ge(s, n, p) < tail)
        };
        (lower, upper)
    }

    fn count(n: u64, s: u64) -> BinomialCount {
        BinomialCount::new(n, s).unwrap()
    }

    #[test]
    fn all_exceedances_give_upper_one() {
        let ci = cp_exact_interval(count(10, 10), 0.025f64).unwrap();
        assert_eq!(ci.upper, 1.0);
        let ci = cp_exact_interval(count(10, 0), 0.025f64).unwrap();
        assert_eq!(ci.lower, 0.0);
    }

    #[test]
    fn ten_draws_five_exceedances() {
        let (lo, hi) = oracle_cp(10, 5, 0.025);
        // frozen from the oracle above
        assert!((lo - 0.187_086_028_447).abs() < 1e-9);
        assert!((hi - 0.812_913_971_553).abs() < 1e-9);
        let ci = cp_exact_interval(count(10, 5), 0.025f64).unwrap();
        assert!((ci.lower - lo).abs() < 1e-9, "{} vs {lo}", ci.lower);
        assert!((ci.upper - hi).abs() < 1e-9, "{} vs {hi}", ci.upper);
        assert_eq!(ci.risk_spent, 0.05);
    }

    #[test]
    fn agrees_with_oracle_on_small_grid() {
        for n in [1u64, 2, 5, 17, 40, 90] {
            for s in 0..=n {
                for tail in [0.2, 0.025, 1e-4, 1e-9] {
                    let (lo, hi) = oracle_cp(n, s, tail);
                    let ci = cp_exact_interval(count(n, s), tail).unwrap();
                    assert!((ci.lower - lo).abs() < 1e-9, "n={n} s={s} tail={tail}: {} vs {lo}", ci.lower);
                    assert!((ci.upper - hi).abs() < 1e-9, "n={n} s={s} tail={tail}: {} vs {hi}", ci.upper);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_tail_levels() {
        assert!(cp_exact_interval(count(5, 2), 0.0f64).is_err());
        assert!(cp_exact_interval(count(5, 2), 1.0f64).is_err());
        assert!(cp_exact_interval(count(5, 2), f64::NAN).is_err());
    }

    #[test]
    fn large_n_stays_within_length_bound() {
        for &s in &[0u64, 1, 37, 5_000, 99_999, 100_000] {
            let ci = cp_exact_interval(count(100_000, s), 1e-6f64).unwrap();
            assert!(ci.contains(s as f64 / 1e5));
            assert!(ci.length() <= cp_length_bound(100_000, 1e-6));
        }
    }

    #[test]
    fn first_step_of_sequence() {
        let mut seq = CpSequence::new(SpendingSchedule::quadratic(0.05f64).unwrap());
        let ci = seq.observe(true);
        let tail = 0.05 * 6.0 / std::f64::consts::PI.powi(2) / 2.0;
        assert!((tail - 0.0152).abs() < 1e-4);
        // P(X >= 1 | n = 1, p) = p, so the lower end is the tail level itself.
        assert!((ci.lower - tail).abs() < 1e-10);
        assert_eq!(ci.upper, 1.0);
        assert!((ci.risk_spent - 2.0 * tail).abs() < 1e-15);
    }

    #[test]
    fn sequence_equals_full_intersection() {
        let schedule = SpendingSchedule::quadratic(0.05f64).unwrap();
        let mut seq = CpSequence::new(schedule.clone());
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut s = 0;
        // deterministic pseudo-random stream with p ~ 0.3
        let mut state = 12345u64;
        for n in 1..=3000u64 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (state >> 33) % 10 < 3;
            s += u64::from(x);
            let got = seq.observe(x);
            let raw = cp_exact_interval(count(n, s), schedule.level(n) / 2.0).unwrap();
            lo = lo.max(raw.lower);
            hi = hi.min(raw.upper);
            if got.flagged {
                lo = raw.lower;
                hi = raw.upper;
            }
            assert!((got.lower - lo).abs() < 1e-9 && (got.upper - hi).abs() < 1e-9, "step {n}");
            assert!(got.contains(s as f64 / n as f64));
        }
    }

    #[test]
    fn f32_intervals_are_close_to_f64() {
        let a = cp_exact_interval(count(50, 12), 0.01f32).unwrap();
        let b = cp_exact_interval(count(50, 12), 0.01f64).unwrap();
        assert!((a.lower as f64 - b.lower).abs() < 1e-5);
        assert!((a.upper as f64 - b.upper).abs() < 1e-5);
    }
}
