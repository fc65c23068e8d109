use super::root::decreasing_root;
use super::{BinomialCount, ConfidenceSequence, IntervalEstimate};
use crate::binomial::ln_choose;
use crate::error::check_open_unit;
use crate::{Real, Result};

/// `ln[(n+1) C(n,S) p^S (1-p)^(n-S)] - ln ε` and its derivative.
///
/// Concave in `p` with its maximum at `S/n`, so the set where it is positive
/// is an interval.
#[inline]
fn mixture_eval<T: Real>(offset: T, s: u64, n: u64, p: T) -> (T, T) {
    let (sf, ff) = (T::from_count(s), T::from_count(n - s));
    let succ = if s == 0 { T::zero() } else { sf * p.ln() };
    let fail = if s == n { T::zero() } else { ff * (-p).ln_1p() };
    let slope = (if s == 0 { T::zero() } else { sf / p }) - (if s == n { T::zero() } else { ff / (T::one() - p) });
    (offset + succ + fail, slope)
}

/// Endpoints of `{p : mixture_eval(p) > 0}`, or `None` when the set is empty.
fn endpoints<T: Real>(count: BinomialCount, ln_epsilon: T, warm: Option<(T, T)>) -> Option<(T, T)> {
    let (n, s) = (count.draws(), count.exceedances());
    let p_hat: T = count.p_hat();
    let offset = T::from_count(n + 1).ln() + ln_choose::<T>(n, s) - ln_epsilon;
    let eval = |p| mixture_eval(offset, s, n, p);
    if eval(p_hat).0 <= T::zero() {
        return None;
    }
    let tol = T::root_tolerance();

    let upper = if s == n {
        T::one()
    } else {
        let start = warm.map_or(T::one(), |(_, u)| u).max(p_hat).min(T::one());
        decreasing_root(p_hat, T::one(), (start, eval(start)), tol, eval)
    };
    let lower = if s == 0 {
        T::zero()
    } else {
        // increasing below S/n; negate to reuse the decreasing solver
        let neg = |p| {
            let (f, df) = eval(p);
            (-f, -df)
        };
        let start = warm.map_or(T::zero(), |(l, _)| l).min(p_hat).max(T::zero());
        decreasing_root(T::zero(), p_hat, (start, neg(start)), tol, neg)
    };
    Some((lower, upper))
}

/// The Robbins mixture confidence set `{p : (n+1) C(n,S) p^S (1-p)^(n-S) > ε}`.
///
/// Its coverage holds simultaneously over all `n` at level `1 - ε`, so the
/// same `epsilon` is reused at every step. An empty set (only when `ε` is at
/// least the maximum of the mixture ratio) yields the flagged point `S/n`.
pub fn robbins_interval<T: Real>(count: BinomialCount, epsilon: T) -> Result<IntervalEstimate<T>> {
    check_open_unit("epsilon", epsilon)?;
    Ok(build(count, epsilon, epsilon.ln(), None))
}

fn build<T: Real>(count: BinomialCount, epsilon: T, ln_epsilon: T, warm: Option<(T, T)>) -> IntervalEstimate<T> {
    match endpoints(count, ln_epsilon, warm) {
        Some((lower, upper)) => IntervalEstimate {
            lower,
            upper,
            n: count.draws(),
            risk_spent: epsilon,
            flagged: false,
        },
        None => IntervalEstimate::point(count.p_hat(), count.draws(), epsilon),
    }
}

/// [`robbins_interval`] evaluated afresh at every `n`, warm-started from the
/// previous endpoints.
#[derive(Debug, Clone)]
pub struct RobbinsSequence<T> {
    epsilon: T,
    ln_epsilon: T,
    draws: u64,
    exceedances: u64,
    current: IntervalEstimate<T>,
}

impl<T: Real> RobbinsSequence<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        check_open_unit("epsilon", epsilon)?;
        Ok(Self {
            epsilon,
            ln_epsilon: epsilon.ln(),
            draws: 0,
            exceedances: 0,
            current: IntervalEstimate::vacuous(),
        })
    }
}

impl<T: Real> ConfidenceSequence<T> for RobbinsSequence<T> {
    fn observe(&mut self, exceedance: bool) -> IntervalEstimate<T> {
        self.draws += 1;
        self.exceedances += u64::from(exceedance);
        let count = BinomialCount::new(self.draws, self.exceedances).expect("n >= 1 and s <= n");
        let warm = (self.draws > 1).then_some((self.current.lower, self.current.upper));
        self.current = build(count, self.epsilon, self.ln_epsilon, warm);
        self.current
    }

    fn current(&self) -> IntervalEstimate<T> {
        self.current
    }

    fn tally(&self) -> (u64, u64) {
        (self.draws, self.exceedances)
    }
}
