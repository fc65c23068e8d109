//! Closed-form length bounds and the Hoeffding tail.

use crate::{Error, Real, Result};

/// Length bound `2 (2n)^(-1/2) (-ln ρ)^(1/2)` for an exact binomial interval
/// with `ρ` in each tail.
pub fn cp_length_bound<T: Real>(n: u64, rho: T) -> T {
    let two = T::lit(2.0);
    two * (-rho.ln() / (two * T::from_count(n))).sqrt()
}

/// Length bound `n^(-1/2) {ln(4 n ln n)}^(1/2)` for the Robbins interval.
///
/// Requires `n >= 3` so that `ln n > 1`.
pub fn robbins_length_bound<T: Real>(n: u64) -> Result<T> {
    if n < 3 {
        return Err(Error::out_of_range("n", "[3, inf)", n as f64));
    }
    let nf = T::from_count(n);
    Ok((T::lit(4.0) * nf * nf.ln()).ln().sqrt() / nf.sqrt())
}

/// Hoeffding's bound on a deviation of `delta` of the mean of `n` Bernoulli
/// draws: `exp(-2 δ² n)`, doubled when two-sided. Not capped at 1.
pub fn hoeffding_tail<T: Real>(n: u64, delta: T, two_sided: bool) -> T {
    let one_sided = (-T::lit(2.0) * delta * delta * T::from_count(n)).exp();
    if two_sided {
        T::lit(2.0) * one_sided
    } else {
        one_sided
    }
}
