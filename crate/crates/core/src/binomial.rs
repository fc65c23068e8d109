//! Binomial probabilities in log space.
//!
//! Tails are summed outward from their largest term with the pmf ratio
//! recurrence, so only the O(sqrt(n)) terms that matter are visited. When the
//! requested tail contains the mode the complementary tail is summed instead
//! and subtracted via `ln_1p`.

use crate::Real;

/// `ln Γ(x)` for `x > 0`.
///
/// Shifts the argument up to at least 15 and applies the Stirling series
/// through the `x^-9` term; absolute error is below `1e-14` in `f64`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    debug_assert!(x > T::zero());
    let shift_to = T::lit(15.0);
    let mut x = x;
    let mut product = T::one();
    while x < shift_to {
        product = product * x;
        x = x + T::one();
    }
    let half = T::lit(0.5);
    let inv = x.recip();
    let inv2 = inv * inv;
    // 1/12x - 1/360x^3 + 1/1260x^5 - 1/1680x^7 + 1/1188x^9
    let series = inv
        * (T::lit(1.0 / 12.0)
            + inv2
                * (T::lit(-1.0 / 360.0)
                    + inv2 * (T::lit(1.0 / 1260.0) + inv2 * (T::lit(-1.0 / 1680.0) + inv2 * T::lit(1.0 / 1188.0)))));
    (x - half) * x.ln() - x + half * (T::lit(2.0) * T::PI()).ln() + series - product.ln()
}

/// `ln C(n, k)`.
pub fn ln_choose<T: Real>(n: u64, k: u64) -> T {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return T::zero();
    }
    let one = T::one();
    ln_gamma(T::from_count(n) + one) - ln_gamma(T::from_count(k) + one) - ln_gamma(T::from_count(n - k) + one)
}

/// `ln P(X = k)` for `X ~ Binomial(n, p)`, with `ln_choose(n, k)` supplied by the caller.
#[inline]
pub fn ln_pmf_with<T: Real>(ln_binom: T, k: u64, n: u64, p: T) -> T {
    let successes = if k == 0 { T::zero() } else { T::from_count(k) * p.ln() };
    let failures = if k == n { T::zero() } else { T::from_count(n - k) * (-p).ln_1p() };
    ln_binom + successes + failures
}

pub fn ln_pmf<T: Real>(k: u64, n: u64, p: T) -> T {
    ln_pmf_with(ln_choose::<T>(n, k), k, n, p)
}

/// `Σ_{i=0}^{k} pmf(i) / pmf(k)` for `k < (n+1)p`, where terms shrink going down.
fn down_sum<T: Real>(k: u64, n: u64, p: T) -> T {
    let odds = (T::one() - p) / p;
    let stop = T::epsilon() * T::lit(0.25);
    let mut term = T::one();
    let mut sum = T::one();
    let mut i = k;
    while i > 0 {
        term = term * odds * T::from_count(i) / T::from_count(n - i + 1);
        sum = sum + term;
        if term < stop * sum {
            break;
        }
        i -= 1;
    }
    sum
}

/// `Σ_{i=k}^{n} pmf(i) / pmf(k)` for `k > (n+1)p - 1`, where terms shrink going up.
fn up_sum<T: Real>(k: u64, n: u64, p: T) -> T {
    let odds = p / (T::one() - p);
    let stop = T::epsilon() * T::lit(0.25);
    let mut term = T::one();
    let mut sum = T::one();
    let mut i = k;
    while i < n {
        term = term * odds * T::from_count(n - i) / T::from_count(i + 1);
        sum = sum + term;
        if term < stop * sum {
            break;
        }
        i += 1;
    }
    sum
}

/// Log of a binomial tail together with the log pmf at its inner end.
#[derive(Debug, Clone, Copy)]
pub struct TailParts<T> {
    /// `ln P(X <= k)` or `ln P(X >= k)`.
    pub ln_tail: T,
    /// `ln P(X = k)`.
    pub ln_pmf: T,
}

/// `ln P(X <= k)` and `ln P(X = k)`, given `ln C(n, k)`.
pub fn lower_tail_with<T: Real>(ln_binom: T, k: u64, n: u64, p: T) -> TailParts<T> {
    if k >= n || p <= T::zero() {
        return TailParts {
            ln_tail: T::zero(),
            ln_pmf: if p <= T::zero() && k > 0 { T::neg_infinity() } else { ln_pmf_with(ln_binom, k, n, p) },
        };
    }
    if p >= T::one() {
        return TailParts {
            ln_tail: T::neg_infinity(),
            ln_pmf: T::neg_infinity(),
        };
    }
    let ln_pmf_k = ln_pmf_with(ln_binom, k, n, p);
    let nf = T::from_count(n);
    let ln_tail = if T::from_count(k) < (nf + T::one()) * p {
        ln_pmf_k + down_sum(k, n, p).ln()
    } else {
        // P(X <= k) = 1 - P(X >= k+1), the latter summed upward from k+1.
        let ln_next = ln_pmf_k + (p / (T::one() - p) * T::from_count(n - k) / T::from_count(k + 1)).ln();
        let upper = (ln_next + up_sum(k + 1, n, p).ln()).exp();
        (-upper).ln_1p()
    };
    TailParts { ln_tail, ln_pmf: ln_pmf_k }
}

/// `ln P(X >= k)` and `ln P(X = k)`, given `ln C(n, k)`.
pub fn upper_tail_with<T: Real>(ln_binom: T, k: u64, n: u64, p: T) -> TailParts<T> {
    if k == 0 || p >= T::one() {
        return TailParts {
            ln_tail: T::zero(),
            ln_pmf: if p >= T::one() && k < n { T::neg_infinity() } else { ln_pmf_with(ln_binom, k, n, p) },
        };
    }
    if k > n || p <= T::zero() {
        return TailParts {
            ln_tail: T::neg_infinity(),
            ln_pmf: T::neg_infinity(),
        };
    }
    let ln_pmf_k = ln_pmf_with(ln_binom, k, n, p);
    let nf = T::from_count(n);
    let ln_tail = if T::from_count(k) > (nf + T::one()) * p - T::one() {
        ln_pmf_k + up_sum(k, n, p).ln()
    } else {
        // P(X >= k) = 1 - P(X <= k-1), the latter summed downward from k-1.
        let ln_prev = ln_pmf_k + ((T::one() - p) / p * T::from_count(k) / T::from_count(n - k + 1)).ln();
        let lower = (ln_prev + down_sum(k - 1, n, p).ln()).exp();
        (-lower).ln_1p()
    };
    TailParts { ln_tail, ln_pmf: ln_pmf_k }
}

/// Whether `Σ_j t_j < target` for terms `t_0 = 1, t_{j+1} = t_j r_j` with
/// `r_j` non-increasing in `j`, deciding as soon as the partial sum or the
/// geometric bound on the remainder settles it. `ratio(j)` returns `None`
/// once the terms run out.
fn series_below<T: Real>(target: T, mut ratio: impl FnMut(u64) -> Option<T>) -> bool {
    let mut term = T::one();
    let mut sum = T::one();
    let mut j = 0;
    while sum < target {
        let Some(r) = ratio(j) else { return true };
        if r < T::one() && sum + term * r / (T::one() - r) < target {
            return true;
        }
        term = term * r;
        if term <= T::epsilon() * T::lit(0.25) * sum {
            return sum < target;
        }
        sum = sum + term;
        j += 1;
    }
    false
}

/// `P(X <= k) < exp(ln_target)`, given `ln C(n, k)`.
///
/// Cheaper than [`lower_tail_with`] when the answer is clear: below the mode
/// it stops as soon as the partial sum or its geometric remainder bound
/// decides the comparison, usually after one or two terms.
pub fn lower_tail_below<T: Real>(ln_binom: T, k: u64, n: u64, p: T, ln_target: T) -> bool {
    if k >= n || p <= T::zero() {
        return T::zero() < ln_target;
    }
    if p >= T::one() {
        return true;
    }
    if T::from_count(k) >= (T::from_count(n) + T::one()) * p {
        return lower_tail_with(ln_binom, k, n, p).ln_tail < ln_target;
    }
    let rel = ln_target - ln_pmf_with(ln_binom, k, n, p);
    if rel <= T::zero() {
        return false;
    }
    let odds = (T::one() - p) / p;
    let first = odds * T::from_count(k) / T::from_count(n - k + 1);
    if rel > -(-first).ln_1p() {
        return true;
    }
    series_below(rel.exp(), |j| {
        (j < k).then(|| odds * T::from_count(k - j) / T::from_count(n - k + j + 1))
    })
}

/// `P(X >= k) < exp(ln_target)`, given `ln C(n, k)`; mirror of [`lower_tail_below`].
pub fn upper_tail_below<T: Real>(ln_binom: T, k: u64, n: u64, p: T, ln_target: T) -> bool {
    if k == 0 || p >= T::one() {
        return T::zero() < ln_target;
    }
    if k > n || p <= T::zero() {
        return true;
    }
    if T::from_count(k) <= (T::from_count(n) + T::one()) * p - T::one() {
        return upper_tail_with(ln_binom, k, n, p).ln_tail < ln_target;
    }
    let rel = ln_target - ln_pmf_with(ln_binom, k, n, p);
    if rel <= T::zero() {
        return false;
    }
    let odds = p / (T::one() - p);
    let first = odds * T::from_count(n - k) / T::from_count(k + 1);
    if rel > -(-first).ln_1p() {
        return true;
    }
    series_below(rel.exp(), |j| {
        (k + j < n).then(|| odds * T::from_count(n - k - j) / T::from_count(k + j + 1))
    })
}

/// `P(X <= k)`.
pub fn cdf<T: Real>(k: u64, n: u64, p: T) -> T {
    lower_tail_with(ln_choose::<T>(n, k.min(n)), k, n, p).ln_tail.exp()
}

/// `P(X >= k)`.
pub fn survival<T: Real>(k: u64, n: u64, p: T) -> T {
    if k > n {
        return T::zero();
    }
    upper_tail_with(ln_choose::<T>(n, k), k, n, p).ln_tail.exp()
}
