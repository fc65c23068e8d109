//! Stopping-time statistics: the Wald runtime bound, order-statistic
//! distribution, survival curves, tail-exponent fits and truncated means.

use serde::{Deserialize, Serialize};

use crate::binomial::survival;
use crate::error::check_open_unit;
use crate::{Error, Real, Result};

/// Wald's lower bound on the expected number of draws needed to decide
/// whether `p1` lies above or below `alpha` with error probability `epsilon`:
///
/// `[ε ln(ε/(1-ε)) + (1-ε) ln((1-ε)/ε)] / KL(p1 ‖ alpha)`.
///
/// Infinite when `p1 == alpha`, zero when `ε = 1/2`.
pub fn wald_lower_bound<T: Real>(p1: T, alpha: T, epsilon: T) -> Result<T> {
    check_open_unit("p1", p1)?;
    check_open_unit("alpha", alpha)?;
    check_open_unit("epsilon", epsilon)?;
    let one = T::one();
    let numerator = epsilon * (epsilon / (one - epsilon)).ln() + (one - epsilon) * ((one - epsilon) / epsilon).ln();
    if p1 == alpha {
        return Ok(T::infinity());
    }
    let divergence = p1 * (p1 / alpha).ln() + (one - p1) * ((one - p1) / (one - alpha)).ln();
    if numerator == T::zero() {
        return Ok(T::zero());
    }
    if divergence <= T::zero() {
        // rounding when p1 is within ~1e-8 of alpha
        return Ok(T::infinity());
    }
    Ok(numerator / divergence)
}

/// `E[min(W(p), cap)]` for `p` uniform on `[lo, hi]`, where `W` is
/// [`wald_lower_bound`] at `alpha`. Integrated with Simpson's rule in
/// `ln|p - alpha|` on each side of `alpha`, which resolves the pole.
pub fn expected_truncated_wald<T: Real>(alpha: T, epsilon: T, cap: T, lo: T, hi: T) -> Result<T> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("epsilon", epsilon)?;
    if !(lo > T::zero() && hi < T::one() && lo < hi) {
        return Err(Error::out_of_range("prior support", "0 < lo < hi < 1", lo.to_f64().unwrap_or(f64::NAN)));
    }
    let nodes = 20_000usize;
    let smallest = T::lit(1e-14);
    let mut total = T::zero();
    for (sign, reach) in [(-T::one(), alpha - lo), (T::one(), hi - alpha)] {
        if reach <= smallest {
            continue;
        }
        let (a, b) = (smallest.ln(), reach.ln());
        let h = (b - a) / T::from_usize(nodes).unwrap();
        let f = |u: T| {
            let d = u.exp();
            let w = wald_lower_bound(alpha + sign * d, alpha, epsilon).unwrap_or(T::infinity());
            w.min(cap) * d
        };
        let mut sum = f(a) + f(b);
        for i in 1..nodes {
            let weight = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
            sum = sum + weight * f(a + h * T::from_usize(i).unwrap());
        }
        // the sliver [alpha, alpha + smallest] sits at the cap
        total = total + sum * h / T::lit(3.0) + cap * smallest;
    }
    Ok(total / (hi - lo))
}

/// `P(X_(r) <= x)` for the `r`-th order statistic of `n` i.i.d. draws with
/// `F(x) = f`: `Σ_{i=r}^{n} C(n,i) f^i (1-f)^(n-i)`.
pub fn order_statistic_cdf<T: Real>(r: usize, n: usize, f: T) -> Result<T> {
    if r == 0 || r > n {
        return Err(Error::Rank { rank: r, n });
    }
    crate::error::check_closed_unit("F", f)?;
    Ok(survival(r as u64, n as u64, f))
}

/// `r`-th smallest of `values` (1-based).
pub fn order_statistic<V: PartialOrd + Copy>(values: &[V], r: usize) -> Result<V> {
    if r == 0 || r > values.len() {
        return Err(Error::Rank { rank: r, n: values.len() });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    Ok(sorted[r - 1])
}

/// Empirical `P(X > t)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
}

/// `values[k] = #{samples > grid[k]} / #samples`. The grid must be ascending.
pub fn empirical_survival<T: Real>(samples: &[T], grid: &[T]) -> Result<SurvivalCurve<T>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Grid("survival grid must be strictly ascending".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let total = T::from_usize(sorted.len()).unwrap();
    let values = grid
        .iter()
        .map(|&t| T::from_usize(sorted.len() - sorted.partition_point(|&x| x <= t)).unwrap() / total)
        .collect();
    Ok(SurvivalCurve {
        grid: grid.to_vec(),
        values,
    })
}

/// Log-log least-squares fit of a survival curve, `P(X > t) ≈ c t^gamma_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit<T> {
    pub gamma_hat: T,
    /// Smallest and largest grid point actually used.
    pub fit_range: (T, T),
    /// RMS deviation of `ln value` from the fitted line.
    pub residual: T,
    pub points: usize,
}

/// Fits over grid points in `[from, to]` with positive `t` and value.
/// At least five such points are required.
pub fn tail_exponent_fit<T: Real>(curve: &SurvivalCurve<T>, from: T, to: T) -> Result<TailFit<T>> {
    const NEEDED: usize = 5;
    let points: Vec<(T, T)> = curve
        .grid
        .iter()
        .zip(&curve.values)
        .filter(|&(&t, &v)| t >= from && t <= to && t > T::zero() && v > T::zero())
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .collect();
    if points.len() < NEEDED {
        return Err(Error::InsufficientTail {
            needed: NEEDED,
            found: points.len(),
        });
    }
    let k = T::from_usize(points.len()).unwrap();
    let mean_x = points.iter().fold(T::zero(), |acc, p| acc + p.0) / k;
    let mean_y = points.iter().fold(T::zero(), |acc, p| acc + p.1) / k;
    let (sxy, sxx) = points.iter().fold((T::zero(), T::zero()), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mean_x) * (y - mean_y), sxx + (x - mean_x) * (x - mean_x))
    });
    let slope = sxy / sxx;
    let sse = points.iter().fold(T::zero(), |acc, &(x, y)| {
        let e = y - mean_y - slope * (x - mean_x);
        acc + e * e
    });
    Ok(TailFit {
        gamma_hat: slope,
        fit_range: (points[0].0.exp(), points[points.len() - 1].0.exp()),
        residual: (sse / k).sqrt(),
        points: points.len(),
    })
}

/// Mean of `min(sample, cap)`.
pub fn truncated_mean<T: Real>(samples: &[T], cap: T) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let sum = samples.iter().fold(T::zero(), |acc, &x| acc + x.min(cap));
    Ok(sum / T::from_usize(samples.len()).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wald_examples() {
        let got = wald_lower_bound(0.2f64, 0.1, 0.1).unwrap();
        let want = 0.8 * 9f64.ln() / (0.2 * 2f64.ln() + 0.8 * (8.0f64 / 9.0).ln());
        assert!((got - want).abs() < 1e-12 * want);
        assert!((got - 39.58695).abs() < 1e-4);
        assert_eq!(wald_lower_bound(0.3f64, 0.1, 0.5).unwrap(), 0.0);
        assert!(wald_lower_bound(0.1f64, 0.1, 0.05).unwrap().is_infinite());
        assert!(wald_lower_bound(0.0f64, 0.1, 0.05).is_err());
        assert!(wald_lower_bound(0.2f64, 1.0, 0.05).is_err());
    }

    #[test]
    fn truncated_wald_grows_like_root_cap() {
        let at = |cap: f64| expected_truncated_wald(0.1f64, 0.01, cap, 0.05, 0.15).unwrap();
        let (a, b, c) = (at(1e3), at(1e4), at(1e5));
        assert!(b / a > 2.0 && c / b > 2.0, "{a} {b} {c}");
        // crude midpoint reference
        let k = 2_000_000;
        let mid: f64 = (0..k)
            .map(|i| {
                let p = 0.05 + 0.1 * (i as f64 + 0.5) / k as f64;
                wald_lower_bound(p, 0.1, 0.01).unwrap().min(1e4)
            })
            .sum::<f64>()
            / k as f64;
        assert!((mid - b).abs() < 1e-3 * b, "{mid} vs {b}");
    }

    #[test]
    fn order_statistic_small_cases() {
        assert!((order_statistic_cdf(1, 2, 0.5f64).unwrap() - 0.75).abs() < 1e-13);
        assert!((order_statistic_cdf(1, 1, 0.3f64).unwrap() - 0.3).abs() < 1e-13);
        assert!((order_statistic_cdf(4, 4, 0.3f64).unwrap() - 0.3f64.powi(4)).abs() < 1e-13);
        assert!(order_statistic_cdf(0, 4, 0.3f64).is_err());
        assert!(order_statistic_cdf(5, 4, 0.3f64).is_err());
        assert_eq!(order_statistic(&[5u64, 1, 3], 2).unwrap(), 3);
    }

    #[test]
    fn survival_examples() {
        let c = empirical_survival(&[3.0f64; 10], &[1.0, 2.9, 3.0, 4.0]).unwrap();
        assert_eq!(c.values, vec![1.0, 1.0, 0.0, 0.0]);
        assert!(empirical_survival::<f64>(&[], &[1.0]).is_err());
        assert!(empirical_survival(&[1.0f64], &[2.0, 1.0]).is_err());
    }

    #[test]
    fn fit_recovers_power_law() {
        let grid: Vec<f64> = (0..30).map(|i| 10f64.powf(1.0 + i as f64 * 0.1)).collect();
        let values: Vec<f64> = grid.iter().map(|t| t.powf(-0.4)).collect();
        let fit = tail_exponent_fit(&SurvivalCurve { grid: grid.clone(), values }, 0.0, 1e9).unwrap();
        assert!((fit.gamma_hat + 0.4).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
        let flat = tail_exponent_fit(&SurvivalCurve { grid: grid.clone(), values: vec![0.3; 30] }, 0.0, 1e9).unwrap();
        assert!(flat.gamma_hat.abs() < 1e-12);
        let sparse = SurvivalCurve { grid: grid[..4].to_vec(), values: vec![0.5; 4] };
        assert_eq!(
            tail_exponent_fit(&sparse, 0.0, 1e9),
            Err(Error::InsufficientTail { needed: 5, found: 4 })
        );
    }

    #[test]
    fn truncated_means() {
        let xs = [1.0f64, 5.0, 9.0];
        assert_eq!(truncated_mean(&xs, 10.0).unwrap(), 5.0);
        assert_eq!(truncated_mean(&xs, 0.0).unwrap(), 0.0);
        assert_eq!(truncated_mean(&xs, 4.0).unwrap(), 3.0);
        assert!(truncated_mean::<f64>(&[], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn wald_symmetric_in_epsilon(p1 in 0.01f64..0.99, a in 0.01f64..0.99, e in 0.01f64..0.49) {
            prop_assume!((p1 - a).abs() > 1e-3);
            let x = wald_lower_bound(p1, a, e).unwrap();
            let y = wald_lower_bound(p1, a, 1.0 - e).unwrap();
            prop_assert!(x > 0.0);
            prop_assert!((x - y).abs() <= 1e-12 * x);
        }

        #[test]
        fn order_statistic_monotone(n in 1usize..40, f in 0.0f64..1.0, g in 0.0f64..1.0) {
            let (lo, hi) = if f < g { (f, g) } else { (g, f) };
            for r in 1..=n {
                let a = order_statistic_cdf(r, n, lo).unwrap();
                prop_assert!(a <= order_statistic_cdf(r, n, hi).unwrap() + 1e-14);
                if r < n {
                    prop_assert!(order_statistic_cdf(r + 1, n, lo).unwrap() <= a + 1e-14);
                }
            }
            let first = order_statistic_cdf(1, n, f).unwrap();
            prop_assert!((first - (1.0 - (1.0 - f).powi(n as i32))).abs() < 1e-12);
        }

        #[test]
        fn survival_non_increasing(xs in proptest::collection::vec(0.0f64..100.0, 1..50)) {
            let grid: Vec<f64> = (0..=100).map(|t| t as f64).collect();
            let c = empirical_survival(&xs, &grid).unwrap();
            prop_assert!(c.values.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(c.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }

        #[test]
        fn planted_exponent(gamma in -3.0f64..-0.05, scale in 0.1f64..10.0) {
            let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 50.0).collect();
            let values: Vec<f64> = grid.iter().map(|t| scale * t.powf(gamma)).collect();
            let fit = tail_exponent_fit(&SurvivalCurve { grid, values }, 0.0, f64::MAX).unwrap();
            prop_assert!((fit.gamma_hat - gamma).abs() < 1e-6);
        }
    }
}
