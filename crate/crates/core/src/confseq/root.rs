use crate::Real;

/// Root of a decreasing function on `[lo, hi]` with `f(lo) >= 0 >= f(hi)`.
///
/// Newton steps are taken while they stay inside the bracket and shrink fast
/// enough; otherwise the bracket is bisected. `eval` returns `(f(x), f'(x))`
/// and may return non-finite values at the bracket ends. `start` comes with its
/// already-computed value so warm-started callers don't pay for it twice.
pub(crate) fn decreasing_root<T: Real>(
    mut lo: T,
    mut hi: T,
    start: (T, (T, T)),
    tol: T,
    mut eval: impl FnMut(T) -> (T, T),
) -> T {
    let half = T::lit(0.5);
    let (mut x, (mut fx, mut dfx)) = start;
    let mut last_step = hi - lo;
    for _ in 0..200 {
        if fx == T::zero() {
            return x;
        }
        if fx > T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= tol {
            return half * (lo + hi);
        }
        let newton = x - fx / dfx;
        let step = (newton - x).abs();
        let next = if newton.is_finite() && newton > lo && newton < hi && step <= half * last_step {
            if step < tol * T::lit(0.01) {
                return newton;
            }
            last_step = step;
            newton
        } else {
            last_step = hi - lo;
            half * (lo + hi)
        };
        x = next;
        (fx, dfx) = eval(x);
        if fx.is_nan() {
            // Treat an undefined value as lying beyond the root; keeps the bracket valid.
            fx = -T::one();
            dfx = T::nan();
        }
    }
    half * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let f = |x: f64| (2.0 - x * x * x, -3.0 * x * x);
        let r = decreasing_root(0.0, 2.0, (2.0, f(2.0)), 1e-12, f);
        assert!((r - 2f64.cbrt()).abs() < 1e-11);
    }

    #[test]
    fn survives_useless_derivatives() {
        let f = |x: f64| (0.3 - x, f64::NAN);
        let r = decreasing_root(0.0, 1.0, (0.0, f(0.0)), 1e-10, f);
        assert!((r - 0.3).abs() < 1e-10);
    }
}
