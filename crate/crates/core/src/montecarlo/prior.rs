use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::stream::{uniform, Lane, StreamSeed};
use crate::error::{check_closed_unit, check_open_unit};
use crate::partition::ThresholdPartition;
use crate::{Error, Real, Result};

/// Distribution the true p-values are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorSpec<T> {
    Uniform01,
    /// Uniform on `[0, 1]` with probability `pi0`, otherwise `Beta(a, b)`.
    SandveMixture { pi0: T, a: T, b: T },
    /// The first `m - 1` coordinates uniform on
    /// `[alpha_prev + 2η, alpha_last - 2η]`, the last uniform on
    /// `[alpha_last - η, alpha_last + η]`, so the last is always the largest
    /// and straddles the final threshold. Build with [`PriorSpec::region_a`].
    RegionA { eta: T, alpha_prev: T, alpha_last: T },
    PointMass { p: T },
}

impl<T: Real> PriorSpec<T> {
    pub fn sandve(pi0: T, a: T, b: T) -> Result<Self> {
        let spec = PriorSpec::SandveMixture { pi0, a, b };
        spec.validate()?;
        Ok(spec)
    }

    /// Region A around the last two thresholds of `partition`.
    pub fn region_a(partition: &ThresholdPartition<T>, eta: T) -> Result<Self> {
        let alphas = partition.thresholds();
        if alphas.len() < 2 {
            return Err(Error::Thresholds("region A needs at least two thresholds".into()));
        }
        let spec = PriorSpec::RegionA {
            eta,
            alpha_prev: alphas[alphas.len() - 2],
            alpha_last: alphas[alphas.len() - 1],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PriorSpec::Uniform01 => Ok(()),
            PriorSpec::SandveMixture { pi0, a, b } => {
                check_closed_unit("pi0", pi0)?;
                for (name, shape) in [("a", a), ("b", b)] {
                    if !(shape > T::zero() && shape.is_finite()) {
                        return Err(Error::out_of_range(name, "(0, inf)", shape.to_f64().unwrap_or(f64::NAN)));
                    }
                }
                Ok(())
            }
            PriorSpec::RegionA {
                eta,
                alpha_prev,
                alpha_last,
            } => {
                check_open_unit("alpha_prev", alpha_prev)?;
                check_open_unit("alpha_last", alpha_last)?;
                let limit = (alpha_last - alpha_prev) / T::lit(4.0);
                if !(eta > T::zero() && eta < limit && alpha_last + eta <= T::one()) {
                    return Err(Error::out_of_range(
                        "eta",
                        "(0, (alpha_m - alpha_{m-1}) / 4)",
                        eta.to_f64().unwrap_or(f64::NAN),
                    ));
                }
                Ok(())
            }
            PriorSpec::PointMass { p } => check_closed_unit("p", p),
        }
    }

    /// Mean of the marginal distribution of one coordinate; for region A,
    /// of the non-last coordinates.
    pub fn mean(&self) -> T {
        let half = T::lit(0.5);
        match *self {
            PriorSpec::Uniform01 => half,
            PriorSpec::SandveMixture { pi0, a, b } => pi0 * half + (T::one() - pi0) * a / (a + b),
            PriorSpec::RegionA { alpha_prev, alpha_last, .. } => half * (alpha_prev + alpha_last),
            PriorSpec::PointMass { p } => p,
        }
    }
}

/// `m` true p-values drawn from `spec`.
///
/// Uses the prior lane of `(seed.master_seed, seed.repetition, seed.hypothesis)`;
/// the Bernoulli streams of the same repetition are unaffected.
pub fn sample_prior<T: Real>(spec: &PriorSpec<T>, m: usize, seed: StreamSeed) -> Result<Vec<T>> {
    spec.validate()?;
    let mut rng = seed.rng(Lane::Prior);
    let f = |x: T| x.to_f64().expect("finite parameter");
    let draws: Vec<f64> = match *spec {
        PriorSpec::Uniform01 => (0..m).map(|_| uniform(&mut rng, 0.0, 1.0)).collect(),
        PriorSpec::SandveMixture { pi0, a, b } => {
            let beta = Beta::new(f(a), f(b)).map_err(|_| Error::out_of_range("beta shape", "(0, inf)", f(a)))?;
            let pi0 = f(pi0);
            (0..m)
                .map(|_| {
                    if uniform(&mut rng, 0.0, 1.0) < pi0 {
                        uniform(&mut rng, 0.0, 1.0)
                    } else {
                        beta.sample(&mut rng)
                    }
                })
                .collect()
        }
        PriorSpec::RegionA {
            eta,
            alpha_prev,
            alpha_last,
        } => {
            let (eta, lo, top) = (f(eta), f(alpha_prev), f(alpha_last));
            (0..m)
                .map(|i| {
                    if i + 1 < m {
                        uniform(&mut rng, lo + 2.0 * eta, top - 2.0 * eta)
                    } else {
                        uniform(&mut rng, top - eta, top + eta)
                    }
                })
                .collect()
        }
        PriorSpec::PointMass { p } => vec![f(p); m],
    };
    Ok(draws.into_iter().map(T::lit).collect())
}
