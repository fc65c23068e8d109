//! Threshold partition of `[0, 1]` and classification of intervals into it.
//!
//! Thresholds `α_1 < … < α_K` cut `[0, 1]` into `K + 1` cells
//! `[0, α_1), [α_1, α_2), …, [α_{K-1}, α_K), [α_K, 1]`. Cell `j` is
//! `[α_j, α_{j+1})` with `α_0 = 0`; only the last cell is closed on the right.

use serde::{Deserialize, Serialize};

use crate::error::check_closed_unit;
use crate::{Error, Real, Result};

/// Which cell an interval has been resolved into, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Decided(usize),
    Undecided,
}

impl Classification {
    pub fn is_decided(&self) -> bool {
        matches!(self, Classification::Decided(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPartition<T> {
    thresholds: Vec<T>,
}

impl<T: Real> ThresholdPartition<T> {
    /// Duplicate thresholds are rejected, not merged; deduplicate first.
    pub fn new(thresholds: Vec<T>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Thresholds("at least one threshold is required".into()));
        }
        for (i, &a) in thresholds.iter().enumerate() {
            if !(a > T::zero() && a < T::one()) {
                return Err(Error::Thresholds(format!("threshold {i} = {a} is not in (0, 1)")));
            }
        }
        if let Some(i) = thresholds.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Thresholds(format!(
                "thresholds must be strictly ascending: {} >= {} at position {}",
                thresholds[i],
                thresholds[i + 1],
                i + 1
            )));
        }
        Ok(Self { thresholds })
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    /// `K + 1`.
    pub fn cell_count(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn last_cell(&self) -> usize {
        self.thresholds.len()
    }

    /// Left end of cell `j` (included).
    pub fn left(&self, j: usize) -> T {
        if j == 0 {
            T::zero()
        } else {
            self.thresholds[j - 1]
        }
    }

    /// Right end of cell `j`; excluded except for the last cell.
    pub fn right(&self, j: usize) -> T {
        self.thresholds.get(j).copied().unwrap_or_else(T::one)
    }

    /// `(left, right)` for every cell in order.
    pub fn cells(&self) -> Vec<(T, T)> {
        (0..self.cell_count()).map(|j| (self.left(j), self.right(j))).collect()
    }

    /// Index of the unique cell containing `p ∈ [0, 1]`.
    pub fn cell_of(&self, p: T) -> usize {
        self.thresholds.partition_point(|&a| a <= p)
    }

    /// Distance from `p` to the nearest of `{0, 1} ∪ thresholds`.
    pub fn min_boundary_distance(&self, p: T) -> Result<T> {
        check_closed_unit("p", p)?;
        let j = self.cell_of(p);
        let to_left = p - self.left(j);
        let to_right = self.right(j) - p;
        // the nearest boundary is one of the two ends of p's own cell
        Ok(to_left.min(to_right))
    }

    /// `Decided(j)` iff `[lower, upper]` fits inside cell `j`: `left ≤ lower`
    /// and `upper < right`, or `upper ≤ 1` for the last cell.
    pub fn classify(&self, lower: T, upper: T) -> Classification {
        let j = self.cell_of(lower);
        let fits = if j == self.last_cell() {
            upper <= T::one()
        } else {
            upper < self.right(j)
        };
        if fits && lower <= upper {
            Classification::Decided(j)
        } else {
            Classification::Undecided
        }
    }
}

pub fn build_partition<T: Real>(thresholds: Vec<T>) -> Result<ThresholdPartition<T>> {
    ThresholdPartition::new(thresholds)
}

pub fn min_boundary_distance<T: Real>(p: T, partition: &ThresholdPartition<T>) -> Result<T> {
    partition.min_boundary_distance(p)
}

pub fn classify<T: Real>(interval: &crate::confseq::IntervalEstimate<T>, partition: &ThresholdPartition<T>) -> Classification {
    partition.classify(interval.lower, interval.upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bh4() -> ThresholdPartition<f64> {
        ThresholdPartition::new(vec![0.025, 0.05, 0.075, 0.1]).unwrap()
    }

    #[test]
    fn cells_unrolled() {
        let p = bh4();
        assert_eq!(p.cell_count(), 5);
        assert_eq!(
            p.cells(),
            vec![(0.0, 0.025), (0.025, 0.05), (0.05, 0.075), (0.075, 0.1), (0.1, 1.0)]
        );
        let single = ThresholdPartition::new(vec![0.5]).unwrap();
        assert_eq!(single.cells(), vec![(0.0, 0.5), (0.5, 1.0)]);
    }

    #[test]
    fn rejects_bad_thresholds() {
        assert!(ThresholdPartition::<f64>::new(vec![]).is_err());
        assert!(ThresholdPartition::new(vec![0.1, 0.1]).is_err());
        assert!(ThresholdPartition::new(vec![0.2, 0.1]).is_err());
        assert!(ThresholdPartition::new(vec![0.0, 0.1]).is_err());
        assert!(ThresholdPartition::new(vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn boundary_distances() {
        let p = bh4();
        assert!((p.min_boundary_distance(0.06).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(p.min_boundary_distance(0.025).unwrap(), 0.0);
        let single = ThresholdPartition::new(vec![0.1f64]).unwrap();
        assert!((single.min_boundary_distance(0.5).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(single.min_boundary_distance(1.0).unwrap(), 0.0);
        assert_eq!(single.min_boundary_distance(0.0).unwrap(), 0.0);
        assert!(single.min_boundary_distance(1.5).is_err());
    }

    #[test]
    fn classify_examples() {
        let p = bh4();
        assert_eq!(p.classify(0.051, 0.074), Classification::Decided(2));
        assert_eq!(p.classify(0.04, 0.06), Classification::Undecided);
        assert_eq!(p.classify(0.1, 1.0), Classification::Decided(4));
        // half-open right end
        assert_eq!(p.classify(0.03, 0.05), Classification::Undecided);
        assert_eq!(p.classify(0.0, 0.0249), Classification::Decided(0));
    }

    fn partition_strategy() -> impl Strategy<Value = ThresholdPartition<f64>> {
        proptest::collection::btree_set(1u32..999, 1..8).prop_map(|set| {
            ThresholdPartition::new(set.into_iter().map(|k| k as f64 / 1000.0).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn every_point_in_exactly_one_cell(part in partition_strategy(), p in 0.0f64..=1.0) {
            let hits = part.cells().iter().enumerate()
                .filter(|&(j, &(l, r))| l <= p && (p < r || (j == part.last_cell() && p <= r)))
                .count();
            prop_assert_eq!(hits, 1);
            let (l, r) = part.cells()[part.cell_of(p)];
            prop_assert!(l <= p && p <= r);
        }

        #[test]
        fn containment(part in partition_strategy(), p in 0.0f64..=1.0,
                       a in -1.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
            let d = part.min_boundary_distance(p).unwrap();
            prop_assume!(d > 0.0);
            let p_hat = p + a * d / 2.0 * 0.999;
            let width = b * d / 2.0 * 0.999;
            let lower = p_hat - c * width;
            let upper = lower + width;
            prop_assert_eq!(part.classify(lower, upper), Classification::Decided(part.cell_of(p)));
        }

        #[test]
        fn shrinking_keeps_decision(part in partition_strategy(), l in 0.0f64..=1.0, w in 0.0f64..0.2,
                                    s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let u = (l + w).min(1.0);
            if let Classification::Decided(j) = part.classify(l, u) {
                let l2 = l + s * (u - l);
                let u2 = l2 + t * (u - l2);
                prop_assert_eq!(part.classify(l2, u2), Classification::Decided(j));
            }
        }
    }
}
