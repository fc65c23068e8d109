//! Bonferroni, Benjamini–Hochberg step-up and Holm step-down, evaluated both
//! on exact p-values and on partial knowledge of which partition cell each
//! p-value lies in.
//!
//! With the partition built from the procedure's own thresholds, every
//! comparison `p ≤ α_k` depends on `p` only through a *level* `L`:
//! `p ≤ α_k ⟺ k ≥ L`. A p-value exactly at threshold `α_j` has level `j`,
//! one strictly inside cell `j` has level `j + 1`. A hypothesis classified
//! into cell `j` is taken to lie strictly inside it (the endpoint is a null
//! event for a continuous p-value), so it has level `j + 1`; an unclassified
//! one may have any level in `0..=K+1`.
//!
//! Rejection indicators are antitone in the levels, so the decisions forced
//! by the knowledge are read off two corner completions: every unknown at
//! its lowest level (most rejections) and at its highest (fewest).

use serde::{Deserialize, Serialize};

use crate::error::{check_closed_unit, check_open_unit};
use crate::partition::{Classification, ThresholdPartition};
use crate::{Error, Real, Result};

/// Largest `m` accepted by [`brute_force_decisions`].
pub const BRUTE_FORCE_MAX_M: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcedureKind {
    Bonferroni,
    #[serde(rename = "bh", alias = "benjamini-hochberg")]
    BenjaminiHochberg,
    Holm,
}

impl std::str::FromStr for ProcedureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bonferroni" => Ok(ProcedureKind::Bonferroni),
            "bh" | "benjamini-hochberg" => Ok(ProcedureKind::BenjaminiHochberg),
            "holm" => Ok(ProcedureKind::Holm),
            other => Err(format!("unknown procedure `{other}` (expected bonferroni, bh or holm)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcedureSpec<T> {
    pub kind: ProcedureKind,
    pub alpha: T,
    pub m: usize,
}

impl<T: Real> ProcedureSpec<T> {
    pub fn new(kind: ProcedureKind, alpha: T, m: usize) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        if m == 0 {
            return Err(Error::out_of_range("m", "[1, inf)", 0.0));
        }
        Ok(Self { kind, alpha, m })
    }

    /// Ascending thresholds: `iα/m` (BH), `α/(m-i+1)` (Holm), `{α/m}` (Bonferroni).
    pub fn thresholds(&self) -> Vec<T> {
        let m = T::from_usize(self.m).expect("m representable");
        match self.kind {
            ProcedureKind::Bonferroni => vec![self.alpha / m],
            ProcedureKind::BenjaminiHochberg => (1..=self.m)
                .map(|i| T::from_usize(i).unwrap() * self.alpha / m)
                .collect(),
            ProcedureKind::Holm => (1..=self.m)
                .map(|i| self.alpha / T::from_usize(self.m - i + 1).unwrap())
                .collect(),
        }
    }

    pub fn partition(&self) -> Result<ThresholdPartition<T>> {
        ThresholdPartition::new(self.thresholds())
    }
}

pub fn procedure_thresholds<T: Real>(spec: &ProcedureSpec<T>) -> Vec<T> {
    spec.thresholds()
}

/// Indices (0-based, ascending) of the hypotheses the procedure rejects.
pub fn evaluate_exact<T: Real>(spec: &ProcedureSpec<T>, pvalues: &[T]) -> Result<Vec<usize>> {
    if pvalues.len() != spec.m {
        return Err(Error::Length {
            expected: spec.m,
            got: pvalues.len(),
        });
    }
    for &p in pvalues {
        check_closed_unit("p-value", p)?;
    }
    let alphas = spec.thresholds();
    let mut order: Vec<usize> = (0..spec.m).collect();
    order.sort_by(|&a, &b| pvalues[a].partial_cmp(&pvalues[b]).unwrap().then(a.cmp(&b)));

    let mut rejected: Vec<usize> = match spec.kind {
        ProcedureKind::Bonferroni => (0..spec.m).filter(|&i| pvalues[i] <= alphas[0]).collect(),
        ProcedureKind::BenjaminiHochberg => {
            // largest k with p_(k) <= α_k; reject every p <= α_k*
            match (1..=spec.m).rev().find(|&k| pvalues[order[k - 1]] <= alphas[k - 1]) {
                Some(k) => (0..spec.m).filter(|&i| pvalues[i] <= alphas[k - 1]).collect(),
                None => Vec::new(),
            }
        }
        ProcedureKind::Holm => order
            .iter()
            .enumerate()
            .take_while(|&(k, &i)| pvalues[i] <= alphas[k])
            .map(|(_, &i)| i)
            .collect(),
    };
    rejected.sort_unstable();
    Ok(rejected)
}

/// Forced and open decisions given what is known about each p-value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionState {
    pub forced_reject: Vec<usize>,
    pub forced_accept: Vec<usize>,
    pub undecided: Vec<usize>,
}

impl DecisionState {
    fn from_flags(ever_rejected: &[bool], ever_accepted: &[bool]) -> Self {
        let mut state = DecisionState::default();
        for (i, (&r, &a)) in ever_rejected.iter().zip(ever_accepted).enumerate() {
            match (r, a) {
                (true, false) => state.forced_reject.push(i),
                (false, true) => state.forced_accept.push(i),
                _ => state.undecided.push(i),
            }
        }
        state
    }
}

/// Rejections for hypotheses described by levels (`p ≤ α_k ⟺ k ≥ level`),
/// `cells - 1` thresholds. Counting sort keeps this linear.
fn reject_by_levels(kind: ProcedureKind, levels: &[usize], thresholds: usize) -> Vec<bool> {
    let m = levels.len();
    match kind {
        ProcedureKind::Bonferroni => levels.iter().map(|&l| l <= 1).collect(),
        ProcedureKind::BenjaminiHochberg | ProcedureKind::Holm => {
            // below[k] = #{h : level_h <= k}
            let mut below = vec![0usize; thresholds + 2];
            for &l in levels {
                below[l] += 1;
            }
            for k in 1..below.len() {
                below[k] += below[k - 1];
            }
            let cutoff = if kind == ProcedureKind::BenjaminiHochberg {
                // k* = max{k : L_(k) <= k} = max{k : below[k] >= k}; reject level <= k*
                (1..=m).rev().find(|&k| below[k] >= k).unwrap_or(0)
            } else {
                // first k with L_(k) > k; reject levels strictly below L_(k)
                match (1..=m).find(|&k| below[k] < k) {
                    Some(k) => below.iter().position(|&c| c >= k).unwrap() - 1,
                    None => thresholds + 1,
                }
            };
            levels.iter().map(|&l| l <= cutoff).collect()
        }
    }
}

fn check_knowledge<T: Real>(
    spec: &ProcedureSpec<T>,
    knowledge: &[Classification],
    partition: &ThresholdPartition<T>,
) -> Result<()> {
    if partition.thresholds() != spec.thresholds().as_slice() {
        return Err(Error::PartitionMismatch);
    }
    if knowledge.len() != spec.m {
        return Err(Error::Length {
            expected: spec.m,
            got: knowledge.len(),
        });
    }
    if let Some(j) = knowledge.iter().find_map(|c| match c {
        Classification::Decided(j) if *j > partition.last_cell() => Some(*j),
        _ => None,
    }) {
        return Err(Error::out_of_range("cell index", "[0, K]", j as f64));
    }
    Ok(())
}

/// Decisions that hold under every completion of the unknown p-values.
///
/// `partition` must be the procedure's own threshold partition.
pub fn partial_decisions<T: Real>(
    spec: &ProcedureSpec<T>,
    knowledge: &[Classification],
    partition: &ThresholdPartition<T>,
) -> Result<DecisionState> {
    check_knowledge(spec, knowledge, partition)?;
    let k = partition.thresholds().len();
    let (lowest, highest): (Vec<usize>, Vec<usize>) = knowledge
        .iter()
        .map(|c| match *c {
            Classification::Decided(j) => (j + 1, j + 1),
            Classification::Undecided => (0, k + 1),
        })
        .unzip();
    // rejected in some completion / accepted in some completion
    let ever_rejected = reject_by_levels(spec.kind, &lowest, k);
    let ever_accepted: Vec<bool> = reject_by_levels(spec.kind, &highest, k).iter().map(|&r| !r).collect();
    Ok(DecisionState::from_flags(&ever_rejected, &ever_accepted))
}

/// Exhaustive check of [`partial_decisions`]: every classified hypothesis is
/// placed at the midpoint of its cell, every unclassified one at each
/// threshold and each cell midpoint in turn, and the procedure is run on the
/// resulting real p-values.
pub fn brute_force_decisions<T: Real>(
    spec: &ProcedureSpec<T>,
    knowledge: &[Classification],
    partition: &ThresholdPartition<T>,
) -> Result<DecisionState> {
    if spec.m > BRUTE_FORCE_MAX_M {
        return Err(Error::TooManyHypotheses {
            m: spec.m,
            max: BRUTE_FORCE_MAX_M,
        });
    }
    check_knowledge(spec, knowledge, partition)?;
    let half = T::lit(0.5);
    let candidates: Vec<Vec<T>> = knowledge
        .iter()
        .map(|c| {
            let midpoint = |j: usize| half * (partition.left(j) + partition.right(j));
            match *c {
                Classification::Decided(j) => vec![midpoint(j)],
                Classification::Undecided => (0..=partition.last_cell())
                    .flat_map(|j| [partition.left(j), midpoint(j)])
                    .collect(),
            }
        })
        .collect();

    let m = spec.m;
    let mut ever_rejected = vec![false; m];
    let mut ever_accepted = vec![false; m];
    let mut cursor = vec![0usize; m];
    let mut pvalues: Vec<T> = candidates.iter().map(|c| c[0]).collect();
    loop {
        let rejected = evaluate_exact(spec, &pvalues)?;
        let mut flags = vec![false; m];
        for i in rejected {
            flags[i] = true;
        }
        for i in 0..m {
            if flags[i] {
                ever_rejected[i] = true;
            } else {
                ever_accepted[i] = true;
            }
        }
        if ever_rejected.iter().zip(&ever_accepted).all(|(&r, &a)| r && a) {
            break;
        }
        // odometer step
        let mut i = 0;
        while i < m {
            cursor[i] += 1;
            if cursor[i] < candidates[i].len() {
                pvalues[i] = candidates[i][cursor[i]];
                break;
            }
            cursor[i] = 0;
            pvalues[i] = candidates[i][0];
            i += 1;
        }
        if i == m {
            break;
        }
    }
    Ok(DecisionState::from_flags(&ever_rejected, &ever_accepted))
}

/// Decisions when every p-value is known to its cell except the
/// `leave_undecided` closest to a cell boundary.
pub fn decisions_with_unresolved<T: Real>(
    spec: &ProcedureSpec<T>,
    pvalues: &[T],
    leave_undecided: usize,
) -> Result<DecisionState> {
    if pvalues.len() != spec.m {
        return Err(Error::Length {
            expected: spec.m,
            got: pvalues.len(),
        });
    }
    if leave_undecided > spec.m {
        return Err(Error::out_of_range("leave_undecided", "[0, m]", leave_undecided as f64));
    }
    let partition = spec.partition()?;
    let distances = pvalues
        .iter()
        .map(|&p| partition.min_boundary_distance(p))
        .collect::<Result<Vec<T>>>()?;
    let mut knowledge: Vec<Classification> =
        pvalues.iter().map(|&p| Classification::Decided(partition.cell_of(p))).collect();
    if leave_undecided > 0 {
        let mut order: Vec<usize> = (0..spec.m).collect();
        let by_distance = |a: &usize, b: &usize| distances[*a].partial_cmp(&distances[*b]).unwrap().then(a.cmp(b));
        if leave_undecided < spec.m {
            order.select_nth_unstable_by(leave_undecided - 1, by_distance);
        }
        for &i in &order[..leave_undecided] {
            knowledge[i] = Classification::Undecided;
        }
    }
    partial_decisions(spec, &knowledge, &partition)
}

/// Number of undecided hypotheses in [`decisions_with_unresolved`].
pub fn undecided_count_experiment<T: Real>(spec: &ProcedureSpec<T>, pvalues: &[T], leave_undecided: usize) -> Result<usize> {
    Ok(decisions_with_unresolved(spec, pvalues, leave_undecided)?.undecided.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Classification::{Decided, Undecided};

    fn spec(kind: ProcedureKind, m: usize) -> ProcedureSpec<f64> {
        ProcedureSpec::new(kind, 0.1, m).unwrap()
    }

    #[test]
    fn thresholds() {
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(&spec(ProcedureKind::BenjaminiHochberg, 4).thresholds(), &[0.025, 0.05, 0.075, 0.1]));
        assert!(close(&spec(ProcedureKind::Bonferroni, 4).thresholds(), &[0.025]));
        assert!(close(&spec(ProcedureKind::Holm, 2).thresholds(), &[0.05, 0.1]));
    }

    #[test]
    fn bh_example() {
        let s = spec(ProcedureKind::BenjaminiHochberg, 4);
        assert_eq!(evaluate_exact(&s, &[0.01, 0.02, 0.03, 0.2]).unwrap(), vec![0, 1, 2]);
        for kind in [ProcedureKind::Bonferroni, ProcedureKind::BenjaminiHochberg, ProcedureKind::Holm] {
            let s = spec(kind, 5);
            assert_eq!(evaluate_exact(&s, &[0.0; 5]).unwrap(), vec![0, 1, 2, 3, 4]);
            assert!(evaluate_exact(&s, &[1.0; 5]).unwrap().is_empty());
        }
        assert!(evaluate_exact(&s, &[0.1, 0.2, 1.2, 0.0]).is_err());
    }

    #[test]
    fn holm_stops_at_first_failure() {
        let s = spec(ProcedureKind::Holm, 3);
        // α_i = 0.0333, 0.05, 0.1
        assert_eq!(evaluate_exact(&s, &[0.01, 0.06, 0.07]).unwrap(), vec![0]);
        assert_eq!(evaluate_exact(&s, &[0.01, 0.04, 0.07]).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn all_below_first_threshold() {
        let s = spec(ProcedureKind::BenjaminiHochberg, 3);
        let part = s.partition().unwrap();
        let d = partial_decisions(&s, &[Decided(0); 3], &part).unwrap();
        assert_eq!(d.forced_reject, vec![0, 1, 2]);
        assert!(d.undecided.is_empty());
    }

    #[test]
    fn step_up_blocked_by_largest() {
        let s = spec(ProcedureKind::BenjaminiHochberg, 3);
        let part = s.partition().unwrap();
        let k = [Decided(2), Decided(2), Undecided];
        let d = partial_decisions(&s, &k, &part).unwrap();
        assert_eq!(d.undecided, vec![0, 1, 2]);
        assert_eq!(brute_force_decisions(&s, &k, &part).unwrap(), d);
        let d0 = partial_decisions(&s, &[Decided(0); 3], &part).unwrap();
        assert_eq!(brute_force_decisions(&s, &[Decided(0); 3], &part).unwrap(), d0);
    }

    #[test]
    fn single_unknown_bonferroni() {
        let s = spec(ProcedureKind::Bonferroni, 1);
        let part = s.partition().unwrap();
        let d = brute_force_decisions(&s, &[Undecided], &part).unwrap();
        assert_eq!(d.undecided, vec![0]);
        assert_eq!(partial_decisions(&s, &[Undecided], &part).unwrap(), d);
    }

    #[test]
    fn mismatched_partition_rejected() {
        let s = spec(ProcedureKind::BenjaminiHochberg, 3);
        let other = spec(ProcedureKind::Holm, 3).partition().unwrap();
        assert_eq!(partial_decisions(&s, &[Undecided; 3], &other), Err(Error::PartitionMismatch));
        let part = s.partition().unwrap();
        assert!(partial_decisions(&s, &[Undecided; 2], &part).is_err());
        assert!(partial_decisions(&s, &[Decided(4), Undecided, Undecided], &part).is_err());
        let big = spec(ProcedureKind::Bonferroni, 13);
        assert!(brute_force_decisions(&big, &[Undecided; 13], &big.partition().unwrap()).is_err());
    }

    #[test]
    fn undecided_count_edges() {
        let s = spec(ProcedureKind::BenjaminiHochberg, 6);
        let p = [0.001, 0.02, 0.3, 0.07, 0.9, 0.05];
        assert_eq!(undecided_count_experiment(&s, &p, 0).unwrap(), 0);
        assert!(undecided_count_experiment(&s, &p, 6).unwrap() <= 6);
        assert!(undecided_count_experiment(&s, &p, 7).is_err());
    }

    fn knowledge_strategy(cells: usize, m: usize) -> impl Strategy<Value = Vec<Classification>> {
        proptest::collection::vec(
            prop_oneof![Just(Undecided), (0..cells).prop_map(Decided)],
            m,
        )
    }

    fn kind_strategy() -> impl Strategy<Value = ProcedureKind> {
        prop_oneof![
            Just(ProcedureKind::Bonferroni),
            Just(ProcedureKind::BenjaminiHochberg),
            Just(ProcedureKind::Holm)
        ]
    }

    proptest! {
        #[test]
        fn refinement_never_revokes(kind in kind_strategy(), m in 1usize..7, seed in any::<u64>()) {
            let s = spec(kind, m);
            let part = s.partition().unwrap();
            let cells = part.cell_count();
            let mut rng = seed;
            let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1); (rng >> 33) as usize };
            let mut k: Vec<Classification> = (0..m).map(|_| if next() % 2 == 0 { Undecided } else { Decided(next() % cells) }).collect();
            let before = partial_decisions(&s, &k, &part).unwrap();
            if let Some(i) = k.iter().position(|c| *c == Undecided) {
                k[i] = Decided(next() % cells);
                let after = partial_decisions(&s, &k, &part).unwrap();
                for r in &before.forced_reject { prop_assert!(after.forced_reject.contains(r)); }
                for a in &before.forced_accept { prop_assert!(after.forced_accept.contains(a)); }
            }
        }

        #[test]
        fn full_knowledge_matches_exact(kind in kind_strategy(), ps in proptest::collection::vec(0.0f64..0.3, 1..9)) {
            let s = spec(kind, ps.len());
            let part = s.partition().unwrap();
            let k: Vec<Classification> = ps.iter().map(|&p| Decided(part.cell_of(p))).collect();
            let d = partial_decisions(&s, &k, &part).unwrap();
            prop_assert!(d.undecided.is_empty());
            // interior representatives of each cell
            let reps: Vec<f64> = k.iter().map(|c| match c { Decided(j) => 0.5 * (part.left(*j) + part.right(*j)), _ => unreachable!() }).collect();
            prop_assert_eq!(d.forced_reject, evaluate_exact(&s, &reps).unwrap());
        }

        #[test]
        fn bh_antitone(ps in proptest::collection::vec(0.0f64..0.2, 1..12), bumps in proptest::collection::vec(0.0f64..0.05, 12)) {
            let s = spec(ProcedureKind::BenjaminiHochberg, ps.len());
            let raised: Vec<f64> = ps.iter().zip(&bumps).map(|(p, b)| (p + b).min(1.0)).collect();
            prop_assert!(evaluate_exact(&s, &raised).unwrap().len() <= evaluate_exact(&s, &ps).unwrap().len());
        }

        #[test]
        fn matches_brute_force(kind in kind_strategy(), k in (1usize..5).prop_flat_map(|m| knowledge_strategy(m + 1, m))) {
            let s = spec(kind, k.len());
            let part = s.partition().unwrap();
            let k: Vec<Classification> = k.into_iter().map(|c| match c {
                Decided(j) => Decided(j.min(part.last_cell())),
                u => u,
            }).collect();
            prop_assert_eq!(partial_decisions(&s, &k, &part).unwrap(), brute_force_decisions(&s, &k, &part).unwrap());
        }
    }
}
