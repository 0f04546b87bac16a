//! The follower's inner knapsack: exact branch-and-bound, fractional greedy,
//! and the pluggable oracle interface.

use std::cmp::Ordering;

use thiserror::Error;

use crate::instance::Instance;
use crate::scalar::{from_usize, int, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FollowerError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("items are not sorted by ratio descending, id ascending")]
    NotSorted,
    #[error("last item is not the dummy")]
    MissingDummy,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FollowerSolution<S> {
    pub selected: Vec<bool>,
    pub value: S,
    pub consumed: Vec<S>,
}

impl<S: Scalar> FollowerSolution<S> {
    pub fn empty(n: usize, s_b: usize) -> Self {
        FollowerSolution {
            selected: vec![false; n],
            value: S::zero(),
            consumed: vec![S::zero(); s_b],
        }
    }

    pub fn from_selection(
        profits: &[S],
        weights: &[Vec<S>],
        s_b: usize,
        selected: Vec<bool>,
    ) -> Self {
        let mut value = S::zero();
        let mut consumed = vec![S::zero(); s_b];
        for j in (0..selected.len()).filter(|&j| selected[j]) {
            value = value + profits[j].clone();
            for (c, w) in consumed.iter_mut().zip(&weights[j]) {
                *c = c.clone() + w.clone();
            }
        }
        FollowerSolution {
            selected,
            value,
            consumed,
        }
    }

    pub fn items(&self) -> Vec<usize> {
        (0..self.selected.len())
            .filter(|&j| self.selected[j])
            .collect()
    }
}

/// Optimal follower response over `available` items; among optimal sets the
/// lexicographically smallest selection vector.
pub fn solve_exact<S: Scalar>(
    instance: &Instance<S>,
    available: &[bool],
    budget: &[S],
) -> Result<FollowerSolution<S>, FollowerError> {
    if available.len() != instance.n() {
        return Err(FollowerError::DimensionMismatch(format!(
            "mask has length {}, instance has {} items",
            available.len(),
            instance.n()
        )));
    }
    if budget.len() != instance.s_b() {
        return Err(FollowerError::DimensionMismatch(format!(
            "budget has {} dims, instance has s_B = {}",
            budget.len(),
            instance.s_b()
        )));
    }
    Ok(knapsack_exact(
        &instance.profits(),
        &instance.weights(),
        available,
        budget,
    ))
}

/// Branch-and-bound on raw vectors. Items are branched in id order with the
/// 0-branch first, so leaves are visited in lexicographic order and the
/// first optimum found is the lexicographically smallest.
pub fn knapsack_exact<S: Scalar>(
    profits: &[S],
    weights: &[Vec<S>],
    available: &[bool],
    budget: &[S],
) -> FollowerSolution<S> {
    let n = profits.len();
    let s_b = budget.len();
    let cand: Vec<usize> = (0..n)
        .filter(|&j| {
            available[j]
                && profits[j].is_positive()
                && weights[j].iter().zip(budget).all(|(w, b)| w <= b)
        })
        .collect();
    if cand.is_empty() {
        return FollowerSolution::empty(n, s_b);
    }
    // per dimension, candidate positions by ratio descending
    let by_ratio: Vec<Vec<usize>> = (0..s_b)
        .map(|d| {
            let mut order: Vec<usize> = (0..cand.len()).collect();
            order.sort_by(|&a, &b| {
                ratio_cmp(
                    &profits[cand[a]],
                    &weights[cand[a]][d],
                    &profits[cand[b]],
                    &weights[cand[b]][d],
                )
                .then(a.cmp(&b))
            });
            order
        })
        .collect();
    let mut suffix = vec![S::zero(); cand.len() + 1];
    for k in (0..cand.len()).rev() {
        suffix[k] = suffix[k + 1].clone() + profits[cand[k]].clone();
    }
    let mut search = Search {
        profits,
        weights,
        cand: &cand,
        by_ratio: &by_ratio,
        suffix: &suffix,
        residual: budget.to_vec(),
        chosen: vec![false; cand.len()],
        best_value: S::zero(),
        best: vec![false; cand.len()],
    };
    search.dfs(0, S::zero());
    let mut selected = vec![false; n];
    for (k, &j) in cand.iter().enumerate() {
        selected[j] = search.best[k];
    }
    FollowerSolution::from_selection(profits, weights, s_b, selected)
}

struct Search<'a, S> {
    profits: &'a [S],
    weights: &'a [Vec<S>],
    cand: &'a [usize],
    by_ratio: &'a [Vec<usize>],
    suffix: &'a [S],
    residual: Vec<S>,
    chosen: Vec<bool>,
    best_value: S,
    best: Vec<bool>,
}

impl<S: Scalar> Search<'_, S> {
    fn dfs(&mut self, pos: usize, value: S) {
        if pos == self.cand.len() {
            if value > self.best_value {
                self.best_value = value;
                self.best.clone_from(&self.chosen);
            }
            return;
        }
        if value.clone() + self.bound(pos) <= self.best_value {
            return;
        }
        self.dfs(pos + 1, value.clone());
        let j = self.cand[pos];
        if self.weights[j]
            .iter()
            .zip(&self.residual)
            .all(|(w, r)| w <= r)
        {
            for (r, w) in self.residual.iter_mut().zip(&self.weights[j]) {
                *r = r.clone() - w.clone();
            }
            self.chosen[pos] = true;
            self.dfs(pos + 1, value + self.profits[j].clone());
            self.chosen[pos] = false;
            for (r, w) in self.residual.iter_mut().zip(&self.weights[j]) {
                *r = r.clone() + w.clone();
            }
        }
    }

    /// Upper bound on the profit still obtainable from positions >= pos:
    /// the smallest single-dimension fractional relaxation.
    fn bound(&self, pos: usize) -> S {
        let mut best = self.suffix[pos].clone();
        for (d, order) in self.by_ratio.iter().enumerate() {
            let mut room = self.residual[d].clone();
            let mut acc = S::zero();
            for &k in order.iter().filter(|&&k| k >= pos) {
                let j = self.cand[k];
                let w = &self.weights[j][d];
                if *w <= room {
                    room = room - w.clone();
                    acc = acc + self.profits[j].clone();
                } else {
                    acc = acc + self.profits[j].clone() * room.clone() / w.clone();
                    break;
                }
                if acc >= best {
                    break;
                }
            }
            if acc < best {
                best = acc;
            }
        }
        best
    }
}

/// Compare p_a/w_a with p_b/w_b in descending-ratio order (a zero weight is
/// an infinite ratio). `Less` means a comes first.
pub fn ratio_cmp<S: Scalar>(p_a: &S, w_a: &S, p_b: &S, w_b: &S) -> Ordering {
    match (w_a.is_zero(), w_b.is_zero()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => (p_b.clone() * w_a.clone()).cmp(&(p_a.clone() * w_b.clone())),
    }
}

/// An item of the fractional greedy. `id = None` marks the dummy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioItem<S> {
    pub id: Option<usize>,
    pub profit: S,
    pub weight: S,
}

/// Sort by (ratio desc, id asc) and append the dummy with weight 1 + total weight.
pub fn ratio_order_with_dummy<S: Scalar>(items: Vec<(usize, S, S)>) -> Vec<RatioItem<S>> {
    let total = items
        .iter()
        .fold(S::zero(), |acc, (_, _, w)| acc + w.clone());
    let mut out: Vec<RatioItem<S>> = items
        .into_iter()
        .map(|(id, profit, weight)| RatioItem {
            id: Some(id),
            profit,
            weight,
        })
        .collect();
    out.sort_by(|a, b| ratio_cmp(&a.profit, &a.weight, &b.profit, &b.weight).then(a.id.cmp(&b.id)));
    out.push(RatioItem {
        id: None,
        profit: S::zero(),
        weight: S::one() + total,
    });
    out
}

pub fn check_ratio_order<S: Scalar>(items: &[RatioItem<S>]) -> Result<(), FollowerError> {
    match items.last() {
        Some(last) if last.id.is_none() && last.profit.is_zero() && last.weight.is_positive() => {}
        _ => return Err(FollowerError::MissingDummy),
    }
    let real = &items[..items.len() - 1];
    for pair in real.windows(2) {
        let ord = ratio_cmp(
            &pair[0].profit,
            &pair[0].weight,
            &pair[1].profit,
            &pair[1].weight,
        )
        .then(pair[0].id.cmp(&pair[1].id));
        if ord != Ordering::Less || pair[0].id.is_none() {
            return Err(FollowerError::NotSorted);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOutcome<S> {
    /// One entry per item in the given order, dummy included.
    pub y: Vec<S>,
    pub value: S,
    /// Position (in the given order) of the item where the budget runs out.
    pub critical: usize,
}

/// Fractional greedy over ratio-sorted items. `availability` covers the real
/// items; the dummy is always available. The critical item is the first
/// positive-weight, positive-availability item whose available weight reaches
/// the remaining budget.
pub fn greedy_fractional<S: Scalar>(
    items: &[RatioItem<S>],
    availability: &[S],
    budget: &S,
) -> Result<GreedyOutcome<S>, FollowerError> {
    check_ratio_order(items)?;
    if availability.len() + 1 != items.len() {
        return Err(FollowerError::DimensionMismatch(format!(
            "{} availabilities for {} real items",
            availability.len(),
            items.len() - 1
        )));
    }
    let mut y = vec![S::zero(); items.len()];
    let mut remaining = budget.clone();
    let mut value = S::zero();
    for (pos, item) in items.iter().enumerate() {
        let avail = availability.get(pos).cloned().unwrap_or_else(S::one);
        if avail.is_zero() {
            continue;
        }
        if item.weight.is_zero() {
            y[pos] = avail.clone();
            value = value + item.profit.clone() * avail;
            continue;
        }
        let w_eff = item.weight.clone() * avail.clone();
        if w_eff >= remaining {
            let frac = remaining / item.weight.clone();
            value = value + item.profit.clone() * frac.clone();
            y[pos] = frac;
            return Ok(GreedyOutcome {
                y,
                value,
                critical: pos,
            });
        }
        remaining = remaining - w_eff;
        value = value + item.profit.clone() * avail.clone();
        y[pos] = avail;
    }
    unreachable!("the dummy outweighs every budget it is built for")
}

/// A follower solver with a claimed approximation guarantee.
pub trait FollowerOracle<S: Scalar>: Send + Sync {
    /// ρ: the returned value is at least optimum / ρ.
    fn guarantee(&self) -> S;
    fn solve(&self, profits: &[S], available: &[bool], budget: &[S]) -> FollowerSolution<S>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStrategy {
    Exact,
    Greedy,
}

pub struct ExactOracle<S> {
    weights: Vec<Vec<S>>,
}

impl<S: Scalar> FollowerOracle<S> for ExactOracle<S> {
    fn guarantee(&self) -> S {
        S::one()
    }

    fn solve(&self, profits: &[S], available: &[bool], budget: &[S]) -> FollowerSolution<S> {
        knapsack_exact(profits, &self.weights, available, budget)
    }
}

/// Greedy by profit over aggregate normalized weight, compared with the best
/// single item.
pub struct GreedyOracle<S> {
    weights: Vec<Vec<S>>,
    rho: S,
}

impl<S: Scalar> FollowerOracle<S> for GreedyOracle<S> {
    fn guarantee(&self) -> S {
        self.rho.clone()
    }

    fn solve(&self, profits: &[S], available: &[bool], budget: &[S]) -> FollowerSolution<S> {
        let n = profits.len();
        let s_b = budget.len();
        let fits = |j: usize| self.weights[j].iter().zip(budget).all(|(w, b)| w <= b);
        let cand: Vec<usize> = (0..n)
            .filter(|&j| available[j] && profits[j].is_positive() && fits(j))
            .collect();
        let aggregate = |j: usize| {
            self.weights[j]
                .iter()
                .zip(budget)
                .filter(|(_, b)| b.is_positive())
                .fold(S::zero(), |acc, (w, b)| acc + w.clone() / b.clone())
        };
        let mut order: Vec<(usize, S)> = cand.iter().map(|&j| (j, aggregate(j))).collect();
        order.sort_by(|a, b| {
            ratio_cmp(&profits[a.0], &a.1, &profits[b.0], &b.1).then(a.0.cmp(&b.0))
        });
        let mut residual = budget.to_vec();
        let mut greedy = vec![false; n];
        for (j, _) in order {
            if self.weights[j].iter().zip(&residual).all(|(w, r)| w <= r) {
                for (r, w) in residual.iter_mut().zip(&self.weights[j]) {
                    *r = r.clone() - w.clone();
                }
                greedy[j] = true;
            }
        }
        let greedy = FollowerSolution::from_selection(profits, &self.weights, s_b, greedy);
        let single = cand
            .iter()
            .copied()
            .fold(None::<usize>, |best, j| match best {
                Some(b) if profits[b] >= profits[j] => Some(b),
                _ => Some(j),
            });
        match single {
            Some(j) if profits[j] > greedy.value => {
                let mut sel = vec![false; n];
                sel[j] = true;
                FollowerSolution::from_selection(profits, &self.weights, s_b, sel)
            }
            _ => greedy,
        }
    }
}

pub fn make_exact_oracle<S: Scalar>(instance: &Instance<S>) -> ExactOracle<S> {
    ExactOracle {
        weights: instance.weights(),
    }
}

/// ρ label for the greedy oracle: 2 for one follower dimension; otherwise
/// max(2, n), since the best single item alone is an n-approximation.
pub fn greedy_guarantee<S: Scalar>(s_b: usize, n: usize) -> S {
    if s_b == 1 {
        int(2)
    } else {
        from_usize(n.max(2))
    }
}

pub fn make_oracle<S: Scalar>(
    instance: &Instance<S>,
    strategy: OracleStrategy,
) -> Box<dyn FollowerOracle<S>> {
    match strategy {
        OracleStrategy::Exact => Box::new(make_exact_oracle(instance)),
        OracleStrategy::Greedy => Box::new(GreedyOracle {
            weights: instance.weights(),
            rho: greedy_guarantee(instance.s_b(), instance.n()),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Item;
    use crate::scalar::ratio;
    use crate::Rational;

    fn inst(p: &[i64], w: &[i64], b: i64) -> Instance<Rational> {
        let items = p
            .iter()
            .zip(w)
            .map(|(&p, &w)| Item::new(int(p), vec![int(1)], vec![int(w)]))
            .collect();
        Instance::new(vec![int(1)], vec![int(b)], items).unwrap()
    }

    #[test]
    fn exact_examples() {
        let i = inst(&[3, 2, 2], &[2, 1, 1], 2);
        let s = solve_exact(&i, &[true; 3], &[int(2)]).unwrap();
        assert_eq!(s.value, int(4));
        assert_eq!(s.items(), vec![1, 2]);
        assert_eq!(s.consumed, vec![int(2)]);
        let s = solve_exact(&i, &[false; 3], &[int(2)]).unwrap();
        assert_eq!(s.value, int(0));
        let s = solve_exact(&i, &[true; 3], &[int(0)]).unwrap();
        assert_eq!(s.value, int(0));
        assert!(solve_exact(&i, &[true; 2], &[int(2)]).is_err());
    }

    #[test]
    fn exact_prefers_lexicographically_smallest() {
        // {0} and {1} both give 2; the vector (0,1) is smaller than (1,0)
        let i = inst(&[2, 2], &[1, 1], 1);
        let s = solve_exact(&i, &[true, true], &[int(1)]).unwrap();
        assert_eq!(s.items(), vec![1]);
    }

    #[test]
    fn greedy_examples() {
        let items = ratio_order_with_dummy(vec![(0, int(2), int(1)), (1, int(1), int(1))]);
        let g = greedy_fractional::<Rational>(&items, &[int(1), int(1)], &ratio(3, 2)).unwrap();
        assert_eq!(g.y[..2], [int(1), ratio(1, 2)]);
        assert_eq!(g.value, ratio(5, 2));
        assert_eq!(g.critical, 1);

        let g = greedy_fractional::<Rational>(&items, &[int(0), int(1)], &int(0)).unwrap();
        assert_eq!(g.value, int(0));
        assert_eq!(g.critical, 1);

        let g = greedy_fractional::<Rational>(&items, &[int(1), int(1)], &int(5)).unwrap();
        assert_eq!(g.critical, 2);
        assert_eq!(g.value, int(3));
    }

    #[test]
    fn greedy_rejects_bad_input() {
        let unsorted = vec![
            RatioItem {
                id: Some(0),
                profit: int::<Rational>(1),
                weight: int(1),
            },
            RatioItem {
                id: Some(1),
                profit: int(2),
                weight: int(1),
            },
            RatioItem {
                id: None,
                profit: int(0),
                weight: int(5),
            },
        ];
        assert_eq!(
            greedy_fractional(&unsorted, &[int(1), int(1)], &int(1)),
            Err(FollowerError::NotSorted)
        );
        let no_dummy = vec![RatioItem {
            id: Some(0),
            profit: int::<Rational>(1),
            weight: int(1),
        }];
        assert_eq!(
            greedy_fractional(&no_dummy, &[], &int(1)),
            Err(FollowerError::MissingDummy)
        );
    }

    #[test]
    fn oracles() {
        let i = inst(&[3, 2, 2], &[2, 1, 1], 2);
        let exact = make_exact_oracle(&i);
        assert_eq!(
            exact.solve(&i.profits(), &[true; 3], &[int(2)]),
            solve_exact(&i, &[true; 3], &[int(2)]).unwrap()
        );
        let greedy = make_oracle(&i, OracleStrategy::Greedy);
        assert_eq!(greedy.guarantee(), int(2));
        let g = greedy.solve(&i.profits(), &[true; 3], &[int(2)]);
        assert!(g.value <= int(4) && g.value * int::<Rational>(2) >= int(4));
    }
}
