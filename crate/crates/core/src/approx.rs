//! Pieces shared by the two approximation schemes: the OPT-scale grid,
//! forced items, large-item guess enumeration, subset tables for dominant
//! choices, and memoized exact evaluation of candidate leader vectors.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::exact::{BilevelResult, BoundClaim};
use crate::follower::{knapsack_exact, FollowerSolution};
use crate::instance::{Classification, Instance, ProfitClass, ScaledInstance};
use crate::scalar::{ceil_grid_exponent, pow, Scalar};

/// Counters collected during a run. `lp_rank_violations` counts extreme
/// points with more fractional leader variables than non-box rows; it must
/// stay zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub scales: usize,
    pub guesses: usize,
    pub lp_solves: usize,
    pub lp_rank_violations: usize,
    pub max_fractional: usize,
    pub candidates: usize,
    pub truncated: bool,
    pub notes: Vec<String>,
}

impl RunStats {
    pub(crate) fn absorb(&mut self, other: RunStats) {
        self.guesses += other.guesses;
        self.lp_solves += other.lp_solves;
        self.lp_rank_violations += other.lp_rank_violations;
        self.max_fractional = self.max_fractional.max(other.max_fractional);
        self.candidates += other.candidates;
        self.truncated |= other.truncated;
        for n in other.notes {
            if !self.notes.contains(&n) {
                self.notes.push(n);
            }
        }
    }

    pub(crate) fn note(&mut self, text: impl Into<String>) {
        let text = text.into();
        if !self.notes.contains(&text) {
            self.notes.push(text);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxOutcome<S> {
    pub result: BilevelResult<S>,
    pub stats: RunStats,
}

/// Candidate scales Σp / (1+ε)^t for t = 0..=T, T the smallest exponent with
/// p_min (1+ε)^T >= Σp.
pub fn scale_grid<S: Scalar>(instance: &Instance<S>, eps: &S) -> Vec<S> {
    if instance.n() == 0 {
        return Vec::new();
    }
    let total = instance.total_profit();
    let pmin = instance
        .items()
        .iter()
        .map(|it| it.profit.clone())
        .min()
        .expect("nonempty");
    let growth = S::one() + eps.clone();
    let t = ceil_grid_exponent(&pmin, &growth, &total);
    (0..=t).map(|k| total.clone() / pow(&growth, k)).collect()
}

/// Items the leader must take at this scale: profit above 1 and packable by
/// the follower alone. None when that set is not leader-feasible.
pub(crate) fn forced_items<S: Scalar>(scaled: &ScaledInstance<S>) -> Option<(Vec<usize>, Vec<S>)> {
    let forced: Vec<usize> = (0..scaled.n())
        .filter(|&j| !scaled.follower_infeasible[j] && *scaled.profit(j) > S::one())
        .collect();
    if forced.iter().any(|&j| scaled.leader_forbidden[j]) {
        return None;
    }
    let cost = add_costs(scaled, &vec![S::zero(); scaled.instance.s_a()], &forced);
    if cost.iter().any(|c| *c > S::one()) {
        return None;
    }
    Some((forced, cost))
}

pub(crate) fn add_costs<S: Scalar>(
    scaled: &ScaledInstance<S>,
    base: &[S],
    items: &[usize],
) -> Vec<S> {
    let mut out = base.to_vec();
    for &j in items {
        for (o, c) in out.iter_mut().zip(scaled.cost(j)) {
            *o = o.clone() + c.clone();
        }
    }
    out
}

/// How a large item's leader decision was fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuessRule {
    /// Large profit, small weight: which few stay open is enumerated.
    OpenSetEnumeration,
    /// Small profit, large weight: never interdicted.
    ForcedSkip,
    /// Large weight, large or medium profit: decided by the key items of
    /// its group.
    KeyItems,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargeGuess<S> {
    /// Large items the leader takes, ascending.
    pub take: Vec<usize>,
    /// (item, leader takes it, rule) for every large item.
    pub decided: Vec<(usize, bool, GuessRule)>,
    /// Leader cost of the forced items plus `take`.
    pub a_prime: Vec<S>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessStream<S> {
    pub guesses: Vec<LargeGuess<S>>,
    pub truncated: bool,
}

/// Parameters of the large-item guess enumeration.
pub(crate) struct GuessRules<'a, S> {
    /// At most this many large-profit small-weight items stay open.
    pub leave_cap: usize,
    /// Key items per group.
    pub key_count: usize,
    /// Group key of a large-weight large/medium-profit item.
    pub group_key: &'a dyn Fn(usize) -> Vec<S>,
    /// Weight the follower compares within a group (smaller preferred).
    pub group_weight: &'a dyn Fn(usize) -> S,
}

/// Leader decisions over one component: (items taken, their cost).
type Options<S> = Vec<(Vec<usize>, Vec<S>)>;

pub(crate) fn enumerate_guesses<S: Scalar>(
    scaled: &ScaledInstance<S>,
    class: &Classification<S>,
    large: &[usize],
    base_cost: &[S],
    rules: &GuessRules<'_, S>,
    max_guesses: Option<usize>,
) -> GuessStream<S> {
    let zero = vec![S::zero(); base_cost.len()];
    let mut decided_rule = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let mut groups: BTreeMap<Vec<S>, Vec<usize>> = BTreeMap::new();
    for &j in large {
        let big_weight = class.weight_large[j];
        match (class.profit[j], big_weight) {
            (ProfitClass::Large, false) => {
                open.push(j);
                decided_rule.push((j, GuessRule::OpenSetEnumeration));
            }
            (ProfitClass::Small, true) => decided_rule.push((j, GuessRule::ForcedSkip)),
            (_, true) => {
                groups.entry((rules.group_key)(j)).or_default().push(j);
                decided_rule.push((j, GuessRule::KeyItems));
            }
            (_, false) => unreachable!("item {j} is not large"),
        }
    }

    let mut components: Vec<Options<S>> = Vec::new();
    // open-set component: leave at most leave_cap items, take the rest
    let mut comp = Vec::new();
    for k in 0..=rules.leave_cap.min(open.len()) {
        for leave in combinations(open.len(), k) {
            let take: Vec<usize> = (0..open.len())
                .filter(|p| !leave.contains(p))
                .map(|p| open[p])
                .collect();
            let cost = add_costs(scaled, &zero, &take);
            comp.push((take, cost));
        }
    }
    components.push(comp);

    for members in groups.values() {
        let mut sorted = members.clone();
        sorted.sort_by(|&a, &b| {
            (rules.group_weight)(a)
                .cmp(&(rules.group_weight)(b))
                .then(a.cmp(&b))
        });
        let mut seen: Vec<Vec<usize>> = Vec::new();
        let mut comp = Vec::new();
        for k in 0..=rules.key_count.min(sorted.len()) {
            for keys in combinations(sorted.len(), k) {
                let limit = if k == rules.key_count {
                    *keys.last().expect("k >= 1")
                } else {
                    sorted.len()
                };
                let mut take: Vec<usize> = (0..limit)
                    .filter(|p| !keys.contains(p))
                    .map(|p| sorted[p])
                    .collect();
                take.sort_unstable();
                if seen.contains(&take) {
                    continue;
                }
                seen.push(take.clone());
                let cost = add_costs(scaled, &zero, &take);
                comp.push((take, cost));
            }
        }
        components.push(comp);
    }

    let mut guesses = Vec::new();
    let mut truncated = false;
    let mut chosen: Vec<usize> = Vec::new();
    product(
        scaled,
        &components,
        0,
        base_cost.to_vec(),
        &mut chosen,
        &mut |take: &[usize], cost: &[S]| {
            if max_guesses.is_some_and(|m| guesses.len() >= m) {
                truncated = true;
                return false;
            }
            let mut take = take.to_vec();
            take.sort_unstable();
            let decided = decided_rule
                .iter()
                .map(|&(j, rule)| (j, take.binary_search(&j).is_ok(), rule))
                .collect();
            guesses.push(LargeGuess {
                take,
                decided,
                a_prime: cost.to_vec(),
            });
            true
        },
    );
    GuessStream { guesses, truncated }
}

/// Depth-first Cartesian product with budget pruning. Returns false once
/// the sink asks to stop.
fn product<S: Scalar>(
    scaled: &ScaledInstance<S>,
    components: &[Options<S>],
    depth: usize,
    spent: Vec<S>,
    chosen: &mut Vec<usize>,
    sink: &mut dyn FnMut(&[usize], &[S]) -> bool,
) -> bool {
    if depth == components.len() {
        return sink(chosen, &spent);
    }
    for (take, cost) in &components[depth] {
        if take.iter().any(|&j| scaled.leader_forbidden[j]) {
            continue;
        }
        let next: Vec<S> = spent
            .iter()
            .zip(cost)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        if next.iter().any(|c| *c > S::one()) {
            continue;
        }
        let len = chosen.len();
        chosen.extend_from_slice(take);
        let go_on = product(scaled, components, depth + 1, next, chosen, sink);
        chosen.truncate(len);
        if !go_on {
            return false;
        }
    }
    true
}

/// k-subsets of 0..n in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Largest number of large items indexed by a [`SubsetTable`].
pub(crate) const SUBSET_TABLE_LIMIT: usize = 16;

/// Per-subset cell ids and a global rank (by first-dimension weight, then
/// lexicographic id list) over subsets of a fixed item list. A dominant
/// choice of a cell is its rank-minimal subset.
pub(crate) struct SubsetTable {
    pub items: Vec<usize>,
    cell: Vec<Option<u32>>,
    rank: Vec<u32>,
}

impl SubsetTable {
    /// `cell_of(subset ids, first-dim weight accumulator)` classifies a
    /// subset; `weight1` gives the ranking weight of one item.
    pub fn build<S: Scalar>(
        items: &[usize],
        size_cap: usize,
        weight1: impl Fn(usize) -> S,
        cell_of: impl Fn(&[usize]) -> Option<u32>,
    ) -> SubsetTable {
        assert!(items.len() <= SUBSET_TABLE_LIMIT, "subset table too large");
        let total = 1usize << items.len();
        let mut weights: Vec<S> = vec![S::zero(); total];
        let mut cell = vec![None; total];
        for mask in 1..total {
            let low = mask.trailing_zeros() as usize;
            weights[mask] = weights[mask & (mask - 1)].clone() + weight1(items[low]);
        }
        for (mask, c) in cell.iter_mut().enumerate() {
            if (mask.count_ones() as usize) <= size_cap {
                let ids: Vec<usize> = (0..items.len())
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| items[b])
                    .collect();
                *c = cell_of(&ids);
            }
        }
        let ids = |mask: usize| -> Vec<usize> {
            (0..items.len()).filter(|b| mask >> b & 1 == 1).collect()
        };
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by(|&a, &b| {
            weights[a]
                .cmp(&weights[b])
                .then_with(|| ids(a).cmp(&ids(b)))
        });
        let mut rank = vec![0u32; total];
        for (r, &mask) in order.iter().enumerate() {
            rank[mask] = r as u32;
        }
        SubsetTable {
            items: items.to_vec(),
            cell,
            rank,
        }
    }

    pub fn mask_of(&self, ids: &[usize]) -> usize {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, j)| ids.contains(j))
            .fold(0, |m, (b, _)| m | 1 << b)
    }

    pub fn ids_of(&self, mask: usize) -> Vec<usize> {
        (0..self.items.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| self.items[b])
            .collect()
    }

    /// Rank-minimal subset of `within` per cell.
    pub fn best_per_cell(&self, within: usize) -> BTreeMap<u32, usize> {
        let mut best: BTreeMap<u32, usize> = BTreeMap::new();
        let mut sub = within;
        loop {
            if let Some(c) = self.cell[sub] {
                match best.get(&c) {
                    Some(&b) if self.rank[b] <= self.rank[sub] => {}
                    _ => {
                        best.insert(c, sub);
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & within;
        }
        best
    }
}

/// Exact follower evaluation of candidate leader vectors against the
/// original instance, memoized, keeping the best by (value, lex x).
pub(crate) struct Evaluator<'a, S> {
    instance: &'a Instance<S>,
    profits: Vec<S>,
    weights: Vec<Vec<S>>,
    memo: HashMap<Vec<bool>, S>,
    best: Option<(S, Vec<bool>)>,
}

impl<'a, S: Scalar> Evaluator<'a, S> {
    pub fn new(instance: &'a Instance<S>) -> Self {
        Evaluator {
            instance,
            profits: instance.profits(),
            weights: instance.weights(),
            memo: HashMap::new(),
            best: None,
        }
    }

    pub fn evaluated(&self) -> usize {
        self.memo.len()
    }

    /// Evaluate the candidates not seen before. Leader-infeasible vectors are
    /// rejected with a panic: every producer guarantees feasibility.
    pub fn offer(&mut self, candidates: Vec<Vec<bool>>) {
        let mut fresh: Vec<Vec<bool>> = candidates
            .into_iter()
            .filter(|x| !self.memo.contains_key(x))
            .collect();
        fresh.sort();
        fresh.dedup();
        let one = S::one();
        for x in &fresh {
            assert!(
                self.instance.leader_feasible(x, &one),
                "candidate overspends the leader budget"
            );
        }
        let values: Vec<S> = fresh
            .par_iter()
            .map(|x| {
                let available: Vec<bool> = x.iter().map(|&t| !t).collect();
                knapsack_exact(
                    &self.profits,
                    &self.weights,
                    &available,
                    self.instance.follower_budget(),
                )
                .value
            })
            .collect();
        for (x, v) in fresh.into_iter().zip(values) {
            let better = match &self.best {
                None => true,
                Some((bv, bx)) => v.cmp(bv).then_with(|| x.cmp(bx)) == Ordering::Less,
            };
            if better {
                self.best = Some((v.clone(), x.clone()));
            }
            self.memo.insert(x, v);
        }
    }

    pub fn finish(self, bound_claim: BoundClaim) -> BilevelResult<S> {
        let (_, leader) = self.best.expect("the empty leader set is always offered");
        let available: Vec<bool> = leader.iter().map(|&t| !t).collect();
        let response: FollowerSolution<S> = knapsack_exact(
            &self.profits,
            &self.weights,
            &available,
            self.instance.follower_budget(),
        );
        BilevelResult {
            objective: response.value.clone(),
            follower_response: response,
            leader,
            bound_claim,
            budget_multiplier: S::one(),
        }
    }
}

/// Leader vector from item lists.
pub(crate) fn leader_vector(n: usize, parts: &[&[usize]]) -> Vec<bool> {
    let mut x = vec![false; n];
    for part in parts {
        for &j in *part {
            x[j] = true;
        }
    }
    x
}
