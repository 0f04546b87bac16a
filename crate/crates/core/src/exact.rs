//! Ground-truth bilevel solver: every budget-feasible leader set against the
//! exact follower response.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::follower::{knapsack_exact, FollowerSolution};
use crate::instance::Instance;
use crate::scalar::{parse, Scalar};

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("instance has {n} items, exhaustive limit is {limit}")]
    InstanceTooLarge { n: usize, limit: usize },
}

/// The guarantee attached to a result by the algorithm that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoundClaim {
    Exact,
    /// A proven guarantee, described in words.
    Guaranteed(String),
    /// Enumeration was capped; no guarantee holds.
    Heuristic(String),
}

impl BoundClaim {
    pub fn truncated(&self) -> bool {
        matches!(self, BoundClaim::Heuristic(_))
    }
}

impl fmt::Display for BoundClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundClaim::Exact => write!(f, "exact"),
            BoundClaim::Guaranteed(s) => write!(f, "{s}"),
            BoundClaim::Heuristic(s) => write!(f, "heuristic (budget-capped): {s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilevelResult<S> {
    pub leader: Vec<bool>,
    pub follower_response: FollowerSolution<S>,
    pub objective: S,
    pub bound_claim: BoundClaim,
    /// The leader vector satisfies A x <= budget_multiplier * a.
    pub budget_multiplier: S,
}

#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    pub leader_cap: Option<usize>,
    pub exhaustive_limit: usize,
    /// Ignore the exhaustive limit.
    pub force: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            leader_cap: None,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            force: false,
        }
    }
}

/// Lexicographic order on 0/1 vectors stored as bitmasks, item 0 first.
fn lex_cmp(a: u64, b: u64) -> Ordering {
    let d = a ^ b;
    if d == 0 {
        Ordering::Equal
    } else if a >> d.trailing_zeros() & 1 == 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Lexicographic order on 0/1 vectors.
pub fn lex_cmp_bools(a: &[bool], b: &[bool]) -> Ordering {
    a.cmp(b)
}

/// Budget-feasible leader sets, by popcount then lexicographic index order.
pub fn leader_sets<S: Scalar>(instance: &Instance<S>, cap: Option<usize>) -> Vec<u64> {
    let eligible: Vec<usize> = (0..instance.n())
        .filter(|&j| instance.leader_fits_alone(j))
        .collect();
    let cap = cap.unwrap_or(eligible.len()).min(eligible.len());
    let mut out = Vec::new();
    let mut spent = vec![S::zero(); instance.s_a()];
    for k in 0..=cap {
        combos(instance, &eligible, k, 0, 0, &mut spent, &mut out);
    }
    out
}

fn combos<S: Scalar>(
    instance: &Instance<S>,
    eligible: &[usize],
    left: usize,
    from: usize,
    mask: u64,
    spent: &mut Vec<S>,
    out: &mut Vec<u64>,
) {
    if left == 0 {
        out.push(mask);
        return;
    }
    for pos in from..eligible.len() {
        if eligible.len() - pos < left {
            break;
        }
        let j = eligible[pos];
        let cost = &instance.item(j).cost;
        let fits = spent
            .iter()
            .zip(cost)
            .zip(instance.leader_budget())
            .all(|((s, c), a)| s.clone() + c.clone() <= *a);
        if !fits {
            continue;
        }
        for (s, c) in spent.iter_mut().zip(cost) {
            *s = s.clone() + c.clone();
        }
        combos(
            instance,
            eligible,
            left - 1,
            pos + 1,
            mask | 1 << j,
            spent,
            out,
        );
        for (s, c) in spent.iter_mut().zip(cost) {
            *s = s.clone() - c.clone();
        }
    }
}

pub fn mask_to_bools(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|j| mask >> j & 1 == 1).collect()
}

/// Exact follower response when the leader interdicts `leader`.
pub fn best_response<S: Scalar>(instance: &Instance<S>, leader: &[bool]) -> FollowerSolution<S> {
    let available: Vec<bool> = leader.iter().map(|&x| !x).collect();
    knapsack_exact(
        &instance.profits(),
        &instance.weights(),
        &available,
        instance.follower_budget(),
    )
}

pub fn solve<S: Scalar>(
    instance: &Instance<S>,
    options: ExactOptions,
) -> Result<BilevelResult<S>, ExactError> {
    let n = instance.n();
    if (n > options.exhaustive_limit && !options.force) || n > 63 {
        return Err(ExactError::InstanceTooLarge {
            n,
            limit: options.exhaustive_limit.min(63),
        });
    }
    let profits = instance.profits();
    let weights = instance.weights();
    let budget = instance.follower_budget();
    let sets = leader_sets(instance, options.leader_cap);
    let evaluate = |mask: u64| {
        let available: Vec<bool> = (0..n).map(|j| mask >> j & 1 == 0).collect();
        (
            knapsack_exact(&profits, &weights, &available, budget).value,
            mask,
        )
    };
    let better = |a: (S, u64), b: (S, u64)| match a.0.cmp(&b.0).then(lex_cmp(a.1, b.1)) {
        Ordering::Greater => b,
        _ => a,
    };
    let (_, mask) = sets
        .par_iter()
        .map(|&m| evaluate(m))
        .reduce_with(better)
        .expect("the empty leader set is always feasible");
    let leader = mask_to_bools(mask, n);
    let response = best_response(instance, &leader);
    Ok(BilevelResult {
        objective: response.value.clone(),
        follower_response: response,
        leader,
        bound_claim: BoundClaim::Exact,
        budget_multiplier: S::one(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport<S> {
    pub leader_feasible: bool,
    pub follower_feasible: bool,
    pub objective_matches: bool,
    pub recomputed_objective: S,
    pub issues: Vec<String>,
}

impl<S> VerificationReport<S> {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Re-check a result against the instance: leader budget (times the stated
/// multiplier), the follower response, and the exact best-response value.
pub fn verify<S: Scalar>(
    instance: &Instance<S>,
    result: &BilevelResult<S>,
) -> VerificationReport<S> {
    let n = instance.n();
    let mut issues = Vec::new();
    if result.leader.len() != n || result.follower_response.selected.len() != n {
        issues.push("dimension-mismatch".to_string());
        return VerificationReport {
            leader_feasible: false,
            follower_feasible: false,
            objective_matches: false,
            recomputed_objective: S::zero(),
            issues,
        };
    }
    let leader_feasible = instance.leader_feasible(&result.leader, &result.budget_multiplier);
    if !leader_feasible {
        issues.push("leader-infeasible".to_string());
    }
    let resp = &result.follower_response;
    let recount = FollowerSolution::from_selection(
        &instance.profits(),
        &instance.weights(),
        instance.s_b(),
        resp.selected.clone(),
    );
    let follower_feasible = (0..n).all(|j| !(resp.selected[j] && result.leader[j]))
        && recount
            .consumed
            .iter()
            .zip(instance.follower_budget())
            .all(|(c, b)| c <= b)
        && recount.value == resp.value
        && recount.consumed == resp.consumed;
    if !follower_feasible {
        issues.push("follower-response-invalid".to_string());
    }
    let recomputed = best_response(instance, &result.leader).value;
    let objective_matches = recomputed == result.objective && resp.value == result.objective;
    if !objective_matches {
        issues.push(format!(
            "objective-mismatch: claimed {}, recomputed {}",
            result.objective, recomputed
        ));
    }
    VerificationReport {
        leader_feasible,
        follower_feasible,
        objective_matches,
        recomputed_objective: recomputed,
        issues,
    }
}

/// Serialized form of a result, with rationals as strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub leader: Vec<u8>,
    pub objective: String,
    pub follower_selected: Vec<u8>,
    pub follower_value: String,
    pub follower_consumed: Vec<String>,
    pub bound_claim: String,
    pub truncated: bool,
    pub budget_multiplier: String,
}

impl<S: Scalar> BilevelResult<S> {
    pub fn to_doc(&self) -> ResultDoc {
        let bits = |v: &[bool]| v.iter().map(|&b| b as u8).collect();
        ResultDoc {
            leader: bits(&self.leader),
            objective: self.objective.to_string(),
            follower_selected: bits(&self.follower_response.selected),
            follower_value: self.follower_response.value.to_string(),
            follower_consumed: self
                .follower_response
                .consumed
                .iter()
                .map(|c| c.to_string())
                .collect(),
            bound_claim: self.bound_claim.to_string(),
            truncated: self.bound_claim.truncated(),
            budget_multiplier: self.budget_multiplier.to_string(),
        }
    }

    pub fn from_doc(doc: &ResultDoc) -> Result<Self, String> {
        let num = |t: &str| parse::<S>(t).ok_or_else(|| format!("bad rational {t:?}"));
        let claim = if doc.bound_claim == "exact" {
            BoundClaim::Exact
        } else if doc.truncated {
            BoundClaim::Heuristic(doc.bound_claim.clone())
        } else {
            BoundClaim::Guaranteed(doc.bound_claim.clone())
        };
        Ok(BilevelResult {
            leader: doc.leader.iter().map(|&b| b != 0).collect(),
            follower_response: FollowerSolution {
                selected: doc.follower_selected.iter().map(|&b| b != 0).collect(),
                value: num(&doc.follower_value)?,
                consumed: doc
                    .follower_consumed
                    .iter()
                    .map(|c| num(c))
                    .collect::<Result<_, _>>()?,
            },
            objective: num(&doc.objective)?,
            bound_claim: claim,
            budget_multiplier: num(&doc.budget_multiplier)?,
        })
    }
}
