//! Instance data model, scaling and rounding transforms, file format and
//! generators.

mod generate;
mod io;
mod transform;

pub use generate::{gen_3hs_reduction, gen_random, HittingSetInstance, ValueGrid};
pub use io::{InstanceDoc, ItemDoc};
pub use transform::{
    classify, normalize, normalize_with_scale, round_profits, round_weights_general,
    Classification, ClassifyMode, ProfitClass, ScaledInstance,
};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance has no items")]
    EmptyInstance,
    #[error("negative entry in {what}")]
    NegativeEntry { what: String },
    #[error("item {item} has non-positive profit")]
    NonPositiveProfit { item: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("s_A and s_B must be positive")]
    ZeroDimension,
    #[error("delta must lie strictly between 0 and 1")]
    DeltaOutOfRange,
    #[error("operation needs s_B >= 2")]
    DimensionTooSmall,
    #[error("scalar classification requires s_B = 1")]
    ModeMismatch,
    #[error("invalid hitting-set instance: {0}")]
    InvalidHittingSet(String),
    #[error("malformed instance document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Item<S> {
    pub id: usize,
    pub profit: S,
    pub cost: Vec<S>,
    pub weight: Vec<S>,
}

impl<S: Scalar> Item<S> {
    pub fn new(profit: S, cost: Vec<S>, weight: Vec<S>) -> Self {
        Item {
            id: 0,
            profit,
            cost,
            weight,
        }
    }
}

/// Items plus leader budget `a` (s_A dims) and follower budget `b` (s_B dims).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance<S> {
    s_a: usize,
    s_b: usize,
    leader_budget: Vec<S>,
    follower_budget: Vec<S>,
    items: Vec<Item<S>>,
}

impl<S: Scalar> Instance<S> {
    /// Validates dimensions and signs; item ids are reassigned to positions.
    pub fn new(
        leader_budget: Vec<S>,
        follower_budget: Vec<S>,
        items: Vec<Item<S>>,
    ) -> Result<Self, InstanceError> {
        if leader_budget.is_empty() || follower_budget.is_empty() {
            return Err(InstanceError::ZeroDimension);
        }
        Self::build(leader_budget, follower_budget, items, true)
    }

    /// Like `new` but permits zero dimensions and zero profits; used for
    /// internal scaled copies.
    pub(crate) fn new_unchecked_dims(
        leader_budget: Vec<S>,
        follower_budget: Vec<S>,
        items: Vec<Item<S>>,
    ) -> Result<Self, InstanceError> {
        Self::build(leader_budget, follower_budget, items, false)
    }

    fn build(
        leader_budget: Vec<S>,
        follower_budget: Vec<S>,
        mut items: Vec<Item<S>>,
        strict_profit: bool,
    ) -> Result<Self, InstanceError> {
        let s_a = leader_budget.len();
        let s_b = follower_budget.len();
        if leader_budget.iter().any(|v| v.is_negative()) {
            return Err(InstanceError::NegativeEntry {
                what: "leader budget".into(),
            });
        }
        if follower_budget.iter().any(|v| v.is_negative()) {
            return Err(InstanceError::NegativeEntry {
                what: "follower budget".into(),
            });
        }
        for (j, item) in items.iter_mut().enumerate() {
            item.id = j;
            if item.cost.len() != s_a || item.weight.len() != s_b {
                return Err(InstanceError::DimensionMismatch(format!(
                    "item {j} has {} costs and {} weights, expected {s_a} and {s_b}",
                    item.cost.len(),
                    item.weight.len()
                )));
            }
            if item.profit.is_negative()
                || item.cost.iter().any(|v| v.is_negative())
                || item.weight.iter().any(|v| v.is_negative())
            {
                return Err(InstanceError::NegativeEntry {
                    what: format!("item {j}"),
                });
            }
            if strict_profit && item.profit.is_zero() {
                return Err(InstanceError::NonPositiveProfit { item: j });
            }
        }
        Ok(Instance {
            s_a,
            s_b,
            leader_budget,
            follower_budget,
            items,
        })
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn s_a(&self) -> usize {
        self.s_a
    }

    pub fn s_b(&self) -> usize {
        self.s_b
    }

    pub fn items(&self) -> &[Item<S>] {
        &self.items
    }

    pub fn item(&self, j: usize) -> &Item<S> {
        &self.items[j]
    }

    pub fn leader_budget(&self) -> &[S] {
        &self.leader_budget
    }

    pub fn follower_budget(&self) -> &[S] {
        &self.follower_budget
    }

    pub fn profits(&self) -> Vec<S> {
        self.items.iter().map(|it| it.profit.clone()).collect()
    }

    pub fn weights(&self) -> Vec<Vec<S>> {
        self.items.iter().map(|it| it.weight.clone()).collect()
    }

    pub fn total_profit(&self) -> S {
        self.items
            .iter()
            .fold(S::zero(), |acc, it| acc + it.profit.clone())
    }

    /// Leader cost of a 0/1 selection, per dimension.
    pub fn leader_cost(&self, x: &[bool]) -> Vec<S> {
        let mut acc = vec![S::zero(); self.s_a];
        for (item, _) in self.items.iter().zip(x).filter(|(_, &t)| t) {
            for (a, c) in acc.iter_mut().zip(&item.cost) {
                *a = a.clone() + c.clone();
            }
        }
        acc
    }

    /// `A x <= multiplier * a` for a 0/1 leader vector.
    pub fn leader_feasible(&self, x: &[bool], multiplier: &S) -> bool {
        self.leader_cost(x)
            .iter()
            .zip(&self.leader_budget)
            .all(|(c, a)| *c <= multiplier.clone() * a.clone())
    }

    /// True when the follower could pack item j alone.
    pub fn follower_fits_alone(&self, j: usize) -> bool {
        self.items[j]
            .weight
            .iter()
            .zip(&self.follower_budget)
            .all(|(w, b)| w <= b)
    }

    /// True when the leader could afford item j alone.
    pub fn leader_fits_alone(&self, j: usize) -> bool {
        self.items[j]
            .cost
            .iter()
            .zip(&self.leader_budget)
            .all(|(c, a)| c <= a)
    }

    /// Same items, different follower budget.
    pub fn with_follower_budget(&self, budget: Vec<S>) -> Result<Self, InstanceError> {
        Instance::new(self.leader_budget.clone(), budget, self.items.clone())
    }

    /// Same items, different leader budget.
    pub fn with_leader_budget(&self, budget: Vec<S>) -> Result<Self, InstanceError> {
        Instance::new(budget, self.follower_budget.clone(), self.items.clone())
    }

    /// Profits multiplied by `c`.
    pub fn with_profits_scaled(&self, c: &S) -> Result<Self, InstanceError> {
        let items = self
            .items
            .iter()
            .map(|it| {
                Item::new(
                    it.profit.clone() * c.clone(),
                    it.cost.clone(),
                    it.weight.clone(),
                )
            })
            .collect();
        Instance::new(
            self.leader_budget.clone(),
            self.follower_budget.clone(),
            items,
        )
    }
}
