use crate::scalar::{ceil_grid_exponent, floor_grid_exponent, from_usize, max_of, pow, Scalar};

use super::{Instance, InstanceError, Item};

/// Unit-budget copy of an instance. Zero-budget dimensions are dropped; the
/// retained original dimension indices are kept alongside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledInstance<S> {
    pub instance: Instance<S>,
    /// Original profit = scaled profit * profit_scale.
    pub profit_scale: S,
    pub original_index_map: Vec<usize>,
    pub leader_dims: Vec<usize>,
    pub follower_dims: Vec<usize>,
    /// Cost exceeds the budget alone, or is positive on a zero-budget dimension.
    pub leader_forbidden: Vec<bool>,
    /// Some scaled weight coordinate exceeds 1, or is positive on a zero-budget dimension.
    pub follower_infeasible: Vec<bool>,
}

impl<S: Scalar> ScaledInstance<S> {
    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn profit(&self, j: usize) -> &S {
        &self.instance.item(j).profit
    }

    pub fn cost(&self, j: usize) -> &[S] {
        &self.instance.item(j).cost
    }

    pub fn weight(&self, j: usize) -> &[S] {
        &self.instance.item(j).weight
    }

    fn with_items(&self, items: Vec<Item<S>>) -> Self {
        let instance = Instance::new_unchecked_dims(
            self.instance.leader_budget().to_vec(),
            self.instance.follower_budget().to_vec(),
            items,
        )
        .expect("transform keeps dimensions");
        ScaledInstance {
            instance,
            ..self.clone()
        }
    }
}

/// Divide costs and weights by the budgets. Profits are divided by
/// max(1, p_max), so instances whose profits are already at most 1 keep them.
pub fn normalize<S: Scalar>(instance: &Instance<S>) -> Result<ScaledInstance<S>, InstanceError> {
    let pmax = max_of(instance.items().iter().map(|it| &it.profit));
    let scale = if pmax > S::one() { pmax } else { S::one() };
    normalize_with_scale(instance, &scale)
}

/// Normalize with an explicit profit scale (used by the OPT-scale grid).
pub fn normalize_with_scale<S: Scalar>(
    instance: &Instance<S>,
    profit_scale: &S,
) -> Result<ScaledInstance<S>, InstanceError> {
    if instance.n() == 0 {
        return Err(InstanceError::EmptyInstance);
    }
    if !profit_scale.is_positive() {
        return Err(InstanceError::NegativeEntry {
            what: "profit scale".into(),
        });
    }
    let a = instance.leader_budget();
    let b = instance.follower_budget();
    let leader_dims: Vec<usize> = (0..a.len()).filter(|&i| a[i].is_positive()).collect();
    let follower_dims: Vec<usize> = (0..b.len()).filter(|&i| b[i].is_positive()).collect();

    let mut leader_forbidden = Vec::with_capacity(instance.n());
    let mut follower_infeasible = Vec::with_capacity(instance.n());
    let mut items = Vec::with_capacity(instance.n());
    for item in instance.items() {
        let cost: Vec<S> = leader_dims
            .iter()
            .map(|&i| item.cost[i].clone() / a[i].clone())
            .collect();
        let weight: Vec<S> = follower_dims
            .iter()
            .map(|&i| item.weight[i].clone() / b[i].clone())
            .collect();
        let dropped_cost = (0..a.len()).any(|i| a[i].is_zero() && item.cost[i].is_positive());
        let dropped_weight = (0..b.len()).any(|i| b[i].is_zero() && item.weight[i].is_positive());
        leader_forbidden.push(dropped_cost || cost.iter().any(|c| *c > S::one()));
        follower_infeasible.push(dropped_weight || weight.iter().any(|w| *w > S::one()));
        items.push(Item::new(
            item.profit.clone() / profit_scale.clone(),
            cost,
            weight,
        ));
    }
    let instance = Instance::new_unchecked_dims(
        vec![S::one(); leader_dims.len()],
        vec![S::one(); follower_dims.len()],
        items,
    )?;
    Ok(ScaledInstance {
        original_index_map: (0..instance.n()).collect(),
        instance,
        profit_scale: profit_scale.clone(),
        leader_dims,
        follower_dims,
        leader_forbidden,
        follower_infeasible,
    })
}

fn check_delta<S: Scalar>(delta: &S) -> Result<(), InstanceError> {
    if delta.is_positive() && *delta < S::one() {
        Ok(())
    } else {
        Err(InstanceError::DeltaOutOfRange)
    }
}

/// Profit rounding: values above δ² drop to the largest δ²(1+δ)^h below them.
pub fn round_profits<S: Scalar>(
    scaled: &ScaledInstance<S>,
    delta: &S,
) -> Result<ScaledInstance<S>, InstanceError> {
    check_delta(delta)?;
    let unit = delta.clone() * delta.clone();
    let growth = S::one() + delta.clone();
    let items = scaled
        .instance
        .items()
        .iter()
        .map(|it| {
            let p = if it.profit > unit {
                let h = floor_grid_exponent(&unit, &growth, &it.profit);
                unit.clone() * pow(&growth, h)
            } else {
                it.profit.clone()
            };
            Item::new(p, it.cost.clone(), it.weight.clone())
        })
        .collect();
    Ok(scaled.with_items(items))
}

/// Weight rounding for s_B >= 2. Large-weight items keep dimension 1 and
/// round every other coordinate up onto the (δ²/s_B)(1+δ)^h grid.
pub fn round_weights_general<S: Scalar>(
    scaled: &ScaledInstance<S>,
    delta: &S,
) -> Result<ScaledInstance<S>, InstanceError> {
    check_delta(delta)?;
    let s_b = scaled.instance.s_b();
    if s_b < 2 {
        return Err(InstanceError::DimensionTooSmall);
    }
    let unit = delta.clone() * delta.clone() / from_usize::<S>(s_b);
    let growth = S::one() + delta.clone();
    let items = scaled
        .instance
        .items()
        .iter()
        .map(|it| {
            let large = max_of(&it.weight) > *delta;
            let weight = if large {
                it.weight
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        if i == 0 {
                            v.clone()
                        } else if *v <= unit {
                            unit.clone()
                        } else {
                            unit.clone() * pow(&growth, ceil_grid_exponent(&unit, &growth, v))
                        }
                    })
                    .collect()
            } else {
                it.weight.clone()
            };
            Item::new(it.profit.clone(), it.cost.clone(), weight)
        })
        .collect();
    Ok(scaled.with_items(items))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfitClass {
    Small,
    Medium,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyMode {
    /// s_B = 1: the weight is a scalar.
    Scalar,
    /// Weight criterion is the infinity norm.
    InfinityNorm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification<S> {
    pub profit: Vec<ProfitClass>,
    pub weight_large: Vec<bool>,
    pub delta: S,
}

impl<S: Scalar> Classification<S> {
    pub fn is_large(&self, j: usize) -> bool {
        self.profit[j] == ProfitClass::Large || self.weight_large[j]
    }

    pub fn large_items(&self) -> Vec<usize> {
        (0..self.profit.len())
            .filter(|&j| self.is_large(j))
            .collect()
    }

    pub fn small_items(&self) -> Vec<usize> {
        (0..self.profit.len())
            .filter(|&j| !self.is_large(j))
            .collect()
    }
}

pub fn classify<S: Scalar>(
    scaled: &ScaledInstance<S>,
    delta: &S,
    mode: ClassifyMode,
) -> Result<Classification<S>, InstanceError> {
    check_delta(delta)?;
    if mode == ClassifyMode::Scalar && scaled.instance.s_b() > 1 {
        return Err(InstanceError::ModeMismatch);
    }
    let d2 = delta.clone() * delta.clone();
    let mut profit = Vec::with_capacity(scaled.n());
    let mut weight_large = Vec::with_capacity(scaled.n());
    for it in scaled.instance.items() {
        profit.push(if it.profit > *delta {
            ProfitClass::Large
        } else if it.profit > d2 {
            ProfitClass::Medium
        } else {
            ProfitClass::Small
        });
        weight_large.push(max_of(&it.weight) > *delta);
    }
    Ok(Classification {
        profit,
        weight_large,
        delta: delta.clone(),
    })
}
