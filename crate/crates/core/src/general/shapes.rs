//! Small-item classification for one dominant choice: weights are scaled by
//! the choice's residual budget d, grouped by rounded direction (shape) and
//! by rounded profit-to-weight ratio.

use std::collections::BTreeMap;

use crate::scalar::{ceil_grid_exponent, floor_grid_exponent, max_of, pow, Scalar};

use super::GeneralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RatioClass {
    /// ρ <= ε.
    Small,
    /// ε < ρ <= 1/ε, rounded down onto ε(1+ε)^k.
    Medium,
    /// ρ > 1/ε, or a weightless item.
    Big,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallEntry<S> {
    pub item: usize,
    /// B_j / d componentwise.
    pub scaled: Vec<S>,
    /// ‖scaled‖∞.
    pub w: S,
    /// Rounded direction; empty for weightless items.
    pub shape: Vec<S>,
    pub ratio_class: RatioClass,
    /// Index into `subgroups` for medium items.
    pub subgroup: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup<S> {
    pub shape: Vec<S>,
    /// Ratio grid exponent k: rounded ratio ε(1+ε)^k.
    pub k: u32,
    pub rho: S,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeClassification<S> {
    pub entries: Vec<SmallEntry<S>>,
    /// Items with a scaled coordinate above 1: the follower cannot take them.
    pub excluded: Vec<usize>,
    /// Ordered by (shape, k).
    pub subgroups: Vec<Subgroup<S>>,
}

impl<S: Scalar> ShapeClassification<S> {
    pub fn big_items(&self) -> impl Iterator<Item = &SmallEntry<S>> {
        self.entries
            .iter()
            .filter(|e| e.ratio_class == RatioClass::Big)
    }

    pub fn entry(&self, item: usize) -> Option<&SmallEntry<S>> {
        self.entries.iter().find(|e| e.item == item)
    }
}

/// Round each coordinate of a unit-norm direction up onto {ε(1+ε)^h},
/// values at most ε going to ε, and cap at 1.
pub fn round_shape<S: Scalar>(direction: &[S], eps: &S) -> Vec<S> {
    let growth = S::one() + eps.clone();
    direction
        .iter()
        .map(|g| {
            if *g <= *eps {
                eps.clone()
            } else {
                let v = eps.clone() * pow(&growth, ceil_grid_exponent(eps, &growth, g));
                v.min(S::one())
            }
        })
        .collect()
}

/// Classify `items` ((id, rounded profit, weight vector)) against the
/// residual budget `d`.
pub fn classify_small_items<S: Scalar>(
    items: &[(usize, S, Vec<S>)],
    d: &[S],
    eps: &S,
) -> Result<ShapeClassification<S>, GeneralError> {
    if d.iter().any(|v| !v.is_positive()) {
        return Err(GeneralError::ZeroResidual);
    }
    let growth = S::one() + eps.clone();
    let inv = S::one() / eps.clone();
    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    let mut groups: BTreeMap<(Vec<S>, u32), Vec<usize>> = BTreeMap::new();
    for (item, profit, weight) in items {
        let scaled: Vec<S> = weight
            .iter()
            .zip(d)
            .map(|(b, di)| b.clone() / di.clone())
            .collect();
        if scaled.iter().any(|v| *v > S::one()) {
            excluded.push(*item);
            continue;
        }
        let w = max_of(&scaled);
        if w.is_zero() {
            entries.push(SmallEntry {
                item: *item,
                scaled,
                w,
                shape: Vec::new(),
                ratio_class: RatioClass::Big,
                subgroup: None,
            });
            continue;
        }
        let direction: Vec<S> = scaled.iter().map(|v| v.clone() / w.clone()).collect();
        let shape = round_shape(&direction, eps);
        let rho = profit.clone() / w.clone();
        let ratio_class = if rho <= *eps {
            RatioClass::Small
        } else if rho > inv {
            RatioClass::Big
        } else {
            RatioClass::Medium
        };
        if ratio_class == RatioClass::Medium {
            let k = floor_grid_exponent(eps, &growth, &rho);
            groups.entry((shape.clone(), k)).or_default().push(*item);
        }
        entries.push(SmallEntry {
            item: *item,
            scaled,
            w,
            shape,
            ratio_class,
            subgroup: None,
        });
    }
    let mut subgroups = Vec::with_capacity(groups.len());
    for (idx, ((shape, k), members)) in groups.into_iter().enumerate() {
        for e in entries.iter_mut().filter(|e| members.contains(&e.item)) {
            e.subgroup = Some(idx);
        }
        let rho = eps.clone() * pow(&growth, k);
        subgroups.push(Subgroup {
            shape,
            k,
            rho,
            members,
        });
    }
    Ok(ShapeClassification {
        entries,
        excluded,
        subgroups,
    })
}
