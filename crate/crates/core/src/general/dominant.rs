//! Dominant follower choices over the open large items, one per nonempty
//! (profit band, residual bucket vector) cell.

use crate::approx::SubsetTable;
use crate::scalar::{ceil_to_usize, floor_grid_exponent, from_usize, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominantChoiceGeneral<S> {
    /// Profit band k: total profit in [(k-1)ε, kε).
    pub band: usize,
    /// Residual buckets v_2..v_{s_B}; -1 is [0, ε).
    pub buckets: Vec<i32>,
    pub items: Vec<usize>,
    pub profit: S,
    pub consumed: Vec<S>,
    /// Budget left for small items: (1 - b[1], r_{v_2}, .., r_{v_{s_B}}).
    pub d: Vec<S>,
}

/// The (k, v) cell structure for fixed ε, δ and s_B.
#[derive(Debug, Clone)]
pub struct CellGrid<S> {
    pub eps: S,
    pub delta: S,
    pub s_b: usize,
    pub bands: usize,
    /// Largest bucket index V with ε(1+ε)^V <= 1 + 2δ.
    pub max_bucket: i32,
}

impl<S: Scalar> CellGrid<S> {
    pub fn new(eps: &S, delta: &S, s_b: usize) -> Self {
        let cap = S::one() + delta.clone() + delta.clone();
        let growth = S::one() + eps.clone();
        let max_bucket = floor_grid_exponent(eps, &growth, &cap) as i32;
        CellGrid {
            eps: eps.clone(),
            delta: delta.clone(),
            s_b,
            bands: 1 + ceil_to_usize(&(from_usize::<S>(s_b) / eps.clone())),
            max_bucket,
        }
    }

    /// Left end of bucket v (0 for v = -1).
    pub fn bucket_low(&self, v: i32) -> S {
        if v < 0 {
            S::zero()
        } else {
            self.eps.clone() * crate::scalar::pow(&(S::one() + self.eps.clone()), v as u32)
        }
    }

    /// Right end r_v of bucket v (ε for v = -1).
    pub fn bucket_high(&self, v: i32) -> S {
        self.bucket_low(v + 1).max(self.eps.clone())
    }

    fn bucket_of(&self, residual: &S) -> i32 {
        if *residual < self.eps {
            -1
        } else {
            floor_grid_exponent(&self.eps, &(S::one() + self.eps.clone()), residual) as i32
        }
    }

    /// Band and buckets of a subset with this profit and consumption, if
    /// it is a valid follower choice.
    pub fn cell(&self, profit: &S, consumed: &[S]) -> Option<(usize, Vec<i32>)> {
        if consumed[0] > S::one() {
            return None;
        }
        let cap = S::one() + self.delta.clone() + self.delta.clone();
        let mut buckets = Vec::with_capacity(self.s_b - 1);
        for c in &consumed[1..] {
            let residual = cap.clone() - c.clone();
            if residual.is_negative() {
                return None;
            }
            buckets.push(self.bucket_of(&residual));
        }
        let mut k = 1;
        let mut hi = self.eps.clone();
        while *profit >= hi {
            k += 1;
            hi = hi + self.eps.clone();
            if k > self.bands {
                return None;
            }
        }
        Some((k, buckets))
    }

    pub fn encode(&self, band: usize, buckets: &[i32]) -> u32 {
        let base = (self.max_bucket + 2) as u32;
        buckets
            .iter()
            .fold(band as u32, |acc, &v| acc * base + (v + 1) as u32)
    }

    /// Materialize the choice made of `items` (ids into the profit and
    /// weight tables).
    pub fn choice(
        &self,
        items: Vec<usize>,
        profit: &dyn Fn(usize) -> S,
        weight: &dyn Fn(usize) -> Vec<S>,
    ) -> Option<DominantChoiceGeneral<S>> {
        let total = items.iter().fold(S::zero(), |a, &j| a + profit(j));
        let mut consumed = vec![S::zero(); self.s_b];
        for &j in &items {
            for (c, w) in consumed.iter_mut().zip(weight(j)) {
                *c = c.clone() + w;
            }
        }
        let (band, buckets) = self.cell(&total, &consumed)?;
        let mut d = vec![S::one() - consumed[0].clone()];
        d.extend(buckets.iter().map(|&v| self.bucket_high(v)));
        Some(DominantChoiceGeneral {
            band,
            buckets,
            items,
            profit: total,
            consumed,
            d,
        })
    }

    /// Subset table over `items` whose cells are this grid's cells.
    pub(crate) fn table(
        &self,
        items: &[usize],
        size_cap: usize,
        profit: &dyn Fn(usize) -> S,
        weight: &dyn Fn(usize) -> Vec<S>,
    ) -> SubsetTable {
        SubsetTable::build(
            items,
            size_cap,
            |j| weight(j)[0].clone(),
            |ids| {
                let total = ids.iter().fold(S::zero(), |a, &j| a + profit(j));
                let mut consumed = vec![S::zero(); self.s_b];
                for &j in ids {
                    for (c, w) in consumed.iter_mut().zip(weight(j)) {
                        *c = c.clone() + w;
                    }
                }
                self.cell(&total, &consumed)
                    .map(|(k, v)| self.encode(k, &v))
            },
        )
    }

    /// Θ restricted to the items of `within` (a table mask), in cell order.
    pub(crate) fn theta(
        &self,
        table: &SubsetTable,
        within: usize,
        profit: &dyn Fn(usize) -> S,
        weight: &dyn Fn(usize) -> Vec<S>,
    ) -> Vec<DominantChoiceGeneral<S>> {
        table
            .best_per_cell(within)
            .values()
            .map(|&mask| {
                self.choice(table.ids_of(mask), profit, weight)
                    .expect("table cells are valid")
            })
            .collect()
    }
}

/// Θ for `items` given as (id, profit, rounded weight vector). At most
/// [`crate::approx::SUBSET_TABLE_LIMIT`] items.
pub fn compute_dominant_choices_general<S: Scalar>(
    items: &[(usize, S, Vec<S>)],
    eps: &S,
    delta: &S,
    s_b: usize,
    size_cap: usize,
) -> Vec<DominantChoiceGeneral<S>> {
    let grid = CellGrid::new(eps, delta, s_b);
    let ids: Vec<usize> = items.iter().map(|t| t.0).collect();
    let find = |j: usize| items.iter().find(|t| t.0 == j).expect("known id");
    let profit = |j: usize| find(j).1.clone();
    let weight = |j: usize| find(j).2.clone();
    let table = grid.table(&ids, size_cap, &profit, &weight);
    grid.theta(&table, table.mask_of(&ids), &profit, &weight)
}
