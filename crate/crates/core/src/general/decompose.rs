//! Splitting a follower set that is feasible for the augmented budget
//! (1, 1+τ, .., 1+τ) into at most s_B sets feasible for the unit budget.

use thiserror::Error;

use crate::instance::Instance;
use crate::scalar::{int, max_of, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("selected set exceeds the augmented budget in dimension {0}")]
    BudgetViolation(usize),
    #[error("tau must lie in (0, 1/2]")]
    TauOutOfRange,
    #[error("item {0} is not in the instance")]
    UnknownItem(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionResult {
    /// Item sets in emission order; the last one is the residue.
    pub parts: Vec<Vec<usize>>,
    /// Satisfied dimensions after each emitted part (dimension 0 always).
    pub satisfied_dimension_trace: Vec<Vec<usize>>,
}

/// Each round looks only at dimensions not yet satisfied. If one remaining
/// item alone reaches τ there, it becomes a part; otherwise items are taken
/// in id order until the projected sum first reaches τ. Dimensions whose
/// part sum reaches τ become satisfied. After s_B - 1 rounds the remaining
/// items form the last part.
pub fn decompose_feasible_follower_set<S: Scalar>(
    selected: &[usize],
    instance: &Instance<S>,
    tau: &S,
) -> Result<DecompositionResult, DecomposeError> {
    if !tau.is_positive() || *tau > S::one() / int::<S>(2) {
        return Err(DecomposeError::TauOutOfRange);
    }
    if let Some(&j) = selected.iter().find(|&&j| j >= instance.n()) {
        return Err(DecomposeError::UnknownItem(j));
    }
    let s_b = instance.s_b();
    let b = instance.follower_budget();
    let mut remaining: Vec<usize> = selected.to_vec();
    remaining.sort_unstable();
    remaining.dedup();

    // weights relative to the budget; a zero budget admits only zero weight
    let scaled = |j: usize, i: usize| -> Option<S> {
        let w = &instance.item(j).weight[i];
        if b[i].is_positive() {
            Some(w.clone() / b[i].clone())
        } else if w.is_zero() {
            Some(S::zero())
        } else {
            None
        }
    };
    for i in 0..s_b {
        let cap = if i == 0 {
            S::one()
        } else {
            S::one() + tau.clone()
        };
        let mut total = S::zero();
        for &j in &remaining {
            total = total + scaled(j, i).ok_or(DecomposeError::BudgetViolation(i))?;
        }
        if total > cap {
            return Err(DecomposeError::BudgetViolation(i));
        }
    }
    let w = |j: usize, i: usize| scaled(j, i).expect("checked above");

    let mut satisfied = vec![false; s_b];
    satisfied[0] = true;
    let mut parts = Vec::new();
    let mut trace = Vec::new();
    for _ in 0..s_b.saturating_sub(1) {
        if remaining.is_empty() {
            break;
        }
        let open: Vec<usize> = (0..s_b).filter(|&i| !satisfied[i]).collect();
        let projected_norm = |items: &[usize]| -> S {
            let sums: Vec<S> = open
                .iter()
                .map(|&i| items.iter().fold(S::zero(), |a, &j| a + w(j, i)))
                .collect();
            max_of(&sums)
        };
        let part: Vec<usize> = match remaining.iter().find(|&&j| projected_norm(&[j]) >= *tau) {
            Some(&j) => vec![j],
            None => {
                let mut taken = Vec::new();
                for &j in &remaining {
                    taken.push(j);
                    if projected_norm(&taken) >= *tau {
                        break;
                    }
                }
                taken
            }
        };
        for &i in &open {
            if part.iter().fold(S::zero(), |a, &j| a + w(j, i)) >= *tau {
                satisfied[i] = true;
            }
        }
        remaining.retain(|j| !part.contains(j));
        parts.push(part);
        trace.push((0..s_b).filter(|&i| satisfied[i]).collect());
    }
    if !remaining.is_empty() {
        parts.push(remaining);
        trace.push((0..s_b).filter(|&i| satisfied[i]).collect());
    }
    Ok(DecompositionResult {
        parts,
        satisfied_dimension_trace: trace,
    })
}
