//! Bicriteria approximation for any number of dimensions: a fractional
//! leader vector is found by constraint generation against the follower
//! oracle, the target is binary-searched, and coordinates at least α are
//! rounded up. The leader budget may be exceeded by a factor 1/α.

use thiserror::Error;

use crate::follower::{knapsack_exact, FollowerOracle};
use crate::instance::Instance;
use crate::lp::{
    feasibility_with_separation, Constraint, FeasibilityOutcome, LinearProgram, LpError, Relation,
    Sense, SeparationOutcome,
};
use crate::scalar::{int, ratio, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BicriteriaError<S> {
    #[error("alpha must lie in (0, 1)")]
    AlphaOutOfRange,
    #[error("search_eps must be positive")]
    SearchEpsOutOfRange,
    #[error("target must be nonnegative")]
    NegativeTarget,
    #[error("cutting-plane round limit reached at target {target}")]
    RoundLimit {
        target: S,
        partial: Option<Box<BicriteriaResult<S>>>,
    },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BicriteriaOptions<S> {
    pub alpha: S,
    /// Relative gap at which the binary search stops.
    pub search_eps: S,
    /// Cutting-plane rounds per target; default 10(n + s_A + 2).
    pub max_rounds: Option<usize>,
    /// Largest n for which the rounded vector is re-evaluated exactly.
    pub exact_limit: usize,
}

impl<S: Scalar> Default for BicriteriaOptions<S> {
    fn default() -> Self {
        BicriteriaOptions {
            alpha: ratio(1, 2),
            search_eps: ratio(1, 1000),
            max_rounds: None,
            exact_limit: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BicriteriaResult<S> {
    pub leader: Vec<bool>,
    /// 1/α: A x̂ <= budget_multiplier * a.
    pub budget_multiplier: S,
    /// Follower value against x̂: exact when `objective_is_exact`, the
    /// oracle's value otherwise.
    pub objective: S,
    pub objective_is_exact: bool,
    /// ρ T_f / (1 - α).
    pub certified_bound: S,
    /// Smallest accepted target T_f.
    pub fractional_target: S,
    pub fractional_point: Vec<S>,
    /// Largest target with an infeasibility certificate, if any.
    pub certified_infeasible: Option<S>,
    pub targets_tried: usize,
    pub cuts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FractionalOutcome<S> {
    /// Every follower set's value under profits p(1 - x) is at most ρ T₀.
    Accepted {
        point: Vec<S>,
        cuts: Vec<Constraint<S>>,
    },
    /// No x in the box satisfies the generated cuts: the fractional optimum
    /// exceeds T₀.
    Certificate { cuts: Vec<Constraint<S>> },
    RoundLimit {
        cuts: Vec<Constraint<S>>,
        last_point: Vec<S>,
    },
}

/// The cut Σ_{j in set} p_j (1 - x_j) <= T₀.
pub fn follower_cut<S: Scalar>(profits: &[S], set: &[usize], t0: &S) -> Constraint<S> {
    let total = set.iter().fold(S::zero(), |a, &j| a + profits[j].clone());
    let coeffs = set
        .iter()
        .filter(|&&j| profits[j].is_positive())
        .map(|&j| (j, -profits[j].clone()))
        .collect();
    let label = format!("follower{set:?}");
    Constraint::new(coeffs, Relation::Le, t0.clone() - total, label)
}

/// The leader row with the largest violation at x (smallest index on ties),
/// if any.
pub fn leader_separation<S: Scalar>(instance: &Instance<S>, x: &[S]) -> Option<Constraint<S>> {
    let mut best: Option<(S, Constraint<S>)> = None;
    for (i, a) in instance.leader_budget().iter().enumerate() {
        let coeffs: Vec<(usize, S)> = (0..instance.n())
            .filter(|&j| instance.item(j).cost[i].is_positive())
            .map(|j| (j, instance.item(j).cost[i].clone()))
            .collect();
        let row = Constraint::new(coeffs, Relation::Le, a.clone(), format!("leader[{i}]"));
        let v = row.violation(x);
        if v.is_positive() && best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, row));
        }
    }
    best.map(|(_, row)| row)
}

/// One separation step: the follower oracle under profits p(1 - x⁰) first,
/// then the leader rows. Also returns the follower set behind a follower cut.
pub fn separation<S: Scalar>(
    instance: &Instance<S>,
    oracle: &dyn FollowerOracle<S>,
    x0: &[S],
    t0: &S,
) -> (SeparationOutcome<S>, Option<Vec<usize>>) {
    let profits = instance.profits();
    let modified: Vec<S> = profits
        .iter()
        .zip(x0)
        .map(|(p, x)| p.clone() * (S::one() - x.clone()))
        .collect();
    let response = oracle.solve(
        &modified,
        &vec![true; instance.n()],
        instance.follower_budget(),
    );
    if response.value > *t0 {
        let set = response.items();
        return (
            SeparationOutcome::Violated(follower_cut(&profits, &set, t0)),
            Some(set),
        );
    }
    match leader_separation(instance, x0) {
        Some(row) => (SeparationOutcome::Violated(row), None),
        None => (SeparationOutcome::Feasible, None),
    }
}

fn default_rounds<S: Scalar>(instance: &Instance<S>) -> usize {
    10 * (instance.n() + instance.s_a() + 2)
}

/// Constraint generation over [0,1]^n at target T₀. `pool` holds follower
/// sets from earlier calls; they are re-instantiated as cuts at T₀ and new
/// sets are appended.
pub fn solve_fractional<S: Scalar>(
    instance: &Instance<S>,
    t0: &S,
    oracle: &dyn FollowerOracle<S>,
    pool: &mut Vec<Vec<usize>>,
    max_rounds: Option<usize>,
) -> Result<FractionalOutcome<S>, BicriteriaError<S>> {
    if t0.is_negative() {
        return Err(BicriteriaError::NegativeTarget);
    }
    let profits = instance.profits();
    let mut base = LinearProgram::new(Sense::Maximize);
    for j in 0..instance.n() {
        base.add_variable(format!("x{j}"), S::zero(), S::one());
    }
    base.set_objective((0..instance.n()).map(|j| (j, profits[j].clone())).collect());
    for set in pool.iter() {
        base.add_constraint(follower_cut(&profits, set, t0));
    }
    let mut found = Vec::new();
    let outcome = feasibility_with_separation(
        &base,
        |x| {
            let (out, set) = separation(instance, oracle, x, t0);
            if let Some(set) = set {
                found.push(set);
            }
            out
        },
        max_rounds.unwrap_or_else(|| default_rounds(instance)),
    )?;
    for set in found {
        if !pool.contains(&set) {
            pool.push(set);
        }
    }
    Ok(match outcome {
        FeasibilityOutcome::Feasible { point, cuts } => FractionalOutcome::Accepted { point, cuts },
        FeasibilityOutcome::Infeasible { cuts } => FractionalOutcome::Certificate { cuts },
        FeasibilityOutcome::RoundLimit { cuts, last_point } => {
            FractionalOutcome::RoundLimit { cuts, last_point }
        }
    })
}

/// x̂_j = 1 iff x_j >= α.
pub fn threshold_round<S: Scalar>(x: &[S], alpha: &S) -> Vec<bool> {
    x.iter().map(|v| v >= alpha).collect()
}

pub fn solve<S: Scalar>(
    instance: &Instance<S>,
    oracle: &dyn FollowerOracle<S>,
    options: &BicriteriaOptions<S>,
) -> Result<BicriteriaResult<S>, BicriteriaError<S>> {
    let alpha = &options.alpha;
    if !alpha.is_positive() || *alpha >= S::one() {
        return Err(BicriteriaError::AlphaOutOfRange);
    }
    if !options.search_eps.is_positive() {
        return Err(BicriteriaError::SearchEpsOutOfRange);
    }
    let n = instance.n();
    let profits = instance.profits();
    let total = instance.total_profit();
    let p_min = profits.iter().min().cloned().unwrap_or_else(S::zero);
    let mut pool = Vec::new();
    let mut tried = 0usize;
    let mut cuts = 0usize;

    let finish = |hi: &S, point: Vec<S>, lo: Option<S>, tried: usize, cuts: usize| {
        let leader = threshold_round(&point, alpha);
        let available: Vec<bool> = leader.iter().map(|&t| !t).collect();
        let (objective, exact) = if n <= options.exact_limit {
            (
                knapsack_exact(
                    &profits,
                    &instance.weights(),
                    &available,
                    instance.follower_budget(),
                )
                .value,
                true,
            )
        } else {
            let masked: Vec<S> = profits
                .iter()
                .zip(&available)
                .map(|(p, &a)| if a { p.clone() } else { S::zero() })
                .collect();
            (
                oracle
                    .solve(&masked, &available, instance.follower_budget())
                    .value,
                false,
            )
        };
        BicriteriaResult {
            leader,
            budget_multiplier: S::one() / alpha.clone(),
            objective,
            objective_is_exact: exact,
            certified_bound: oracle.guarantee() * hi.clone() / (S::one() - alpha.clone()),
            fractional_target: hi.clone(),
            fractional_point: point,
            certified_infeasible: lo,
            targets_tried: tried,
            cuts,
        }
    };

    let attempt = |t: &S, pool: &mut Vec<Vec<usize>>, tried: &mut usize, cuts: &mut usize| {
        *tried += 1;
        let out = solve_fractional(instance, t, oracle, pool, options.max_rounds)?;
        *cuts += match &out {
            FractionalOutcome::Accepted { cuts, .. }
            | FractionalOutcome::Certificate { cuts }
            | FractionalOutcome::RoundLimit { cuts, .. } => cuts.len(),
        };
        Ok::<_, BicriteriaError<S>>(out)
    };

    let zero = S::zero();
    let (mut lo, mut hi, mut point) = match attempt(&zero, &mut pool, &mut tried, &mut cuts)? {
        FractionalOutcome::Accepted { point, .. } => {
            return Ok(finish(&zero, point, None, tried, cuts))
        }
        FractionalOutcome::Certificate { .. } => {
            match attempt(&total, &mut pool, &mut tried, &mut cuts)? {
                FractionalOutcome::Accepted { point, .. } => (zero.clone(), total.clone(), point),
                FractionalOutcome::Certificate { .. } => {
                    unreachable!("every follower set is worth at most the total")
                }
                FractionalOutcome::RoundLimit { .. } => {
                    return Err(BicriteriaError::RoundLimit {
                        target: total,
                        partial: None,
                    });
                }
            }
        }
        FractionalOutcome::RoundLimit { .. } => {
            return Err(BicriteriaError::RoundLimit {
                target: zero,
                partial: None,
            })
        }
    };
    loop {
        let scale = if lo > p_min {
            lo.clone()
        } else {
            p_min.clone()
        };
        if hi.clone() - lo.clone() <= options.search_eps.clone() * scale {
            break;
        }
        let mid = (lo.clone() + hi.clone()) / int::<S>(2);
        match attempt(&mid, &mut pool, &mut tried, &mut cuts)? {
            FractionalOutcome::Accepted { point: p, .. } => {
                hi = mid;
                point = p;
            }
            FractionalOutcome::Certificate { .. } => lo = mid,
            FractionalOutcome::RoundLimit { .. } => {
                let partial = finish(&hi, point, Some(lo), tried, cuts);
                return Err(BicriteriaError::RoundLimit {
                    target: mid,
                    partial: Some(Box::new(partial)),
                });
            }
        }
    }
    Ok(finish(&hi, point, Some(lo), tried, cuts))
}

/// Σ_j p_j (1 - x_j) y_j for a follower set y.
pub fn interdicted_value<S: Scalar>(profits: &[S], x: &[S], set: &[bool]) -> S {
    profits
        .iter()
        .zip(x)
        .zip(set)
        .filter(|(_, &y)| y)
        .fold(S::zero(), |a, ((p, xv), _)| {
            a + p.clone() * (S::one() - xv.clone())
        })
}

/// The guaranteed multiplier ρ/(1-α) as a scalar, for reporting.
pub fn bound_factor<S: Scalar>(rho: &S, alpha: &S) -> S {
    rho.clone() / (S::one() - alpha.clone())
}
