//! Approximation scheme for one follower dimension: large items are guessed,
//! the follower's use of the remaining large items is restricted to a few
//! dominant choices, and small items go through an LP whose extreme point is
//! rounded down.

use rayon::prelude::*;
use thiserror::Error;

use crate::approx::{
    add_costs, enumerate_guesses, forced_items, leader_vector, scale_grid, ApproxOutcome,
    Evaluator, GuessRules, GuessStream, RunStats, SubsetTable, SUBSET_TABLE_LIMIT,
};
use crate::exact::BoundClaim;
use crate::follower::{check_ratio_order, ratio_order_with_dummy, RatioItem};
use crate::instance::{
    classify, normalize_with_scale, round_profits, Classification, ClassifyMode, Instance,
    InstanceError, ScaledInstance,
};
use crate::lp::{
    solve_extreme_point, Constraint, LinearProgram, LpError, LpSolution, Relation, Sense,
};
use crate::scalar::{ceil_to_usize, from_usize, int, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PtasError {
    #[error("this algorithm needs one follower dimension, instance has {0}")]
    WrongDimension(usize),
    #[error("epsilon must lie in (0, 1/2]")]
    EpsilonOutOfRange,
    #[error("small items are not in ratio order with a trailing dummy")]
    UnsortedItems,
    #[error("critical guess does not match the dominant choices or the item order")]
    DanglingCritical,
    #[error("solution is not an extreme point")]
    NotExtremePoint,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Enumeration budgets. `None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PtasOptions {
    pub max_guesses: Option<usize>,
    /// Critical tuples per large guess.
    pub max_criticals: Option<usize>,
    /// Dominant-choice subset size cap; default ⌈2/δ⌉.
    pub size_cap: Option<usize>,
}

impl PtasOptions {
    pub fn exhaustive() -> Self {
        PtasOptions {
            max_guesses: None,
            max_criticals: None,
            size_cap: None,
        }
    }
}

impl Default for PtasOptions {
    fn default() -> Self {
        PtasOptions {
            max_guesses: Some(20_000),
            max_criticals: Some(2_000),
            size_cap: None,
        }
    }
}

/// bound(ε) = ε + ε²(s_A + 2 + 3(1+ε)/ε) + 2ε².
pub fn bound<S: Scalar>(eps: &S, s_a: usize) -> S {
    let d = eps.clone() * eps.clone();
    let three: S = int(3);
    eps.clone()
        + d.clone()
            * (from_usize::<S>(s_a) + int(2) + three * (S::one() + eps.clone()) / eps.clone())
        + int::<S>(2) * d
}

/// One element of Θ: the lightest subset of open large items whose profit
/// lies in band k, i.e. [(k-1)ε, kε). Empty bands carry profit 0 and
/// weight 1 and are marked infeasible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominantChoice<S> {
    pub band: usize,
    pub items: Vec<usize>,
    pub profit: S,
    pub weight: S,
    pub feasible: bool,
}

impl<S: Scalar> DominantChoice<S> {
    fn sentinel(band: usize) -> Self {
        DominantChoice {
            band,
            items: Vec::new(),
            profit: S::zero(),
            weight: S::one(),
            feasible: false,
        }
    }

    pub fn residual(&self) -> S {
        S::one() - self.weight.clone()
    }
}

pub fn band_count<S: Scalar>(eps: &S) -> usize {
    1 + ceil_to_usize(&(S::one() / eps.clone()))
}

/// Band of a profit value, 1-based, if it falls in one.
fn band_of<S: Scalar>(profit: &S, eps: &S, bands: usize) -> Option<usize> {
    let mut k = 1;
    let mut hi = eps.clone();
    while *profit >= hi {
        k += 1;
        hi = hi + eps.clone();
        if k > bands {
            return None;
        }
    }
    Some(k)
}

/// Θ by exhaustive search over subsets of `items` ((id, profit, weight))
/// with at most `size_cap` members and weight at most 1. Ties on weight go
/// to the lexicographically smaller id list.
pub fn compute_dominant_choices<S: Scalar>(
    items: &[(usize, S, S)],
    eps: &S,
    size_cap: usize,
) -> Vec<DominantChoice<S>> {
    assert!(
        items.len() < 31,
        "too many items for exhaustive subset search"
    );
    let bands = band_count(eps);
    let mut best: Vec<Option<DominantChoice<S>>> = vec![None; bands];
    for mask in 0u32..1 << items.len() {
        if mask.count_ones() as usize > size_cap {
            continue;
        }
        let chosen: Vec<&(usize, S, S)> = (0..items.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| &items[b])
            .collect();
        let profit = chosen.iter().fold(S::zero(), |a, t| a + t.1.clone());
        let weight = chosen.iter().fold(S::zero(), |a, t| a + t.2.clone());
        if weight > S::one() {
            continue;
        }
        let Some(k) = band_of(&profit, eps, bands) else {
            continue;
        };
        let mut ids: Vec<usize> = chosen.iter().map(|t| t.0).collect();
        ids.sort_unstable();
        let replace = match &best[k - 1] {
            None => true,
            Some(c) => weight < c.weight || (weight == c.weight && ids < c.items),
        };
        if replace {
            best[k - 1] = Some(DominantChoice {
                band: k,
                items: ids,
                profit,
                weight,
                feasible: true,
            });
        }
    }
    best.into_iter()
        .enumerate()
        .map(|(i, c)| c.unwrap_or_else(|| DominantChoice::sentinel(i + 1)))
        .collect()
}

/// Small items in greedy order plus their leader data, by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallOrder<S> {
    /// Ratio order, dummy last.
    pub order: Vec<RatioItem<S>>,
    /// Leader cost per real position.
    pub costs: Vec<Vec<S>>,
    /// Leader may not take the item at this position.
    pub forbidden: Vec<bool>,
}

impl<S: Scalar> SmallOrder<S> {
    pub fn real(&self) -> usize {
        self.order.len() - 1
    }

    fn from_scaled(scaled: &ScaledInstance<S>, small: &[usize]) -> Self {
        let order = ratio_order_with_dummy(
            small
                .iter()
                .map(|&j| (j, scaled.profit(j).clone(), weight1(scaled, j)))
                .collect(),
        );
        let ids: Vec<usize> = order[..order.len() - 1]
            .iter()
            .map(|r| r.id.expect("real"))
            .collect();
        SmallOrder {
            costs: ids.iter().map(|&j| scaled.cost(j).to_vec()).collect(),
            forbidden: ids.iter().map(|&j| scaled.leader_forbidden[j]).collect(),
            order,
        }
    }
}

fn weight1<S: Scalar>(scaled: &ScaledInstance<S>, j: usize) -> S {
    scaled.weight(j).first().cloned().unwrap_or_else(S::zero)
}

/// Critical-item tuples, one position per dominant choice. Choices with the
/// same residual share a position, positions are non-decreasing in the
/// residual, a zero residual takes the first positive-weight position, and
/// a position is only used if the weight through it can reach the residual.
pub fn enumerate_critical_tuples<S: Scalar>(
    order: &[RatioItem<S>],
    residuals: &[S],
    max: Option<usize>,
) -> (Vec<Vec<usize>>, bool) {
    let mut levels: Vec<S> = residuals.to_vec();
    levels.sort();
    levels.dedup();
    let mut prefix = Vec::with_capacity(order.len());
    let mut acc = S::zero();
    for it in order {
        acc = acc + it.weight.clone();
        prefix.push(acc.clone());
    }
    let first_pos = order
        .iter()
        .position(|it| it.weight.is_positive())
        .expect("dummy has weight");
    let options: Vec<Vec<usize>> = levels
        .iter()
        .map(|r| {
            if r.is_zero() {
                vec![first_pos]
            } else {
                (0..order.len())
                    .filter(|&c| order[c].weight.is_positive() && prefix[c] >= *r)
                    .collect()
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut truncated = false;
    let mut cur = Vec::with_capacity(levels.len());
    fn rec(
        options: &[Vec<usize>],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        max: Option<usize>,
        truncated: &mut bool,
    ) -> bool {
        if cur.len() == options.len() {
            if max.is_some_and(|m| out.len() >= m) {
                *truncated = true;
                return false;
            }
            out.push(cur.clone());
            return true;
        }
        let floor = cur.last().copied().unwrap_or(0);
        for &c in &options[cur.len()] {
            if c < floor {
                continue;
            }
            cur.push(c);
            let go = rec(options, cur, out, max, truncated);
            cur.pop();
            if !go {
                return false;
            }
        }
        true
    }
    rec(&options, &mut cur, &mut out, max, &mut truncated);
    let tuples = out
        .into_iter()
        .map(|lv| {
            residuals
                .iter()
                .map(|r| lv[levels.binary_search(r).expect("level")])
                .collect()
        })
        .collect();
    (tuples, truncated)
}

/// The small-item LP for a fixed large guess and critical tuple. Variables
/// are x per real small position (in order) and then M; the objective is
/// min M. Rows: one leader row per dimension, then per choice an objective
/// row, the prefix-weight row and the critical-weight row.
pub fn build_lp<S: Scalar>(
    small: &SmallOrder<S>,
    a_prime: &[S],
    theta: &[DominantChoice<S>],
    criticals: &[usize],
    m_upper: &S,
) -> Result<LinearProgram<S>, PtasError> {
    check_ratio_order(&small.order).map_err(|_| PtasError::UnsortedItems)?;
    if criticals.len() != theta.len() || criticals.iter().any(|&c| c >= small.order.len()) {
        return Err(PtasError::DanglingCritical);
    }
    if criticals.iter().any(|&c| small.order[c].weight.is_zero()) {
        return Err(PtasError::DanglingCritical);
    }
    let m = small.real();
    let mut lp = LinearProgram::new(Sense::Minimize);
    for pos in 0..m {
        let name = format!("x{}", small.order[pos].id.expect("real"));
        let v = lp.add_variable(name, S::zero(), S::one());
        if small.forbidden[pos] {
            lp.fix(v, S::zero());
        }
    }
    let big_m = lp.add_variable("M", S::zero(), m_upper.clone());
    lp.set_objective(vec![(big_m, S::one())]);

    for (i, spent) in a_prime.iter().enumerate() {
        let coeffs = (0..m)
            .filter(|&p| small.costs[p][i].is_positive())
            .map(|p| (p, small.costs[p][i].clone()))
            .collect();
        lp.add_constraint(Constraint::new(
            coeffs,
            Relation::Le,
            S::one() - spent.clone(),
            format!("leader[{i}]"),
        ));
    }
    for (l, (choice, &c)) in theta.iter().zip(criticals).enumerate() {
        let r = choice.residual();
        let pc = &small.order[c].profit;
        let bc = &small.order[c].weight;
        let mut obj = Vec::new();
        let mut k = choice.profit.clone() + pc.clone() * r.clone() / bc.clone();
        let mut weights = Vec::new();
        let mut prefix_weight = S::zero();
        for pos in 0..c {
            let it = &small.order[pos];
            let coef = pc.clone() * it.weight.clone() / bc.clone() - it.profit.clone();
            k = k - coef.clone();
            if !coef.is_zero() {
                obj.push((pos, coef));
            }
            if it.weight.is_positive() {
                weights.push((pos, -it.weight.clone()));
            }
            prefix_weight = prefix_weight + it.weight.clone();
        }
        obj.push((big_m, -S::one()));
        lp.add_constraint(Constraint::new(obj, Relation::Le, -k, format!("obj[{l}]")));
        lp.add_constraint(Constraint::new(
            weights.clone(),
            Relation::Le,
            r.clone() - prefix_weight.clone(),
            format!("prefix[{l}]"),
        ));
        lp.add_constraint(Constraint::new(
            weights,
            Relation::Ge,
            r - bc.clone() - prefix_weight,
            format!("critical[{l}]"),
        ));
    }
    Ok(lp)
}

/// Keep exact ones, drop everything else.
pub fn round_solution<S: Scalar>(sol: &LpSolution<S>, vars: usize) -> Result<Vec<bool>, PtasError> {
    if !sol.is_extreme_point {
        return Err(PtasError::NotExtremePoint);
    }
    Ok(sol.assignment[..vars].iter().map(|v| v.is_one()).collect())
}

/// The large-guess stream for one follower dimension.
pub fn enumerate_large_guesses<S: Scalar>(
    scaled: &ScaledInstance<S>,
    class: &Classification<S>,
    large: &[usize],
    base_cost: &[S],
    max_guesses: Option<usize>,
) -> GuessStream<S> {
    let per = ceil_to_usize(&(S::one() / class.delta.clone()));
    let key = |j: usize| vec![scaled.profit(j).clone()];
    let w = |j: usize| weight1(scaled, j);
    let rules = GuessRules {
        leave_cap: per - 1,
        key_count: per,
        group_key: &key,
        group_weight: &w,
    };
    enumerate_guesses(scaled, class, large, base_cost, &rules, max_guesses)
}

fn check_eps<S: Scalar>(eps: &S) -> Result<(), PtasError> {
    if eps.is_positive() && *eps <= S::one() / int::<S>(2) {
        Ok(())
    } else {
        Err(PtasError::EpsilonOutOfRange)
    }
}

pub fn solve<S: Scalar>(
    instance: &Instance<S>,
    eps: &S,
    options: &PtasOptions,
) -> Result<ApproxOutcome<S>, PtasError> {
    if instance.s_b() != 1 {
        return Err(PtasError::WrongDimension(instance.s_b()));
    }
    check_eps(eps)?;
    let n = instance.n();
    let delta = eps.clone() * eps.clone();
    let default_cap = ceil_to_usize(&(int::<S>(2) / delta.clone()));
    let size_cap = options.size_cap.unwrap_or(default_cap);
    let mut stats = RunStats {
        truncated: size_cap < default_cap,
        ..RunStats::default()
    };
    let mut eval = Evaluator::new(instance);
    eval.offer(vec![vec![false; n]]);

    for scale in scale_grid(instance, eps) {
        stats.scales += 1;
        let scaled = normalize_with_scale(instance, &scale)?;
        let Some((forced, base_cost)) = forced_items(&scaled) else {
            continue;
        };
        let rounded = round_profits(&scaled, &delta)?;
        let class = classify(&rounded, &delta, ClassifyMode::Scalar)?;
        let universe: Vec<usize> = (0..n)
            .filter(|&j| !rounded.follower_infeasible[j] && !forced.contains(&j))
            .collect();
        let large: Vec<usize> = universe
            .iter()
            .copied()
            .filter(|&j| class.is_large(j))
            .collect();
        let small: Vec<usize> = universe
            .iter()
            .copied()
            .filter(|&j| !class.is_large(j))
            .collect();
        if large.len() > SUBSET_TABLE_LIMIT {
            stats.truncated = true;
            stats.note(format!(
                "scales with more than {SUBSET_TABLE_LIMIT} large items skipped"
            ));
            continue;
        }
        let stream =
            enumerate_large_guesses(&rounded, &class, &large, &base_cost, options.max_guesses);
        stats.truncated |= stream.truncated;
        stats.guesses += stream.guesses.len();

        let bands = band_count(eps);
        let table = SubsetTable::build(
            &large,
            size_cap,
            |j| weight1(&rounded, j),
            |ids| {
                let w = ids.iter().fold(S::zero(), |a, &j| a + weight1(&rounded, j));
                if w > S::one() {
                    return None;
                }
                let p = ids
                    .iter()
                    .fold(S::zero(), |a, &j| a + rounded.profit(j).clone());
                band_of(&p, eps, bands).map(|k| k as u32)
            },
        );
        let order = SmallOrder::from_scaled(&rounded, &small);
        let m_upper = universe
            .iter()
            .fold(S::one(), |a, &j| a + rounded.profit(j).clone());
        let all_large = table.mask_of(&large);

        let per_guess: Vec<(Vec<Vec<bool>>, RunStats)> = stream
            .guesses
            .par_iter()
            .map(|g| {
                let mut local = RunStats::default();
                let open = all_large & !table.mask_of(&g.take);
                let cells = table.best_per_cell(open);
                let theta: Vec<DominantChoice<S>> = (1..=bands)
                    .map(|k| match cells.get(&(k as u32)) {
                        Some(&mask) => {
                            let items = table.ids_of(mask);
                            DominantChoice {
                                band: k,
                                profit: items
                                    .iter()
                                    .fold(S::zero(), |a, &j| a + rounded.profit(j).clone()),
                                weight: items
                                    .iter()
                                    .fold(S::zero(), |a, &j| a + weight1(&rounded, j)),
                                items,
                                feasible: true,
                            }
                        }
                        None => DominantChoice::sentinel(k),
                    })
                    .collect();
                let mut cands = vec![leader_vector(n, &[&forced, &g.take])];
                let residuals: Vec<S> = theta.iter().map(|c| c.residual()).collect();
                let (tuples, cut) =
                    enumerate_critical_tuples(&order.order, &residuals, options.max_criticals);
                local.truncated |= cut;
                if order.real() > 0 {
                    for t in tuples {
                        let lp = build_lp(&order, &g.a_prime, &theta, &t, &m_upper)
                            .expect("consistent LP input");
                        if let Some(x) = solve_and_round(&lp, order.real(), &mut local) {
                            let picked: Vec<usize> = (0..order.real())
                                .filter(|&p| x[p])
                                .map(|p| order.order[p].id.expect("real"))
                                .collect();
                            cands.push(leader_vector(n, &[&forced, &g.take, &picked]));
                        }
                    }
                }
                (cands, local)
            })
            .collect();
        for (cands, local) in per_guess {
            stats.absorb(local);
            eval.offer(cands);
        }
    }
    stats.candidates = eval.evaluated();
    let claim = if stats.truncated {
        BoundClaim::Heuristic(format!("eps = {eps}, enumeration capped"))
    } else {
        BoundClaim::Guaranteed(format!(
            "(1 + {})*OPT at eps = {eps}",
            bound(eps, instance.s_a())
        ))
    };
    Ok(ApproxOutcome {
        result: eval.finish(claim),
        stats,
    })
}

/// Solve an LP built over `vars` leader variables, record the fractional
/// count check, and round. None when the LP is infeasible.
pub(crate) fn solve_and_round<S: Scalar>(
    lp: &LinearProgram<S>,
    vars: usize,
    stats: &mut RunStats,
) -> Option<Vec<bool>> {
    let sol = match solve_extreme_point(lp) {
        Ok(sol) => sol,
        Err(LpError::Infeasible) => return None,
        Err(e) => panic!("box-bounded LP failed: {e}"),
    };
    stats.lp_solves += 1;
    let idx: Vec<usize> = (0..vars).collect();
    let frac = sol.fractional_count(lp, &idx);
    stats.max_fractional = stats.max_fractional.max(frac);
    if frac > lp.non_box_count() {
        stats.lp_rank_violations += 1;
    }
    Some(round_solution(&sol, vars).expect("simplex returns vertices"))
}

/// Leader cost of the forced items plus a guess; exposed for tests.
pub fn guess_cost<S: Scalar>(
    scaled: &ScaledInstance<S>,
    forced: &[usize],
    take: &[usize],
) -> Vec<S> {
    let base = add_costs(scaled, &vec![S::zero(); scaled.instance.s_a()], forced);
    add_costs(scaled, &base, take)
}
