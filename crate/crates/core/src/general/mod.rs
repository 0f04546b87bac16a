//! Approximation for s_B >= 2 follower dimensions, within a factor of about
//! s_B of OPT: weights are rounded with a small budget augmentation, large
//! items are guessed, the follower is restricted to dominant choices per
//! (profit band, residual bucket) cell, and small items are grouped by shape
//! and ratio and handled by an LP over guessed masses.

mod cen_lp;
mod decompose;
mod dominant;
mod lambda;
mod shapes;

use rayon::prelude::*;
use thiserror::Error;

pub use cen_lp::{build_cen_lp, round_solution_general, solve_cen_lp, subgroup_count, SmallSet};
pub use decompose::{decompose_feasible_follower_set, DecomposeError, DecompositionResult};
pub use dominant::{compute_dominant_choices_general, CellGrid, DominantChoiceGeneral};
pub use lambda::{
    enumerate_lambda_guesses, lambda_floor, lambda_grid, lambda_top, reachable_grid, LambdaGuess,
    LambdaStream,
};
pub use shapes::{
    classify_small_items, round_shape, RatioClass, ShapeClassification, SmallEntry, Subgroup,
};

use crate::approx::{
    enumerate_guesses, forced_items, leader_vector, scale_grid, ApproxOutcome, Evaluator,
    GuessRules, GuessStream, RunStats, SUBSET_TABLE_LIMIT,
};
use crate::exact::BoundClaim;
use crate::instance::{
    classify, normalize_with_scale, round_profits, round_weights_general, Classification,
    ClassifyMode, Instance, InstanceError, ScaledInstance,
};
use crate::lp::LpError;
use crate::ptas::solve_and_round;
use crate::scalar::{ceil_to_usize, from_usize, int, pow, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneralError {
    #[error("this algorithm needs at least two follower dimensions, instance has {0}")]
    WrongDimension(usize),
    #[error("epsilon must lie in (0, 1/2]")]
    EpsilonOutOfRange,
    #[error("delta must lie in (0, 1/4]")]
    DeltaOutOfRange,
    #[error("residual budget has a zero coordinate")]
    ZeroResidual,
    #[error("lambda guess does not match the subgroups")]
    DanglingSubgroup,
    #[error("solution is not an extreme point")]
    NotExtremePoint,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Enumeration budgets; `None` means unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralOptions<S> {
    /// Overrides δ = ε^{2s_B+4}.
    pub delta: Option<S>,
    pub max_large_guesses: Option<usize>,
    /// λ guesses per large guess.
    pub max_lambda_guesses: Option<usize>,
    /// Dominant-choice subset size cap; default ⌈2s_B/δ⌉.
    pub size_cap: Option<usize>,
}

impl<S> GeneralOptions<S> {
    pub fn exhaustive() -> Self {
        GeneralOptions {
            delta: None,
            max_large_guesses: None,
            max_lambda_guesses: None,
            size_cap: None,
        }
    }
}

impl<S> Default for GeneralOptions<S> {
    fn default() -> Self {
        GeneralOptions {
            delta: None,
            max_large_guesses: Some(20_000),
            max_lambda_guesses: Some(200),
            size_cap: None,
        }
    }
}

/// δ = ε^{2s_B+4}.
pub fn default_delta<S: Scalar>(eps: &S, s_b: usize) -> S {
    pow(eps, 2 * s_b as u32 + 4)
}

/// The large-guess stream for s_B >= 2: groups share rounded profit and
/// rounded weights beyond the first dimension; first-dimension weight
/// orders a group.
pub fn enumerate_large_guesses_general<S: Scalar>(
    scaled: &ScaledInstance<S>,
    class: &Classification<S>,
    large: &[usize],
    base_cost: &[S],
    eps: &S,
    max_guesses: Option<usize>,
) -> GuessStream<S> {
    let delta = class.delta.clone();
    let s_b = from_usize::<S>(scaled.instance.s_b());
    let two_delta = delta.clone() + delta.clone();
    let two_delta_bar = two_delta.clone() + eps.clone() * (S::one() + two_delta);
    let leave_cap = ceil_to_usize(&(s_b.clone() / delta.clone())) - 1;
    let key_count = ceil_to_usize(&(s_b * (S::one() + two_delta_bar) / delta));
    let key = |j: usize| {
        let mut k = vec![scaled.profit(j).clone()];
        k.extend_from_slice(&scaled.weight(j)[1..]);
        k
    };
    let w = |j: usize| scaled.weight(j)[0].clone();
    let rules = GuessRules {
        leave_cap,
        key_count,
        group_key: &key,
        group_weight: &w,
    };
    enumerate_guesses(scaled, class, large, base_cost, &rules, max_guesses)
}

pub fn solve<S: Scalar>(
    instance: &Instance<S>,
    eps: &S,
    options: &GeneralOptions<S>,
) -> Result<ApproxOutcome<S>, GeneralError> {
    let s_b = instance.s_b();
    if s_b < 2 {
        return Err(GeneralError::WrongDimension(s_b));
    }
    if !eps.is_positive() || *eps > S::one() / int::<S>(2) {
        return Err(GeneralError::EpsilonOutOfRange);
    }
    let delta = match &options.delta {
        Some(d) if !d.is_positive() || *d > S::one() / int::<S>(4) => {
            return Err(GeneralError::DeltaOutOfRange)
        }
        Some(d) => d.clone(),
        None => default_delta(eps, s_b),
    };
    let n = instance.n();
    let default_cap = ceil_to_usize(&(int::<S>(2) * from_usize::<S>(s_b) / delta.clone()));
    let size_cap = options.size_cap.unwrap_or(default_cap);
    let mut stats = RunStats {
        truncated: size_cap < default_cap,
        ..RunStats::default()
    };
    let grid = CellGrid::new(eps, &delta, s_b);
    let row_limit = S::one() / pow(eps, 2 * s_b as u32 + 3);
    let base_grid = lambda_grid(eps, s_b);
    let mut eval = Evaluator::new(instance);
    eval.offer(vec![vec![false; n]]);

    for scale in scale_grid(instance, eps) {
        stats.scales += 1;
        let scaled = normalize_with_scale(instance, &scale)?;
        if scaled.instance.s_b() < 2 {
            stats.truncated = true;
            stats.note("scales with fewer than two positive follower budgets skipped");
            continue;
        }
        let Some((forced, base_cost)) = forced_items(&scaled) else {
            continue;
        };
        let rounded = round_profits(&round_weights_general(&scaled, &delta)?, &delta)?;
        let class = classify(&rounded, &delta, ClassifyMode::InfinityNorm)?;
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
        let stream = enumerate_large_guesses_general(
            &rounded,
            &class,
            &large,
            &base_cost,
            eps,
            options.max_large_guesses,
        );
        stats.truncated |= stream.truncated;
        stats.guesses += stream.guesses.len();

        let profit = |j: usize| rounded.profit(j).clone();
        let weight = |j: usize| rounded.weight(j).to_vec();
        let table = grid.table(&large, size_cap, &profit, &weight);
        let all_large = table.mask_of(&large);
        let small_set = SmallSet {
            ids: small.clone(),
            profits: small.iter().map(|&j| profit(j)).collect(),
            costs: small.iter().map(|&j| rounded.cost(j).to_vec()).collect(),
            forbidden: small.iter().map(|&j| rounded.leader_forbidden[j]).collect(),
        };
        let small_items: Vec<(usize, S, Vec<S>)> =
            small.iter().map(|&j| (j, profit(j), weight(j))).collect();

        let per_guess: Vec<(Vec<Vec<bool>>, RunStats)> = stream
            .guesses
            .par_iter()
            .map(|g| {
                let mut local = RunStats::default();
                let mut cands = vec![leader_vector(n, &[&forced, &g.take])];
                if small.is_empty() {
                    return (cands, local);
                }
                let theta = grid.theta(
                    &table,
                    all_large & !table.mask_of(&g.take),
                    &profit,
                    &weight,
                );
                let classes: Vec<Option<ShapeClassification<S>>> = theta
                    .iter()
                    .map(|c| match classify_small_items(&small_items, &c.d, eps) {
                        Ok(cl) => Some(cl),
                        Err(GeneralError::ZeroResidual) => None,
                        Err(e) => panic!("classification failed: {e}"),
                    })
                    .collect();
                let grids: Vec<Vec<S>> = classes
                    .iter()
                    .flatten()
                    .flat_map(|cl| {
                        cl.subgroups.iter().map(|sg| {
                            let mass = sg.members.iter().fold(S::zero(), |a, &j| {
                                a + cl.entry(j).expect("member").w.clone()
                            });
                            reachable_grid(&base_grid, &mass)
                        })
                    })
                    .collect();
                let lambdas = enumerate_lambda_guesses(&grids, options.max_lambda_guesses);
                local.truncated |= lambdas.truncated;
                for guess in &lambdas.guesses {
                    let lp =
                        build_cen_lp(&small_set, &g.a_prime, &theta, &classes, guess, eps, s_b)
                            .expect("guess matches subgroups");
                    // leader rows plus the per-choice rows
                    if from_usize::<S>(lp.non_box_count()) > row_limit {
                        local.note("row-count precondition s_A + rows <= eps^-(2s_B+3) fails");
                    }
                    if let Some(x) = solve_and_round(&lp, small_set.len(), &mut local) {
                        let picked: Vec<usize> = (0..small_set.len())
                            .filter(|&p| x[p])
                            .map(|p| small_set.ids[p])
                            .collect();
                        cands.push(leader_vector(n, &[&forced, &g.take, &picked]));
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
        BoundClaim::Heuristic(format!("eps = {eps}, delta = {delta}, enumeration capped"))
    } else {
        BoundClaim::Guaranteed(format!(
            "(s_B + O(eps))*OPT with s_B = {s_b}, eps = {eps}, delta = {delta}"
        ))
    };
    Ok(ApproxOutcome {
        result: eval.finish(claim),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{self, ExactOptions};
    use crate::instance::{gen_random, Item, ValueGrid};
    use crate::lp::Relation;
    use crate::scalar::ratio;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    fn choice(profit: Rational, d: Vec<Rational>) -> DominantChoiceGeneral<Rational> {
        DominantChoiceGeneral {
            band: 1,
            buckets: vec![0],
            items: vec![],
            profit,
            consumed: vec![r(0, 1), r(0, 1)],
            d,
        }
    }

    /// Item 0 is medium under the first choice and small-ratio under the
    /// second; item 1 is big-ratio under both.
    fn two_choice_case() -> (
        SmallSet<Rational>,
        Vec<DominantChoiceGeneral<Rational>>,
        Vec<Option<ShapeClassification<Rational>>>,
    ) {
        let items = vec![
            (0, r(1, 10), vec![r(1, 10), r(1, 10)]),
            (1, r(1, 10), vec![r(1, 1000), r(1, 1000)]),
        ];
        let small = SmallSet {
            ids: vec![0, 1],
            profits: vec![r(1, 10), r(1, 10)],
            costs: vec![vec![r(1, 2)], vec![r(1, 1)]],
            forbidden: vec![false, false],
        };
        let theta = vec![
            choice(r(1, 4), vec![r(1, 1), r(1, 1)]),
            choice(r(1, 2), vec![r(1, 2), r(1, 1)]),
        ];
        let eps = r(1, 2);
        let classes = theta
            .iter()
            .map(|c| Some(classify_small_items(&items, &c.d, &eps).unwrap()))
            .collect();
        (small, theta, classes)
    }

    #[test]
    fn row_families_for_two_choices_one_subgroup() {
        let (small, theta, classes) = two_choice_case();
        assert_eq!(subgroup_count(&classes), 1);
        let eps = r(1, 2);
        let interval = LambdaGuess {
            pairs: vec![(r(1, 20), r(1, 20))],
        };
        let lp = build_cen_lp(&small, &[r(0, 1)], &theta, &classes, &interval, &eps, 2).unwrap();
        // leader, obj[0], two interval rows, obj[1]
        assert_eq!(lp.non_box_count(), 5);
        let zero = LambdaGuess {
            pairs: vec![(r(0, 1), r(0, 1))],
        };
        let lp = build_cen_lp(&small, &[r(0, 1)], &theta, &classes, &zero, &eps, 2).unwrap();
        assert_eq!(lp.non_box_count(), 4);
        assert!(lp
            .constraints
            .iter()
            .any(|c| c.label == "mass_zero[0,0]" && c.relation == Relation::Le));
        let top = LambdaGuess {
            pairs: vec![(r(8, 1), r(1, 64))],
        };
        let lp = build_cen_lp(&small, &[r(0, 1)], &theta, &classes, &top, &eps, 2).unwrap();
        assert!(lp
            .constraints
            .iter()
            .any(|c| c.label == "mass_top[0,0]" && c.relation == Relation::Ge));
        let wrong = LambdaGuess { pairs: vec![] };
        assert_eq!(
            build_cen_lp(&small, &[r(0, 1)], &theta, &classes, &wrong, &eps, 2),
            Err(GeneralError::DanglingSubgroup)
        );
    }

    #[test]
    fn empty_sums_reduce_to_profit_rows() {
        let small = SmallSet {
            ids: vec![],
            profits: vec![],
            costs: vec![],
            forbidden: vec![],
        };
        let theta = vec![
            choice(r(1, 4), vec![r(1, 1), r(1, 1)]),
            choice(r(3, 4), vec![r(0, 1), r(1, 1)]),
        ];
        let classes = vec![
            Some(classify_small_items(&[], &theta[0].d, &r(1, 2)).unwrap()),
            None,
        ];
        let lp = build_cen_lp(
            &small,
            &[r(0, 1)],
            &theta,
            &classes,
            &LambdaGuess { pairs: vec![] },
            &r(1, 2),
            2,
        )
        .unwrap();
        assert_eq!(lp.non_box_count(), 3);
        let sol = solve_cen_lp(&lp).unwrap();
        assert_eq!(sol.objective_value, r(3, 4));
    }

    /// The two-variable LP against a grid that contains all its vertices.
    #[test]
    fn two_variable_lp_matches_vertex_enumeration() {
        let (small, theta, classes) = two_choice_case();
        let eps = r(1, 2);
        let guess = LambdaGuess {
            pairs: vec![(r(1, 20), r(1, 20))],
        };
        let lp = build_cen_lp(&small, &[r(0, 1)], &theta, &classes, &guess, &eps, 2).unwrap();
        let sol = solve_cen_lp(&lp).unwrap();
        // x0 in [1/4, 1/2] from the mass rows, x0/2 + x1 <= 1; M = 1/2 + (1 - x1)/10
        assert_eq!(sol.objective_value, r(41, 80));
        let mut best: Option<Rational> = None;
        for a in 0..=80 {
            for b in 0..=80 {
                let mut point = vec![r(a, 80), r(b, 80), r(0, 1)];
                let m = lp
                    .constraints
                    .iter()
                    .filter(|c| c.label.starts_with("obj"))
                    .map(|c| c.lhs(&point) - c.rhs.clone())
                    .max()
                    .unwrap();
                point[2] = m.clone();
                if lp.is_feasible(&point) && best.as_ref().is_none_or(|v| m < *v) {
                    best = Some(m);
                }
            }
        }
        assert_eq!(best.unwrap(), sol.objective_value);
        assert_eq!(round_solution_general(&sol, 2).unwrap(), vec![false, false]);
    }

    #[test]
    fn rounding_keeps_only_ones() {
        let sol = crate::lp::LpSolution {
            assignment: vec![r(1, 1), r(1, 3), r(0, 1), r(5, 1)],
            objective_value: r(5, 1),
            is_extreme_point: true,
            basis: vec![],
        };
        assert_eq!(
            round_solution_general(&sol, 3).unwrap(),
            vec![true, false, false]
        );
        let not = crate::lp::LpSolution {
            is_extreme_point: false,
            ..sol
        };
        assert_eq!(
            round_solution_general(&not, 3),
            Err(GeneralError::NotExtremePoint)
        );
    }

    #[test]
    fn leader_covering_everything_gives_zero() {
        let items = (1..=4)
            .map(|k| Item::new(r(k, 1), vec![r(1, 4)], vec![r(1, 2), r(1, 3)]))
            .collect();
        let inst = Instance::new(vec![r(1, 1)], vec![r(1, 1), r(1, 1)], items).unwrap();
        let out = solve(&inst, &r(1, 2), &GeneralOptions::exhaustive()).unwrap();
        assert_eq!(out.result.objective, r(0, 1));
        assert!(!out.result.bound_claim.truncated());
    }

    #[test]
    fn six_items_within_envelope() {
        for seed in 0..3 {
            let inst: Instance<Rational> = gen_random(6, 1, 2, ValueGrid::default(), seed);
            let out = solve(&inst, &r(1, 2), &GeneralOptions::exhaustive()).unwrap();
            let opt = exact::solve(&inst, ExactOptions::default())
                .unwrap()
                .objective;
            assert!(inst.leader_feasible(&out.result.leader, &r(1, 1)));
            assert!(out.result.objective >= opt);
            assert!(out.result.objective <= r(4, 1) * opt.clone(), "seed {seed}");
            assert_eq!(
                out.result.objective,
                exact::best_response(&inst, &out.result.leader).value
            );
            assert_eq!(out.stats.lp_rank_violations, 0);
        }
    }

    #[test]
    fn larger_delta_exercises_the_lp() {
        let mut solves = 0;
        for seed in 0..4 {
            let inst: Instance<Rational> = gen_random(
                8,
                1,
                2,
                ValueGrid {
                    max_numerator: 20,
                    denominator: 4,
                },
                seed,
            );
            let opts = GeneralOptions {
                delta: Some(r(1, 4)),
                max_lambda_guesses: Some(50),
                ..GeneralOptions::exhaustive()
            };
            let out = solve(&inst, &r(1, 2), &opts).unwrap();
            let opt = exact::solve(&inst, ExactOptions::default())
                .unwrap()
                .objective;
            assert!(out.result.objective >= opt);
            assert_eq!(out.stats.lp_rank_violations, 0);
            solves += out.stats.lp_solves;
        }
        assert!(solves > 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let items = vec![Item::new(r(1, 1), vec![r(1, 1)], vec![r(1, 1)])];
        let one = Instance::<Rational>::new(vec![r(1, 1)], vec![r(1, 1)], items).unwrap();
        assert_eq!(
            solve(&one, &r(1, 2), &GeneralOptions::default()),
            Err(GeneralError::WrongDimension(1))
        );
        let inst: Instance<Rational> = gen_random(3, 1, 2, ValueGrid::default(), 1);
        assert_eq!(
            solve(&inst, &r(3, 4), &GeneralOptions::default()),
            Err(GeneralError::EpsilonOutOfRange)
        );
        let opts = GeneralOptions {
            delta: Some(r(1, 2)),
            ..GeneralOptions::default()
        };
        assert_eq!(
            solve(&inst, &r(1, 2), &opts),
            Err(GeneralError::DeltaOutOfRange)
        );
    }
}
