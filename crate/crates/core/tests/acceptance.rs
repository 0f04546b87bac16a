//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Runs without the libtest harness so the lines always show.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use interdict_core::approx::RunStats;
use interdict_core::bench::{self, Algo, AlgoConfig, RunRecord, SuiteParams};
use interdict_core::bicriteria::{self, BicriteriaOptions};
use interdict_core::exact::{self, ExactOptions};
use interdict_core::follower::make_exact_oracle;
use interdict_core::general::{self, decompose_feasible_follower_set, GeneralOptions};
use interdict_core::instance::{gen_3hs_reduction, gen_random, ValueGrid};
use interdict_core::ptas::{self, PtasOptions};
use interdict_core::scalar::{int, max_of, ratio};
use interdict_core::{Instance, Item, Rational};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn r(n: i64, d: i64) -> Rational {
    ratio(n, d)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(elapsed.as_secs() < limit_secs, || {
        format!("took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

/// Lowest-common-denominator integer view of an instance's profits, so the
/// brute force can compare machine integers.
fn integer_profits(inst: &Instance) -> Vec<i64> {
    let lcm = inst
        .items()
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, it| {
            let d = it.profit.denom().clone();
            num_integer::Integer::lcm(&acc, &d)
        });
    let lcm = Rational::from_integer(lcm);
    inst.items()
        .iter()
        .map(|it| {
            (it.profit.clone() * lcm.clone())
                .to_integer()
                .to_i64()
                .unwrap()
        })
        .collect()
}

/// Best follower value for every leader mask, by enumerating both levels.
fn double_enumeration(inst: &Instance) -> Option<Rational> {
    let n = inst.n();
    let full = 1u32 << n;
    let profit = integer_profits(inst);
    let scale = inst.item(0).profit.clone() / int::<Rational>(profit[0]);
    let sum = |mask: u32, f: &dyn Fn(usize) -> Rational| {
        (0..n)
            .filter(|j| mask >> j & 1 == 1)
            .fold(Rational::zero(), |a, j| a + f(j))
    };
    let follower: Vec<(u32, i64)> = (0..full)
        .filter(|&m| {
            (0..inst.s_b())
                .all(|i| sum(m, &|j| inst.item(j).weight[i].clone()) <= inst.follower_budget()[i])
        })
        .map(|m| {
            (
                m,
                (0..n).filter(|j| m >> j & 1 == 1).map(|j| profit[j]).sum(),
            )
        })
        .collect();
    (0..full)
        .filter(|&m| {
            (0..inst.s_a())
                .all(|i| sum(m, &|j| inst.item(j).cost[i].clone()) <= inst.leader_budget()[i])
        })
        .map(|leader| {
            follower
                .iter()
                .filter(|(f, _)| f & leader == 0)
                .map(|&(_, v)| v)
                .max()
                .unwrap_or(0)
        })
        .min()
        .map(|v| int::<Rational>(v) * scale)
}

fn exact_opt(inst: &Instance) -> Rational {
    exact::solve(inst, ExactOptions::default())
        .expect("small instance")
        .objective
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let failures: Vec<String> = (0..500u64)
        .into_par_iter()
        .filter_map(|i| {
            let n = 1 + (i % 12) as usize;
            let (s_a, s_b) = (1 + (i % 3) as usize, 1 + (i / 3 % 3) as usize);
            let inst: Instance = gen_random(n, s_a, s_b, ValueGrid::default(), 1000 + i);
            let res = exact::solve(&inst, ExactOptions::default()).ok()?;
            let brute = double_enumeration(&inst).expect("empty leader set is feasible");
            let leader_ok = inst.leader_feasible(&res.leader, &Rational::one())
                && exact::best_response(&inst, &res.leader).value == res.objective;
            (res.objective != brute || !leader_ok)
                .then(|| format!("instance {i}: {} vs {brute}", res.objective))
        })
        .collect();
    check(failures.is_empty(), || failures.join("; "))?;
    within(start.elapsed(), 120)?;
    Ok(format!(
        "500 instances agree exactly ({:.1}s)",
        start.elapsed().as_secs_f64()
    ))
}

/// Criterion 2 runs, also used by 7 and 8.
fn ptas_runs(count: u64) -> Vec<(u64, Instance, Result<interdict_core::ApproxOutcome, String>)> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let n = 4 + (i % 9) as usize;
            let s_a = 1 + (i % 2) as usize;
            let inst: Instance = gen_random(n, s_a, 1, ValueGrid::default(), 2000 + i);
            let out =
                ptas::solve(&inst, &r(1, 4), &PtasOptions::exhaustive()).map_err(|e| e.to_string());
            (i, inst, out)
        })
        .collect()
}

fn criterion_2(stats: &mut Vec<RunStats>) -> Outcome {
    let start = Instant::now();
    let eps = r(1, 4);
    let mut failures = Vec::new();
    let mut worst = 0f64;
    for (i, inst, out) in ptas_runs(100) {
        let out = match out {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let opt = exact_opt(&inst);
        let limit = (Rational::one() + ptas::bound(&eps, inst.s_a())) * opt.clone();
        let res = &out.result;
        if !inst.leader_feasible(&res.leader, &Rational::one())
            || res.objective > limit
            || res.bound_claim.truncated()
        {
            failures.push(format!(
                "instance {i}: objective {} OPT {opt}",
                res.objective
            ));
        }
        if !opt.is_zero() {
            worst = worst.max((res.objective.clone() / opt).to_f64().unwrap());
        }
        stats.push(out.stats);
    }
    check(failures.is_empty(), || failures.join("; "))?;
    within(start.elapsed(), 600)?;
    Ok(format!(
        "100 instances, worst ratio {worst:.4} ({:.1}s)",
        start.elapsed().as_secs_f64()
    ))
}

/// Random weights on a (1, 1+τ, ..)-feasible set whose items each fit alone.
fn tau_feasible_set(rng: &mut ChaCha8Rng, s_b: usize, tau: &Rational) -> Instance {
    let n = rng.gen_range(1..=10);
    let items: Vec<Item> = (0..n)
        .map(|_| {
            Item::new(
                Rational::one(),
                vec![Rational::one()],
                (0..s_b).map(|_| r(rng.gen_range(0..=12), 4)).collect(),
            )
        })
        .collect();
    let budget = (0..s_b)
        .map(|i| {
            let total = items
                .iter()
                .fold(Rational::zero(), |a, it| a + it.weight[i].clone());
            let largest = max_of(
                &items
                    .iter()
                    .map(|it| it.weight[i].clone())
                    .collect::<Vec<_>>(),
            );
            let share = if i == 0 {
                total
            } else {
                total / (Rational::one() + tau.clone())
            };
            share.max(largest).max(r(1, 4))
        })
        .collect();
    Instance::new(vec![int(n as i64)], budget, items).expect("valid")
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    for k in 0..500 {
        let s_b = 1 + k % 4;
        let tau = if k % 2 == 0 { r(1, 4) } else { r(1, 2) };
        let inst = tau_feasible_set(&mut rng, s_b, &tau);
        let all: Vec<usize> = (0..inst.n()).collect();
        let out = match decompose_feasible_follower_set(&all, &inst, &tau) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("set {k}: {e}"));
                continue;
            }
        };
        let mut seen = out.parts.concat();
        seen.sort_unstable();
        let feasible = out.parts.iter().all(|part| {
            (0..s_b).all(|i| {
                part.iter()
                    .fold(Rational::zero(), |a, &j| a + inst.item(j).weight[i].clone())
                    <= inst.follower_budget()[i]
            })
        });
        if out.parts.len() > s_b || seen != all || !feasible {
            failures.push(format!("set {k}: parts {:?}", out.parts));
        }
    }
    let dual: Vec<String> = (0..100u64)
        .into_par_iter()
        .filter_map(|i| {
            let n = 2 + (i % 9) as usize;
            let s_b = 1 + (i % 4) as usize;
            let tau = if i % 2 == 0 { r(1, 4) } else { r(1, 2) };
            let inst: Instance = gen_random(n, 1, s_b, ValueGrid::default(), 3000 + i);
            let augmented: Vec<Rational> = inst
                .follower_budget()
                .iter()
                .enumerate()
                .map(|(d, b)| {
                    if d == 0 {
                        b.clone()
                    } else {
                        b.clone() * (Rational::one() + tau.clone())
                    }
                })
                .collect();
            let opt = exact_opt(&inst);
            let opt_tau = exact_opt(&inst.with_follower_budget(augmented).expect("valid"));
            (opt_tau > int::<Rational>(s_b as i64) * opt.clone())
                .then(|| format!("instance {i}: {opt_tau} > {s_b} * {opt}"))
        })
        .collect();
    failures.extend(dual);
    check(failures.is_empty(), || failures.join("; "))?;
    Ok(format!(
        "500 sets decomposed, OPT_tau <= s_B*OPT on 100 instances ({:.1}s)",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let catalog = bench::hs3_catalog();
    let failures: Vec<String> = catalog
        .par_iter()
        .enumerate()
        .filter_map(|(k, hs)| {
            let opt = exact_opt(&gen_3hs_reduction(hs).expect("valid"));
            let ok = if hs.has_hitting_set() {
                opt <= int(3)
            } else {
                opt == int(4)
            };
            (!ok).then(|| format!("3HS {k}: OPT {opt}, hitting set {}", hs.has_hitting_set()))
        })
        .collect();
    check(failures.is_empty(), || failures.join("; "))?;
    within(start.elapsed(), 60)?;
    let yes = catalog.iter().filter(|h| h.has_hitting_set()).count();
    Ok(format!(
        "{} instances ({yes} yes, {} no) ({:.1}s)",
        catalog.len(),
        catalog.len() - yes,
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let options = BicriteriaOptions::<Rational>::default();
    let slack = Rational::one() + options.search_eps.clone();
    let failures: Vec<String> = (0..200u64)
        .into_par_iter()
        .filter_map(|i| {
            let n = 1 + (i % 12) as usize;
            let (s_a, s_b) = (1 + (i % 4) as usize, 1 + (i / 4 % 4) as usize);
            let inst: Instance = gen_random(n, s_a, s_b, ValueGrid::default(), 5000 + i);
            let res = match bicriteria::solve(&inst, &make_exact_oracle(&inst), &options) {
                Ok(res) => res,
                Err(e) => return Some(format!("instance {i}: {e}")),
            };
            let t_star = exact_opt(&inst);
            let objective = exact::best_response(&inst, &res.leader).value;
            let ok = inst.leader_feasible(&res.leader, &int(2))
                && objective <= int::<Rational>(2) * t_star.clone() * slack.clone()
                && objective == res.objective;
            (!ok).then(|| format!("instance {i}: objective {objective}, T* {t_star}"))
        })
        .collect();
    check(failures.is_empty(), || failures.join("; "))?;
    within(start.elapsed(), 300)?;
    Ok(format!(
        "200 instances within 2*T*(1+search_eps) and 2a ({:.1}s)",
        start.elapsed().as_secs_f64()
    ))
}

/// Criterion 6 instance i.
fn general_instance(i: u64) -> Instance {
    let n = 3 + (i % 6) as usize;
    let s_a = 1 + (i / 6 % 2) as usize;
    gen_random(n, s_a, 2, ValueGrid::default(), 6000 + i)
}

fn general_run(i: u64) -> Result<interdict_core::ApproxOutcome, String> {
    general::solve(
        &general_instance(i),
        &r(1, 2),
        &GeneralOptions::exhaustive(),
    )
    .map_err(|e| e.to_string())
}

fn criterion_6(stats: &mut Vec<RunStats>) -> Outcome {
    let start = Instant::now();
    let runs: Vec<(u64, Result<_, String>)> = (0..30u64)
        .into_par_iter()
        .map(|i| (i, general_run(i)))
        .collect();
    let mut failures = Vec::new();
    let mut worst = 0f64;
    for (i, out) in runs {
        let inst = general_instance(i);
        let out = match out {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let opt = exact_opt(&inst);
        let res = &out.result;
        let verified = exact::verify(&inst, res).ok() && res.budget_multiplier.is_one();
        if !verified
            || res.objective > int::<Rational>(4) * opt.clone()
            || res.bound_claim.truncated()
        {
            failures.push(format!(
                "instance {i}: objective {} OPT {opt}",
                res.objective
            ));
        }
        if !opt.is_zero() {
            worst = worst.max((res.objective.clone() / opt).to_f64().unwrap());
        }
        stats.push(out.stats);
    }
    check(failures.is_empty(), || failures.join("; "))?;
    Ok(format!(
        "30 instances, worst ratio {worst:.4} ({:.1}s)",
        start.elapsed().as_secs_f64()
    ))
}

/// The default δ leaves no small items on instances this size, so the
/// general LP is also exercised at δ = 1/4.
fn general_lp_supplement() -> Vec<RunStats> {
    (0..6u64)
        .into_par_iter()
        .map(|seed| {
            let inst: Instance = gen_random(
                8,
                1,
                2,
                ValueGrid {
                    max_numerator: 20,
                    denominator: 4,
                },
                7000 + seed,
            );
            let opts = GeneralOptions {
                delta: Some(r(1, 4)),
                max_lambda_guesses: Some(50),
                ..GeneralOptions::exhaustive()
            };
            general::solve(&inst, &r(1, 2), &opts)
                .expect("solves")
                .stats
        })
        .collect()
}

fn criterion_7(ptas: &[RunStats], general: &[RunStats]) -> Outcome {
    let supplement = general_lp_supplement();
    let count = |s: &[RunStats]| {
        (
            s.iter().map(|x| x.lp_solves).sum::<usize>(),
            s.iter().map(|x| x.lp_rank_violations).sum::<usize>(),
        )
    };
    let (p_solves, p_bad) = count(ptas);
    let (g_solves, g_bad) = count(general);
    let (s_solves, s_bad) = count(&supplement);
    check(p_bad + g_bad + s_bad == 0, || {
        format!("rank violations: ptas {p_bad}, general {g_bad}, supplement {s_bad}")
    })?;
    check(p_solves > 0 && s_solves > 0, || "no LP was solved".into())?;
    let max_frac = ptas
        .iter()
        .chain(general)
        .chain(&supplement)
        .map(|s| s.max_fractional)
        .max()
        .unwrap_or(0);
    Ok(format!(
        "0 violations over {p_solves} ptas, {g_solves} general and {s_solves} general (delta 1/4) LPs; max fractional {max_frac}"
    ))
}

fn strip_time(records: &[RunRecord]) -> Vec<RunRecord> {
    records
        .iter()
        .cloned()
        .map(|r| RunRecord { millis: 0, ..r })
        .collect()
}

fn csv_without_time(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    bench::write_csv(&strip_time(records), &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf8")
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut ptas = AlgoConfig::new(Algo::Ptas);
    ptas.exhaustive = true;
    let suites: [(&str, SuiteParams); 4] = [
        (
            "random-small",
            SuiteParams {
                n: 8,
                ..SuiteParams::new(ptas)
            },
        ),
        (
            "random-small",
            SuiteParams {
                n: 6,
                per_seed: 2,
                ..SuiteParams::new(AlgoConfig::new(Algo::Exact))
            },
        ),
        ("hs3-gap", SuiteParams::new(AlgoConfig::new(Algo::Exact))),
        (
            "bicriteria-sweep",
            SuiteParams {
                n: 7,
                ..SuiteParams::new(AlgoConfig::new(Algo::Bicriteria))
            },
        ),
    ];
    let seeds: Vec<u64> = (0..16).rev().collect();
    for (name, params) in &suites {
        let a = bench::bench_suite(name, params, &seeds).map_err(|e| e.to_string())?;
        let b = bench::bench_suite(name, params, &seeds).map_err(|e| e.to_string())?;
        check(csv_without_time(&a) == csv_without_time(&b), || {
            format!("{name}: CSV differs between runs")
        })?;
        check(strip_time(&a) == strip_time(&b), || {
            format!("{name}: records differ between runs")
        })?;
        check(
            a.iter().all(|r| {
                r.ratio.as_deref().is_none_or(|x| {
                    x == "inf" || x.parse::<f64>().unwrap() >= 1.0 || r.algo == "bicriteria"
                })
            }),
            || format!("{name}: ratio below 1"),
        )?;
    }
    for i in [0u64, 7, 13] {
        check(general_run(i) == general_run(i), || {
            format!("general instance {i} differs between runs")
        })?;
    }
    let again: Vec<_> = ptas_runs(12).into_iter().map(|t| t.2).collect();
    check(
        again == ptas_runs(12).into_iter().map(|t| t.2).collect::<Vec<_>>(),
        || "ptas runs differ".into(),
    )?;
    Ok(format!(
        "4 suites, general and ptas reruns identical ({:.1}s)",
        start.elapsed().as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let mut ptas_stats = Vec::new();
    let mut general_stats = Vec::new();
    let mut all_ok = true;
    let mut report = |k: usize, name: &str, outcome: Outcome| match outcome {
        Ok(msg) => println!("PASS {k} {name}: {msg}"),
        Err(msg) => {
            all_ok = false;
            println!("FAIL {k} {name}: {msg}");
        }
    };
    report(1, "exact oracle agreement", criterion_1());
    report(2, "ptas bound", criterion_2(&mut ptas_stats));
    report(3, "augment decomposition", criterion_3());
    report(4, "hardness gap", criterion_4());
    report(5, "bicriteria guarantee", criterion_5());
    report(
        6,
        "general algorithm envelope",
        criterion_6(&mut general_stats),
    );
    report(7, "lp rank bound", criterion_7(&ptas_stats, &general_stats));
    report(8, "determinism", criterion_8());
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
