//! Benchmark suites and run records. Instances are generated per seed, run
//! in parallel, paired with the exact solver when small enough, and sorted
//! by (seed, index) before they are written out.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::approx::RunStats;
use crate::bicriteria::{self, BicriteriaError, BicriteriaOptions, BicriteriaResult};
use crate::exact::{
    self, BilevelResult, BoundClaim, ExactError, ExactOptions, DEFAULT_EXHAUSTIVE_LIMIT,
};
use crate::follower::{make_oracle, OracleStrategy};
use crate::general::{self, GeneralError, GeneralOptions};
use crate::instance::{gen_3hs_reduction, gen_random, HittingSetInstance, ValueGrid};
use crate::ptas::{self, PtasError, PtasOptions};
use crate::scalar::ratio;
use crate::{Instance, Rational};

/// Bumped whenever the CSV columns change.
pub const CSV_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 13] = [
    "suite",
    "seed",
    "n",
    "s_a",
    "s_b",
    "algo",
    "params",
    "objective",
    "opt",
    "ratio",
    "bound_claim",
    "truncated",
    "millis",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Exact,
    Ptas,
    General,
    Bicriteria,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Exact => "exact",
            Algo::Ptas => "ptas",
            Algo::General => "general",
            Algo::Bicriteria => "bicriteria",
        }
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Algo::Exact),
            "ptas" => Ok(Algo::Ptas),
            "general" => Ok(Algo::General),
            "bicriteria" => Ok(Algo::Bicriteria),
            _ => Err(format!("unknown algorithm {s:?}")),
        }
    }
}

/// Everything needed to run one algorithm on one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgoConfig {
    pub algo: Algo,
    pub eps: Rational,
    /// General algorithm only; default ε^{2s_B+4}.
    pub delta: Option<Rational>,
    /// Lift every enumeration cap.
    pub exhaustive: bool,
    /// Large-item guesses (both schemes).
    pub max_guesses: Option<usize>,
    /// Critical tuples (ptas) or λ guesses (general) per large guess.
    pub max_inner: Option<usize>,
    pub alpha: Rational,
    pub search_eps: Rational,
    pub oracle: OracleStrategy,
    pub exhaustive_limit: usize,
}

impl AlgoConfig {
    pub fn new(algo: Algo) -> Self {
        AlgoConfig {
            algo,
            eps: ratio(1, 4),
            delta: None,
            exhaustive: false,
            max_guesses: Some(20_000),
            max_inner: None,
            alpha: ratio(1, 2),
            search_eps: ratio(1, 1000),
            oracle: OracleStrategy::Exact,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
        }
    }

    /// The parameters that matter for `algo`, as `key=value` pairs joined by ';'.
    pub fn params(&self) -> String {
        let cap = |c: Option<usize>| c.map_or("none".to_string(), |v| v.to_string());
        match self.algo {
            Algo::Exact => String::new(),
            Algo::Ptas | Algo::General => {
                let mut p = format!("eps={}", self.eps);
                if self.algo == Algo::General {
                    if let Some(d) = &self.delta {
                        p += &format!(";delta={d}");
                    }
                }
                if self.exhaustive {
                    p += ";exhaustive";
                } else {
                    p += &format!(
                        ";max_guesses={};max_inner={}",
                        cap(self.max_guesses),
                        cap(self.max_inner)
                    );
                }
                p
            }
            Algo::Bicriteria => {
                let oracle = match self.oracle {
                    OracleStrategy::Exact => "exact",
                    OracleStrategy::Greedy => "greedy",
                };
                format!(
                    "alpha={};search_eps={};oracle={oracle}",
                    self.alpha, self.search_eps
                )
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Ptas(#[from] PtasError),
    #[error(transparent)]
    General(#[from] GeneralError),
    #[error(transparent)]
    Bicriteria(#[from] BicriteriaError<Rational>),
}

/// One algorithm run. `bound_factor` bounds objective / OPT; `bound_value`
/// bounds the objective itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub result: BilevelResult<Rational>,
    pub bound_factor: Option<Rational>,
    pub bound_value: Option<Rational>,
    pub stats: RunStats,
    pub bicriteria: Option<BicriteriaResult<Rational>>,
}

pub fn run_algorithm(instance: &Instance, config: &AlgoConfig) -> Result<Run, SolveError> {
    let exact_options = ExactOptions {
        exhaustive_limit: config.exhaustive_limit,
        ..ExactOptions::default()
    };
    match config.algo {
        Algo::Exact => {
            let result = exact::solve(instance, exact_options)?;
            Ok(Run {
                bound_factor: Some(Rational::one()),
                bound_value: Some(result.objective.clone()),
                result,
                stats: RunStats::default(),
                bicriteria: None,
            })
        }
        Algo::Ptas => {
            let options = if config.exhaustive {
                PtasOptions::exhaustive()
            } else {
                PtasOptions {
                    max_guesses: config.max_guesses,
                    max_criticals: config.max_inner.or(Some(2_000)),
                    size_cap: None,
                }
            };
            let out = ptas::solve(instance, &config.eps, &options)?;
            let factor = (!out.result.bound_claim.truncated())
                .then(|| Rational::one() + ptas::bound(&config.eps, instance.s_a()));
            Ok(Run {
                result: out.result,
                bound_factor: factor,
                bound_value: None,
                stats: out.stats,
                bicriteria: None,
            })
        }
        Algo::General => {
            let mut options = if config.exhaustive {
                GeneralOptions::exhaustive()
            } else {
                GeneralOptions {
                    max_large_guesses: config.max_guesses,
                    max_lambda_guesses: config.max_inner.or(Some(200)),
                    ..GeneralOptions::default()
                }
            };
            options.delta = config.delta.clone();
            let out = general::solve(instance, &config.eps, &options)?;
            Ok(Run {
                result: out.result,
                bound_factor: None,
                bound_value: None,
                stats: out.stats,
                bicriteria: None,
            })
        }
        Algo::Bicriteria => {
            let oracle = make_oracle(instance, config.oracle);
            let options = BicriteriaOptions {
                alpha: config.alpha.clone(),
                search_eps: config.search_eps.clone(),
                max_rounds: None,
                exact_limit: config.exhaustive_limit.max(40),
            };
            let res = bicriteria::solve(instance, oracle.as_ref(), &options)?;
            let response = if res.objective_is_exact {
                exact::best_response(instance, &res.leader)
            } else {
                let available: Vec<bool> = res.leader.iter().map(|&x| !x).collect();
                let profits: Vec<Rational> = instance
                    .profits()
                    .into_iter()
                    .zip(&available)
                    .map(|(p, &a)| if a { p } else { Rational::zero() })
                    .collect();
                oracle.solve(&profits, &available, instance.follower_budget())
            };
            let claim = BoundClaim::Guaranteed(format!(
                "objective <= {} with leader budget x{}",
                res.certified_bound, res.budget_multiplier
            ));
            let result = BilevelResult {
                leader: res.leader.clone(),
                objective: res.objective.clone(),
                follower_response: response,
                bound_claim: claim,
                budget_multiplier: res.budget_multiplier.clone(),
            };
            Ok(Run {
                result,
                bound_factor: None,
                bound_value: Some(res.certified_bound.clone()),
                stats: RunStats::default(),
                bicriteria: Some(res),
            })
        }
    }
}

/// One row of benchmark output. Rationals are kept as exact strings; `ratio`
/// is objective / OPT to six decimals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub suite: String,
    pub seed: u64,
    pub index: usize,
    /// First 16 hex digits of the SHA-256 of the instance document.
    pub digest: String,
    pub n: usize,
    pub s_a: usize,
    pub s_b: usize,
    pub algo: String,
    pub params: String,
    pub objective: String,
    pub opt: Option<String>,
    pub ratio: Option<String>,
    pub bound_factor: Option<String>,
    pub bound_value: Option<String>,
    pub bound_claim: String,
    pub truncated: bool,
    pub budget_multiplier: String,
    pub lp_solves: usize,
    pub lp_rank_violations: usize,
    pub millis: u64,
}

pub fn instance_digest(instance: &Instance) -> String {
    let hash = Sha256::digest(instance.to_json().as_bytes());
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn format_ratio(objective: &Rational, opt: &Rational) -> String {
    if opt.is_zero() {
        return if objective.is_zero() {
            "1.000000".into()
        } else {
            "inf".into()
        };
    }
    let r = objective / opt;
    format!("{:.6}", r.to_f64().unwrap_or(f64::NAN))
}

/// Run `config` on `instance` and describe it. OPT comes from the exact
/// solver when n is within its limit (or from the run itself when it is
/// exact).
pub fn record_run(
    suite: &str,
    seed: u64,
    index: usize,
    instance: &Instance,
    config: &AlgoConfig,
    extra_params: &str,
) -> Result<(RunRecord, Run, Option<Rational>), SolveError> {
    let start = Instant::now();
    let run = run_algorithm(instance, config)?;
    let millis = start.elapsed().as_millis() as u64;
    let opt = match config.algo {
        Algo::Exact => Some(run.result.objective.clone()),
        _ if instance.n() <= config.exhaustive_limit => {
            let options = ExactOptions {
                exhaustive_limit: config.exhaustive_limit,
                ..ExactOptions::default()
            };
            Some(exact::solve(instance, options)?.objective)
        }
        _ => None,
    };
    let mut params = config.params();
    if !extra_params.is_empty() {
        if !params.is_empty() {
            params.push(';');
        }
        params += extra_params;
    }
    let record = RunRecord {
        suite: suite.to_string(),
        seed,
        index,
        digest: instance_digest(instance),
        n: instance.n(),
        s_a: instance.s_a(),
        s_b: instance.s_b(),
        algo: config.algo.name().to_string(),
        params,
        objective: run.result.objective.to_string(),
        opt: opt.as_ref().map(|o| o.to_string()),
        ratio: opt.as_ref().map(|o| format_ratio(&run.result.objective, o)),
        bound_factor: run.bound_factor.as_ref().map(|b| b.to_string()),
        bound_value: run.bound_value.as_ref().map(|b| b.to_string()),
        bound_claim: run.result.bound_claim.to_string(),
        truncated: run.result.bound_claim.truncated(),
        budget_multiplier: run.result.budget_multiplier.to_string(),
        lp_solves: run.stats.lp_solves,
        lp_rank_violations: run.stats.lp_rank_violations,
        millis,
    };
    Ok((record, run, opt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    RandomSmall,
    Hs3Gap,
    BicriteriaSweep,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::RandomSmall => "random-small",
            Suite::Hs3Gap => "hs3-gap",
            Suite::BicriteriaSweep => "bicriteria-sweep",
        }
    }
}

impl FromStr for Suite {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "random-small" => Ok(Suite::RandomSmall),
            "hs3-gap" => Ok(Suite::Hs3Gap),
            "bicriteria-sweep" => Ok(Suite::BicriteriaSweep),
            _ => Err(BenchError::UnknownSuite(s.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("unknown suite {0:?} (expected random-small, hs3-gap or bicriteria-sweep)")]
    UnknownSuite(String),
    #[error("seed {seed}, instance {index}: {error}")]
    Solver {
        seed: u64,
        index: usize,
        error: SolveError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteParams {
    pub config: AlgoConfig,
    /// Random suites: items per instance.
    pub n: usize,
    pub s_a: usize,
    /// random-small only; the sweep cycles s_A and s_B through 1..=4.
    pub s_b: usize,
    pub per_seed: usize,
    pub grid: ValueGrid,
}

impl SuiteParams {
    pub fn new(config: AlgoConfig) -> Self {
        let s_b = if config.algo == Algo::General { 2 } else { 1 };
        SuiteParams {
            config,
            n: 8,
            s_a: 1,
            s_b,
            per_seed: 1,
            grid: ValueGrid::default(),
        }
    }
}

/// 3-hitting-set instances with at most 6 elements and 4 sets, with and
/// without small hitting sets.
pub fn hs3_catalog() -> Vec<HittingSetInstance> {
    let raw: [(usize, &[[usize; 3]], usize); 20] = [
        (3, &[[1, 2, 3]], 1),
        (4, &[[1, 2, 3], [2, 3, 4]], 1),
        (6, &[[1, 2, 3], [4, 5, 6]], 1),
        (6, &[[1, 2, 3], [4, 5, 6]], 2),
        (5, &[[1, 2, 3], [3, 4, 5]], 1),
        (6, &[[1, 2, 3], [4, 5, 6], [1, 4, 5]], 1),
        (6, &[[1, 2, 3], [4, 5, 6], [1, 4, 5]], 2),
        (6, &[[1, 2, 4], [2, 3, 5], [1, 3, 6], [4, 5, 6]], 1),
        (6, &[[1, 2, 4], [2, 3, 5], [1, 3, 6], [4, 5, 6]], 2),
        (5, &[[1, 2, 3], [1, 4, 5], [2, 4, 5]], 1),
        (5, &[[1, 2, 3], [1, 4, 5], [2, 4, 5]], 2),
        (4, &[[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]], 1),
        (4, &[[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]], 2),
        (6, &[[1, 2, 3], [3, 4, 5], [5, 6, 1]], 1),
        (6, &[[1, 2, 3], [3, 4, 5], [5, 6, 1]], 2),
        (6, &[[1, 2, 3], [1, 4, 5], [1, 5, 6], [1, 2, 6]], 1),
        (6, &[[1, 2, 3], [4, 5, 6], [1, 4, 2], [3, 5, 6]], 1),
        (6, &[[2, 4, 6], [1, 3, 5], [1, 2, 3], [4, 5, 6]], 2),
        (6, &[[1, 2, 3], [4, 5, 6], [1, 2, 4], [3, 5, 6]], 3),
        (5, &[[1, 2, 5], [3, 4, 5], [1, 3, 4]], 1),
    ];
    raw.iter()
        .map(|&(n, sets, k)| {
            HittingSetInstance::new(n, sets.to_vec(), k).expect("catalog entries are valid")
        })
        .collect()
}

fn random_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index as u64
}

/// Generate and run one suite member.
fn suite_member(
    suite: Suite,
    params: &SuiteParams,
    seed: u64,
    index: usize,
) -> Result<RunRecord, BenchError> {
    let fail = |error| BenchError::Solver { seed, index, error };
    let (instance, config, extra) = match suite {
        Suite::RandomSmall => {
            let inst = gen_random(
                params.n,
                params.s_a,
                params.s_b,
                params.grid,
                random_seed(seed, index),
            );
            (inst, params.config.clone(), String::new())
        }
        Suite::Hs3Gap => {
            let catalog = hs3_catalog();
            let pick = (seed as usize + index) % catalog.len();
            let hs = &catalog[pick];
            let inst = gen_3hs_reduction(hs).expect("catalog entries reduce");
            let yes = if hs.has_hitting_set() { "yes" } else { "no" };
            (
                inst,
                params.config.clone(),
                format!("hs={pick};k={};hitting={yes}", hs.k),
            )
        }
        Suite::BicriteriaSweep => {
            let s_a = 1 + (seed % 4) as usize;
            let s_b = 1 + (seed / 4 % 4) as usize;
            let inst = gen_random(params.n, s_a, s_b, params.grid, random_seed(seed, index));
            let config = AlgoConfig {
                algo: Algo::Bicriteria,
                ..params.config.clone()
            };
            (inst, config, String::new())
        }
    };
    record_run(suite.name(), seed, index, &instance, &config, &extra)
        .map(|r| r.0)
        .map_err(fail)
}

/// Run `f` on a pool capped by INTERDICT_THREADS when it is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("INTERDICT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&k| k > 0);
    match cap.and_then(|k| rayon::ThreadPoolBuilder::new().num_threads(k).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Run a suite on every seed; rows sorted by (seed, index).
pub fn bench_suite(
    name: &str,
    params: &SuiteParams,
    seeds: &[u64],
) -> Result<Vec<RunRecord>, BenchError> {
    let suite: Suite = name.parse()?;
    let jobs: Vec<(u64, usize)> = seeds
        .iter()
        .flat_map(|&s| (0..params.per_seed.max(1)).map(move |i| (s, i)))
        .collect();
    let mut records = with_thread_cap(|| {
        jobs.par_iter()
            .map(|&(s, i)| suite_member(suite, params, s, i))
            .collect::<Result<Vec<_>, _>>()
    })?;
    records.sort_by_key(|r| (r.seed, r.index));
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSummary {
    pub rows: usize,
    pub with_opt: usize,
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
}

pub fn summarize(records: &[RunRecord]) -> RatioSummary {
    let ratios: Vec<f64> = records
        .iter()
        .filter_map(|r| r.ratio.as_ref())
        .filter_map(|r| r.parse().ok())
        .collect();
    let finite: Vec<f64> = ratios.iter().copied().filter(|r| r.is_finite()).collect();
    RatioSummary {
        rows: records.len(),
        with_opt: ratios.len(),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        mean_ratio: (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64),
    }
}

fn csv_row(r: &RunRecord) -> [String; 13] {
    [
        r.suite.clone(),
        r.seed.to_string(),
        r.n.to_string(),
        r.s_a.to_string(),
        r.s_b.to_string(),
        r.algo.clone(),
        r.params.clone(),
        r.objective.clone(),
        r.opt.clone().unwrap_or_default(),
        r.ratio.clone().unwrap_or_default(),
        r.bound_claim.clone(),
        r.truncated.to_string(),
        r.millis.to_string(),
    ]
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_jsonl<W: Write>(records: &[RunRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
