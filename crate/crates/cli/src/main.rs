//! `interdict`: generate instances, run the solvers, verify results and run
//! benchmark suites.
//!
//! Exit codes: 0 success, 1 usage error, 2 solver or verification failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use interdict_core::bench::{self, Algo, AlgoConfig, SuiteParams};
use interdict_core::exact::{self, ResultDoc};
use interdict_core::follower::OracleStrategy;
use interdict_core::instance::{gen_3hs_reduction, gen_random, HittingSetInstance, ValueGrid};
use interdict_core::scalar::parse;
use interdict_core::{BilevelResult, Instance, Rational};

#[derive(Parser)]
#[command(
    name = "interdict",
    version,
    about = "Interdiction with packing constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Solve an instance and print its run record.
    Solve {
        #[arg(value_enum)]
        algo: AlgoArg,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Check a result document against an instance.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        result: PathBuf,
    },
    /// Run a benchmark suite and write CSV.
    Bench {
        #[arg(long)]
        suite: String,
        #[arg(long, value_enum, default_value = "exact")]
        algo: AlgoArg,
        /// Seeds as `a..b` (half open) or a comma list.
        #[arg(long, default_value = "0..10", value_parser = parse_seeds)]
        seeds: Seeds,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        s_a: usize,
        /// Default 1, or 2 for the general algorithm.
        #[arg(long)]
        s_b: Option<usize>,
        #[arg(long, default_value_t = 1)]
        per_seed: usize,
        #[command(flatten)]
        algo_opts: AlgoOpts,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write one JSON record per line here.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        s_a: usize,
        #[arg(long, default_value_t = 1)]
        s_b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_numerator: u32,
        #[arg(long, default_value_t = 4)]
        denominator: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduction from a 3-hitting-set file (one set of three elements per line).
    Hs3 {
        #[arg(long)]
        sets: PathBuf,
        #[arg(long)]
        elements: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Exact,
    Ptas,
    General,
    Bicriteria,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Algo {
        match a {
            AlgoArg::Exact => Algo::Exact,
            AlgoArg::Ptas => Algo::Ptas,
            AlgoArg::General => Algo::General,
            AlgoArg::Bicriteria => Algo::Bicriteria,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Exact,
    Greedy,
}

#[derive(Args)]
struct SolveOpts {
    #[arg(long = "in")]
    input: PathBuf,
    /// Write the result document here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the run record as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    algo_opts: AlgoOpts,
}

#[derive(Args)]
struct AlgoOpts {
    #[arg(long, default_value = "1/4", value_parser = parse_rational)]
    eps: Rational,
    #[arg(long, value_parser = parse_rational)]
    delta: Option<Rational>,
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    max_guesses: Option<usize>,
    #[arg(long)]
    max_criticals: Option<usize>,
    #[arg(long)]
    max_large_guesses: Option<usize>,
    #[arg(long)]
    max_lambda_guesses: Option<usize>,
    #[arg(long, default_value = "1/2", value_parser = parse_rational)]
    alpha: Rational,
    #[arg(long, value_enum, default_value = "exact")]
    oracle: OracleArg,
    #[arg(long, default_value = "1/1000", value_parser = parse_rational)]
    search_eps: Rational,
    /// Largest n for the exact solver and for OPT columns.
    #[arg(long, default_value_t = exact::DEFAULT_EXHAUSTIVE_LIMIT)]
    exhaustive_limit: usize,
}

impl AlgoOpts {
    fn config(&self, algo: Algo) -> AlgoConfig {
        let mut c = AlgoConfig::new(algo);
        c.eps = self.eps.clone();
        c.delta = self.delta.clone();
        c.exhaustive = self.exhaustive;
        let (guesses, inner) = match algo {
            Algo::General => (self.max_large_guesses, self.max_lambda_guesses),
            _ => (self.max_guesses, self.max_criticals),
        };
        if let Some(g) = guesses.or(self.max_guesses) {
            c.max_guesses = Some(g);
        }
        c.max_inner = inner;
        c.alpha = self.alpha.clone();
        c.search_eps = self.search_eps.clone();
        c.oracle = match self.oracle {
            OracleArg::Exact => OracleStrategy::Exact,
            OracleArg::Greedy => OracleStrategy::Greedy,
        };
        c.exhaustive_limit = self.exhaustive_limit;
        c
    }
}

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

fn parse_seeds(text: &str) -> Result<Seeds, String> {
    let bad = |t: &str| format!("bad seed {t:?}");
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad(a))?;
        let b: u64 = b.trim().parse().map_err(|_| bad(b))?;
        return Ok(Seeds((a..b).collect()));
    }
    text.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad(t)))
        .collect::<Result<_, _>>()
        .map(Seeds)
}

fn parse_rational(text: &str) -> Result<Rational, String> {
    parse(text).ok_or_else(|| format!("expected a rational like 1/4 or 0.25, got {text:?}"))
}

/// A failure after argument parsing: message plus exit code.
struct Failure(u8, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(1, msg.into())
}

fn solver(msg: impl Into<String>) -> Failure {
    Failure(2, msg.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_to(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| solver(format!("cannot write {}: {e}", p.display())))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| solver(e.to_string())),
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    Instance::from_json(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { kind } => match kind {
            GenKind::Random {
                n,
                s_a,
                s_b,
                seed,
                max_numerator,
                denominator,
                out,
            } => {
                if s_a == 0 || s_b == 0 || max_numerator == 0 || denominator == 0 {
                    return Err(usage(
                        "--s-a, --s-b, --max-numerator and --denominator must be positive",
                    ));
                }
                let inst: Instance = gen_random(
                    n,
                    s_a,
                    s_b,
                    ValueGrid {
                        max_numerator,
                        denominator,
                    },
                    seed,
                );
                write_to(out.as_deref(), &(inst.to_json() + "\n"))
            }
            GenKind::Hs3 {
                sets,
                elements,
                k,
                out,
            } => {
                let parsed = HittingSetInstance::parse_sets(&read(&sets)?)
                    .map_err(|e| usage(e.to_string()))?;
                let hs = HittingSetInstance::new(elements, parsed, k)
                    .map_err(|e| usage(e.to_string()))?;
                let inst: Instance = gen_3hs_reduction(&hs).map_err(|e| usage(e.to_string()))?;
                write_to(out.as_deref(), &(inst.to_json() + "\n"))
            }
        },
        Command::Solve { algo, opts } => {
            let inst = load_instance(&opts.input)?;
            let config = opts.algo_opts.config(algo.into());
            let (record, run, _) = bench::record_run("solve", 0, 0, &inst, &config, "")
                .map_err(|e| solver(e.to_string()))?;
            if let Some(out) = &opts.out {
                let doc = serde_json::to_string_pretty(&run.result.to_doc())
                    .expect("result documents serialize");
                write_to(Some(out), &(doc + "\n"))?;
            }
            if let Some(path) = &opts.csv {
                let mut buf = Vec::new();
                bench::write_csv(std::slice::from_ref(&record), &mut buf)
                    .map_err(|e| solver(e.to_string()))?;
                fs::write(path, buf)
                    .map_err(|e| solver(format!("cannot write {}: {e}", path.display())))?;
            }
            let mut line = Vec::new();
            bench::write_jsonl(std::slice::from_ref(&record), &mut line)
                .map_err(|e| solver(e.to_string()))?;
            write_to(None, &String::from_utf8_lossy(&line))
        }
        Command::Verify { input, result } => {
            let inst = load_instance(&input)?;
            let doc: ResultDoc = serde_json::from_str(&read(&result)?)
                .map_err(|e| usage(format!("{}: {e}", result.display())))?;
            let res = BilevelResult::from_doc(&doc)
                .map_err(|e| usage(format!("{}: {e}", result.display())))?;
            let report = exact::verify(&inst, &res);
            if report.ok() {
                println!("ok objective={}", report.recomputed_objective);
                Ok(())
            } else {
                Err(solver(report.issues.join("\n")))
            }
        }
        Command::Bench {
            suite,
            algo,
            seeds,
            n,
            s_a,
            s_b,
            per_seed,
            algo_opts,
            csv,
            jsonl,
        } => {
            let mut params = SuiteParams::new(algo_opts.config(algo.into()));
            params.n = n;
            params.s_a = s_a;
            if let Some(s_b) = s_b {
                params.s_b = s_b;
            }
            params.per_seed = per_seed;
            if s_a == 0 || params.s_b == 0 {
                return Err(usage("--s-a and --s-b must be positive"));
            }
            let records = bench::bench_suite(&suite, &params, &seeds.0).map_err(|e| match e {
                bench::BenchError::UnknownSuite(_) => usage(format!("--suite: {e}")),
                _ => solver(e.to_string()),
            })?;
            let mut buf = Vec::new();
            bench::write_csv(&records, &mut buf).map_err(|e| solver(e.to_string()))?;
            write_to(csv.as_deref(), &String::from_utf8_lossy(&buf))?;
            if let Some(path) = jsonl {
                let mut buf = Vec::new();
                bench::write_jsonl(&records, &mut buf).map_err(|e| solver(e.to_string()))?;
                fs::write(&path, buf)
                    .map_err(|e| solver(format!("cannot write {}: {e}", path.display())))?;
            }
            let s = bench::summarize(&records);
            if let (Some(max), Some(mean)) = (s.max_ratio, s.mean_ratio) {
                eprintln!(
                    "{} rows, {} with OPT, ratio max {max:.6} mean {mean:.6}",
                    s.rows, s.with_opt
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
