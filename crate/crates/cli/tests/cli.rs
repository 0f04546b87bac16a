use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const TWO_ITEM: &str = r#"{
  "version": 1, "s_a": 1, "s_b": 1,
  "leader_budget": ["1"], "follower_budget": ["1"],
  "items": [
    {"p": "2", "cost": ["1"], "weight": ["1"]},
    {"p": "1", "cost": ["1"], "weight": ["1"]}
  ]
}"#;

fn interdict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interdict"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_two_item(dir: &TempDir) -> String {
    let p = dir.path().join("inst.json");
    fs::write(&p, TWO_ITEM).unwrap();
    p.to_string_lossy().into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_exact_reports_objective_one() {
    let dir = TempDir::new().unwrap();
    let inst = write_two_item(&dir);
    let out = interdict(&["solve", "exact", "--in", &inst]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["objective"], "1");
    assert_eq!(record["opt"], "1");
    assert_eq!(record["bound_claim"], "exact");
}

#[test]
fn every_algorithm_solves_and_verifies() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("inst.json");
    let gen = interdict(&[
        "gen",
        "random",
        "--n",
        "6",
        "--s-b",
        "2",
        "--seed",
        "3",
        "--out",
        path_str(&inst),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let one = dir.path().join("one.json");
    let gen = interdict(&[
        "gen",
        "random",
        "--n",
        "6",
        "--seed",
        "3",
        "--out",
        path_str(&one),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let cases: [(&str, &Path, &[&str]); 4] = [
        ("exact", &inst, &[]),
        ("ptas", &one, &["--eps", "0.5"]),
        ("general", &inst, &["--eps", "1/2", "--delta", "1/4"]),
        ("bicriteria", &inst, &["--alpha", "1/2"]),
    ];
    for (algo, input, extra) in cases {
        let res = dir.path().join(format!("{algo}.json"));
        let mut args = vec![
            "solve",
            algo,
            "--in",
            path_str(input),
            "--out",
            path_str(&res),
        ];
        args.extend_from_slice(extra);
        let out = interdict(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{algo}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v = interdict(&[
            "verify",
            "--in",
            path_str(input),
            "--result",
            path_str(&res),
        ]);
        assert_eq!(
            v.status.code(),
            Some(0),
            "{algo}: {}",
            String::from_utf8_lossy(&v.stderr)
        );
    }
}

#[test]
fn tampered_result_fails_verification() {
    let dir = TempDir::new().unwrap();
    let inst = write_two_item(&dir);
    let res = dir.path().join("r.json");
    let out = interdict(&["solve", "exact", "--in", &inst, "--out", path_str(&res)]);
    assert_eq!(out.status.code(), Some(0));
    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&res).unwrap()).unwrap();
    doc["objective"] = "1/2".into();
    fs::write(&res, doc.to_string()).unwrap();
    let v = interdict(&["verify", "--in", &inst, "--result", path_str(&res)]);
    assert_eq!(v.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&v.stderr).contains("objective-mismatch"));
}

#[test]
fn usage_errors_exit_one() {
    let out = interdict(&["solve", "exact"]);
    assert_eq!(out.status.code(), Some(1));
    let out = interdict(&["solve", "ptas", "--in", "x.json", "--eps", "quarter"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--eps"));
    let out = interdict(&["bench", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--suite"));
    let out = interdict(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solver_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("inst.json");
    interdict(&[
        "gen",
        "random",
        "--n",
        "4",
        "--s-b",
        "2",
        "--out",
        path_str(&inst),
    ]);
    // one follower dimension required
    let out = interdict(&["solve", "ptas", "--in", path_str(&inst)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_csv_has_ratio_within_bound() {
    let out = interdict(&[
        "bench",
        "--suite",
        "random-small",
        "--algo",
        "ptas",
        "--eps",
        "0.25",
        "--seeds",
        "0..4",
        "--n",
        "6",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        header,
        "suite,seed,n,s_a,s_b,algo,params,objective,opt,ratio,bound_claim,truncated,millis"
            .split(',')
            .collect::<Vec<_>>()
    );
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let ratio = header.iter().position(|&h| h == "ratio").unwrap();
    for row in &rows {
        let r: f64 = row[ratio].parse().unwrap();
        // 1 + bound(1/4) at s_A = 1
        assert!(
            (1.0..=1.0 + 0.25 + 0.0625 * (1.0 + 2.0 + 15.0) + 0.125 + 1e-9).contains(&r),
            "{row:?}"
        );
    }
}

#[test]
fn bench_is_reproducible_apart_from_time() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let out = interdict(&[
            "bench",
            "--suite",
            "hs3-gap",
            "--seeds",
            "0,5,2",
            "--csv",
            path_str(&csv),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let text = fs::read_to_string(csv).unwrap();
        text.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    let a = run("a.csv");
    assert_eq!(a.len(), 4);
    assert_eq!(a, run("b.csv"));
}

#[test]
fn hs3_generation_from_file() {
    let dir = TempDir::new().unwrap();
    let sets = dir.path().join("sets.txt");
    fs::write(&sets, "1 2 3\n# second\n4 5 6\n").unwrap();
    let inst = dir.path().join("inst.json");
    let out = interdict(&[
        "gen",
        "hs3",
        "--sets",
        path_str(&sets),
        "--elements",
        "6",
        "--k",
        "1",
        "--out",
        path_str(&inst),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = interdict(&["solve", "exact", "--in", path_str(&inst)]);
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    // no single element hits both sets
    assert_eq!(record["objective"], "4");
}
