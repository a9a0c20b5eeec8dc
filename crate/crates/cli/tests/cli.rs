use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use budget_match::choice::{ChoiceKind, Mechanism};
use budget_match::engine::{run_da, DaOptions};
use budget_match::instances::{gen_random, RandomParams};
use budget_match::model::{Market, MarketBuilder, Matching, Rat};

fn bm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_budget-match")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

/// Sorted labels of a `{ids, labels}` contract list.
fn list_labels(v: &Value) -> Vec<String> {
    let mut l: Vec<String> = v["labels"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect();
    l.sort();
    l
}

fn labels(report: &Value) -> Vec<String> {
    list_labels(&report["contracts"])
}

fn sorted(v: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_example2() {
    let o = bm(&["solve", "--fixture", "example2-mech1", "--mechanism", "sp-greedy"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(labels(&v), sorted(&["(d1,h2,100)", "(d3,h1,42)", "(d4,h1,55)", "(d5,h1,50)"]));
    assert_eq!(v["hospitals"][0]["violation_ratio"], "147/100");
    assert_eq!(v["hospitals"][0]["implied_budget"], "147");
    assert_eq!(v["bounds_hold"], true);
}

#[test]
fn solve_example3_on_both_engines() {
    for engine in ["naive", "heap"] {
        let o = bm(&["solve", "--fixture", "example3-mech2", "--mechanism", "budget-greedy", "--engine", engine]);
        assert_eq!(code(&o), 0);
        assert_eq!(labels(&json(&o)), sorted(&["(d1,h2,100)", "(d4,h1,55)", "(d5,h1,50)"]));
    }
}

#[test]
fn solve_empty_market() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, MarketBuilder::new().build().unwrap().to_json()).unwrap();
    let o = bm(&["solve", "--market", p(&path), "--mechanism", "sp-greedy"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["matching"]["contracts"], serde_json::json!([]));
}

#[test]
fn decimal_and_trace_flags() {
    let o = bm(&["solve", "--fixture", "example2-mech1", "--decimal", "--trace"]);
    let v = json(&o);
    assert_eq!(v["hospitals"][0]["violation_ratio"], "1.470000");
    assert_eq!(v["trace"]["rounds"].as_array().unwrap().len(), v["rounds"].as_u64().unwrap() as usize);
}

#[test]
fn solve_output_roundtrips_into_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.json");
    let o = bm(&["solve", "--fixture", "example2-mech1", "-o", p(&out)]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let m = budget_match::instances::fixtures::example2().market;
    let x = Matching::from_json(&m, &v["matching"].to_string()).unwrap();
    assert_eq!(x.len(), 4);

    let o = bm(&["verify", "--fixture", "example2-mech1", "--matching", p(&out)]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["stability"]["stable"], true);
    assert_eq!(r["fixed_point"]["holds"], true);

    // At the hospitals' own budgets the same matching overspends.
    let o = bm(&["verify", "--fixture", "example2-mech1", "--matching", p(&out), "--budgets", "given"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["stability"]["feasible"][0], false);
}

#[test]
fn verify_reports_blocking_coalition() {
    let o = bm(&["verify", "--fixture", "example1-nonexistence", "--mechanism", "exact"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["stability"]["blocking"]["hospital"], "h1");
    assert_eq!(list_labels(&v["stability"]["blocking"]["coalition"]), sorted(&["(d2,h1,6)", "(d3,h1,4)"]));
}

#[test]
fn exists_exit_codes() {
    let o = bm(&["exists", "--fixture", "example1-nonexistence"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["verdict"], "none");

    let o = bm(&["exists", "--fixture", "example1-nonexistence", "--budgets", "16,6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["verdict"], "found");

    let o = bm(&["exists", "--fixture", "example1-nonexistence", "--inflate", "16,6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["mode"], "range");

    let o = bm(&["--enum-cap", "5", "exists", "--fixture", "example1-nonexistence"]);
    assert_eq!(code(&o), 2);

    let o = bm(&["exists", "--fixture", "example1-nonexistence", "--budgets", "implied"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn probe_and_props_exit_codes() {
    let o = bm(&["probe-sp", "--fixture", "nonsp-5.2"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["misreport"]["doctor"], "d3");
    assert_eq!(v["misreport"]["report"]["ids"], serde_json::json!([4, 5]));

    let o = bm(&["probe-sp", "--fixture", "example2-mech1", "--doctor", "d2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["manipulable"], false);

    let o = bm(&["props", "--fixture", "lad-failure-5.2", "--property", "lad"]);
    assert_eq!(code(&o), 1);
    let w = &json(&o)["hospitals"][0]["results"][0]["witness"];
    assert_eq!(w["smaller"]["ids"], serde_json::json!([1, 2, 3]));
    assert_eq!(w["larger"]["ids"], serde_json::json!([0, 1, 2, 3]));

    let o = bm(&["props", "--fixture", "example2-mech1", "--hospital", "h2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["all_hold"], true);
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(code(&bm(&["solve"])), 2);
    assert_eq!(code(&bm(&["solve", "--fixture", "nope"])), 2);
    assert_eq!(
        code(&bm(&["solve", "--fixture", "example1-nonexistence", "--mechanism", "exact", "--engine", "heap"])),
        2
    );
    assert_eq!(code(&bm(&["--oracle-cap", "0", "solve", "--fixture", "example2-mech1"])), 2);
    // Proportional-only mechanism on general utilities.
    assert_eq!(code(&bm(&["solve", "--fixture", "example2-mech1", "--mechanism", "prop-sp"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"doctors\": 3}").unwrap();
    assert_eq!(code(&bm(&["solve", "--market", p(&bad)])), 2);
}

#[test]
fn gen_families() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = dir.path().join("t1.json");
    let o = bm(&["gen", "--family", "theorem1", "--m", "5", "--alpha", "1/10", "--beta", "1/2", "-o", p(&t1)]);
    assert_eq!(code(&o), 0);
    let m = Market::from_json(&std::fs::read_to_string(&t1).unwrap()).unwrap();
    assert_eq!((m.num_doctors(), m.num_hospitals()), (25, 5));

    assert_eq!(code(&bm(&["gen", "--family", "theorem1", "--m", "3"])), 2);

    let o = bm(&["gen", "--family", "theorem4", "--w-low", "1", "--w-high", "3", "--budget", "4"]);
    assert_eq!(Market::from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap().num_contracts(), 8);

    let a = bm(&["--seed", "7", "gen", "--family", "random", "--doctors", "5"]);
    let b = bm(&["--seed", "7", "gen", "--family", "random", "--doctors", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let m = Market::from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(m, gen_random(&RandomParams { seed: 7, doctors: 5, ..RandomParams::default() }).unwrap());
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "mechanism = \"budget-greedy\"\nseed = 3\n[random]\ndoctors = 3\n").unwrap();
    let o = bm(&["--config", p(&cfg), "solve", "--fixture", "example2-mech1", "--mechanism", "sp-greedy"]);
    assert_eq!(code(&o), 0);
    assert_eq!(labels(&json(&o)), sorted(&["(d1,h2,100)", "(d4,h1,55)", "(d5,h1,50)"]));

    let o = bm(&["--config", p(&cfg), "gen", "--family", "random", "--doctors", "6"]);
    let m = Market::from_json(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(m, gen_random(&RandomParams { seed: 3, doctors: 3, ..RandomParams::default() }).unwrap());

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(code(&bm(&["--config", p(&cfg), "solve", "--fixture", "example2-mech1"])), 2);
}

fn sweep_rows(args: &[&str]) -> (i32, Vec<csv::StringRecord>) {
    let o = bm(args);
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let rows = r.records().map(|x| x.unwrap()).collect();
    (code(&o), rows)
}

#[test]
fn sweep_budget_greedy_stays_below_budget_plus_max_wage() {
    let (c, rows) = sweep_rows(&["sweep", "--seeds", "100", "--mechanisms", "budget-greedy"]);
    assert_eq!(c, 0);
    assert_eq!(rows.len(), 100);
    for row in &rows {
        assert_eq!(&row[2], "ok");
        assert_eq!(&row[9], "true");
        // Recompute the outcome and check the bound directly.
        let seed: u64 = row[0].parse().unwrap();
        let m = gen_random(&RandomParams { seed, ..RandomParams::default() }).unwrap();
        let mech = Mechanism::uniform(&m, ChoiceKind::GreedyBudget).unwrap();
        let (x, _) = run_da(&m, &mech, DaOptions::default()).unwrap();
        for h in m.hospitals() {
            let cap = m.budget(h) + m.max_wage(h).unwrap_or(Rat::ZERO);
            assert!(x.wage_total(h) < cap || x.wage_total(h) == Rat::ZERO, "seed {seed}");
        }
    }
}

#[test]
fn sweep_equal_util_is_feasible() {
    let (c, rows) = sweep_rows(&["sweep", "--seeds", "100", "--utility", "uniform", "--mechanisms", "equal-util"]);
    assert_eq!(c, 0);
    assert_eq!(rows.len(), 100);
    for row in &rows {
        let ratio: Rat = row[7].parse().unwrap();
        assert!(ratio <= Rat::ONE, "seed {}: ratio {ratio}", &row[0]);
        assert_eq!(&row[8], "true");
    }
}

#[test]
fn sweep_zero_seeds_is_header_only() {
    let o = bm(&["sweep", "--seeds", "0"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("seed,mechanism,status"));
}

#[test]
fn sweep_marks_incompatible_rows() {
    let (c, rows) = sweep_rows(&["sweep", "--seeds", "2", "--mechanisms", "prop-sp", "--threads", "1"]);
    assert_eq!(c, 2);
    assert!(rows.iter().all(|r| &r[2] == "incompatible"));
}
