//! The binary end to end: the pinned query answer, exit codes and usage
//! errors.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};

use pathprop::engine::PathMode;
use pathprop::fixtures::{barcelona_to_la, flight_defs, flights};
use pathprop::oracle::oracle_solve;
use serde_json::Value as Json;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    root().join("../core/fixtures").join(name).display().to_string()
}

fn data(name: &str) -> String {
    root().join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathprop")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn query_answer_matches_golden_and_enumeration() {
    let o = run(&["query", "--graph", &fixture("flights.json"), "--query", &fixture("barcelona_to_la.query")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = std::fs::read_to_string(root().join("tests/golden/barcelona_to_la.json")).unwrap();
    assert_eq!(stdout(&o), golden);

    let g = flights();
    let want = oracle_solve(&g, &flight_defs(), &barcelona_to_la(), 6, PathMode::Any).unwrap();
    let json: Json = serde_json::from_str(&golden).unwrap();
    let got: BTreeSet<Vec<String>> = json["answers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["paths"]["p"]["edges"].as_array().unwrap().iter().map(|e| e.as_str().unwrap().to_string()).collect())
        .collect();
    let want: BTreeSet<Vec<String>> = want
        .iter()
        .map(|a| a.paths["p"].edges.iter().map(|e| g.edge_name(*e).to_string()).collect())
        .collect();
    assert_eq!(got, want);
}

#[test]
fn explicit_defs_and_table_output() {
    let o = run(&[
        "query",
        "--graph",
        &fixture("flights.json"),
        "--defs",
        &fixture("flights.defs"),
        "--query",
        &fixture("two_hops.query"),
        "--mode",
        "simple",
        "--format",
        "table",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x1=n5  x2=n1  p1=e6·e7 {cost=950, length=2, start=540}\n1 answer(s)\n");
}

#[test]
fn validate_accepts_well_formed_files() {
    let o = run(&[
        "validate",
        "--graph",
        &fixture("flights.json"),
        "--defs",
        &fixture("flights.defs"),
        "--query",
        &fixture("barcelona_to_la.query"),
        "--automaton",
        &data("a_eq.json"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("6 nodes, 8 edges"));
}

#[test]
fn validate_reports_bad_files() {
    let dir = std::env::temp_dir().join(format!("pathprop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let g = dir.join("bad.json");
    std::fs::write(&g, r#"{"nodes":[{"id":"a"}],"edges":[{"id":"e","src":"a","tgt":"nX"}]}"#).unwrap();
    let o = run(&["validate", "--graph", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nX"), "{}", stderr(&o));

    let d = dir.join("bad.defs");
    std::fs::write(&d, "properties a on p;\ncase edge: z.a == 1;\ncase step: ;").unwrap();
    let o = run(&["validate", "--defs", d.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown reserved variable"), "{}", stderr(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_print_the_grammar() {
    let o = run(&["bench", "--edges", "500,200"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("strictly increasing"), "{err}");
    assert!(err.contains("query   :="), "{err}");

    let o = run(&["query", "--graph", "g.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("query   :="));

    let o = run(&["validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("query   :="));
}

#[test]
fn timeouts_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("pathprop-timeout-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = pathprop_bench::BenchConfig { edges: vec![1000], ..Default::default() };
    let g = &pathprop_bench::generate_graphs(&cfg).unwrap()[0].graph;
    let gp = dir.join("g.json");
    pathprop::graph_json::save_graph(g, &gp).unwrap();
    let qp = dir.join("q.query");
    std::fs::write(&qp, "match (x1:Airport) =[p:Flight+]=> (x2:Airport) where x1.loc == \"City_0\"").unwrap();
    let o = run(&["query", "--graph", gp.to_str().unwrap(), "--query", qp.to_str().unwrap(), "--mode", "simple", "--timeout", "0.2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let json: Json = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["timed_out"], Json::Bool(true));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bench_writes_csv() {
    let o = run(&["bench", "--nodes", "10", "--edges", "0,15", "--queries", "1", "--variants", "none,L<3", "--timeout", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], pathprop_bench::CSV_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("none,e0,0,0,"), "{out}");
}

#[test]
fn rdpa_check_reports_agreement() {
    let o = run(&["rdpa", "check", "--automaton", &data("a_eq.json"), "--max-len", "5", "--data", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("agree on "), "{}", stdout(&o));
}
