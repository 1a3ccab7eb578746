//! The airport network: stored values, path constraints and query answers.

use std::collections::BTreeMap;

use pathprop::constraint::Verdict;
use pathprop::engine::{solve, SolveOptions};
use pathprop::fixtures::{barcelona_to_la, flight_defs, flights, two_hops};
use pathprop::graph::{ElementId, GraphPath};
use pathprop::props::{path_key, path_store};
use pathprop::Value;

fn path(g: &pathprop::PropertyGraph, edges: &[&str]) -> GraphPath {
    let ids = edges.iter().map(|e| g.edge(e).unwrap()).collect();
    GraphPath::from_edges(g, ids).unwrap()
}

fn names(g: &pathprop::PropertyGraph, b: &BTreeMap<String, ElementId>) -> BTreeMap<String, String> {
    b.iter().map(|(k, v)| (k.clone(), g.element_name(*v).to_string())).collect()
}

#[test]
fn two_leg_connection_values() {
    let g = flights();
    let def = flight_defs();
    let p = path(&g, &["e6", "e7"]);
    let s = path_store(&def, &g, &p).unwrap();
    assert!(s.is_consistent());
    assert_eq!(s.entailed_value(&path_key(&g, &p, "length")), Some(Value::Int(2)));
    assert_eq!(s.entailed_value(&path_key(&g, &p, "cost")), Some(Value::Int(950)));
    assert_eq!(s.entailed_value(&path_key(&g, &p, "start")), Some(Value::Int(540)));
    let tail = path(&g, &["e7"]);
    assert_eq!(s.entailed_value(&path_key(&g, &tail, "cost")), Some(Value::Int(300)));
    assert_eq!(s.entailed_value(&path_key(&g, &tail, "start")), Some(Value::Int(1020)));
}

#[test]
fn short_layover_is_inconsistent() {
    let g = flights();
    let s = path_store(&flight_defs(), &g, &path(&g, &["e5", "e3"])).unwrap();
    assert_eq!(s.verdict(), Verdict::Inconsistent);
}

#[test]
fn running_query_answers() {
    let g = flights();
    let out = solve(&g, &flight_defs(), &barcelona_to_la(), &SolveOptions::default()).unwrap();
    let got: Vec<_> = out
        .answers
        .iter()
        .map(|a| {
            let p: Vec<_> = a.paths["p"].edges.iter().map(|e| g.edge_name(*e)).collect();
            (names(&g, &a.bindings), p.join(" "))
        })
        .collect();
    assert_eq!(got.len(), 1, "{got:?}");
    let b = &got[0].0;
    assert_eq!(b["x1"], "n6");
    assert_eq!(b["x2"], "n5");
    assert_eq!(b["x3"], "n1");
    assert_eq!(b["y"], "e1");
    assert_eq!(got[0].1, "e6 e7");
    let rep = &out.answers[0].reports["p"];
    assert_eq!(rep.values["cost"], Value::Int(950));
    assert_eq!(rep.values["length"], Value::Int(2));
}

#[test]
fn two_hop_query_answers() {
    let g = flights();
    let out = solve(&g, &flight_defs(), &two_hops(), &SolveOptions::default()).unwrap();
    let got: Vec<_> = out
        .answers
        .iter()
        .map(|a| a.paths["p1"].edges.iter().map(|e| g.edge_name(*e)).collect::<Vec<_>>().join(" "))
        .collect();
    assert_eq!(got, vec!["e6 e7"]);
    assert!(!out.depth_capped);
}
