//! Single rule applications on the flights fixture.

use std::collections::BTreeMap;

use pathprop::constraint::{Filter, Pred, Subject, Term};
use pathprop::engine::{Match, PathTriple};
use pathprop::fixtures::{barcelona_to_la, flight_defs, flights, two_hops};
use pathprop::props::Unfolding;
use pathprop::syntax::parse_query;
use pathprop::engine::EngineState;
use pathprop::{ElementId, Engine, EngineError, PropertyGraph, Query};

fn q(text: &str) -> Query {
    parse_query(text).expect("query parses").query
}

fn node(g: &PropertyGraph, n: &str) -> ElementId {
    ElementId::Node(g.node(n).unwrap())
}

fn edge(g: &PropertyGraph, e: &str) -> ElementId {
    ElementId::Edge(g.edge(e).unwrap())
}

fn step_of(engine: &Engine, s: &EngineState, i: usize) -> Unfolding {
    engine.unfoldings(s, i).unwrap().into_iter().find(Unfolding::is_step).unwrap()
}

fn edge_of(engine: &Engine, s: &EngineState, i: usize) -> Unfolding {
    engine.unfoldings(s, i).unwrap().into_iter().find(|u| !u.is_step()).unwrap()
}

/// Binds the source, edge and third variable of an unfolding.
fn unfolding_match(g: &PropertyGraph, u: &Unfolding, src: &str, e: &str, third: &str) -> Match {
    let third_var = match u {
        Unfolding::Edge { tgt, .. } => tgt.var.clone(),
        Unfolding::Step { mid, .. } => mid.clone(),
    };
    BTreeMap::from([
        (u.src().var.clone(), node(g, src)),
        (u.edge_var().to_string(), edge(g, e)),
        (third_var, node(g, third)),
    ])
}

fn rest_var(u: &Unfolding) -> String {
    match u {
        Unfolding::Step { rest, .. } => rest.clone(),
        Unfolding::Edge { .. } => panic!("edge unfolding has no continuation"),
    }
}

fn path_clause(s: &EngineState) -> usize {
    s.remaining
        .iter()
        .position(|c| matches!(c.pattern, pathprop::Pattern::Path { .. }))
        .unwrap()
}

#[test]
fn initial_state_keeps_clauses_and_dedups() {
    let g = flights();
    let def = flight_defs();
    let engine = Engine::new(&g, &def).unwrap();
    let s = engine.initial_state(&barcelona_to_la()).unwrap();
    assert_eq!(s.remaining.len(), 3);
    assert!(s.bindings.is_empty() && s.paths.is_empty());

    let one = engine.initial_state(&q("match (x:Airport)")).unwrap();
    assert_eq!(one.remaining.len(), 1);

    let dup = engine
        .initial_state(&q("match (x:Airport) where x.loc == \"Paris\"\nmatch (x:Airport) where x.loc == \"Paris\""))
        .unwrap();
    assert_eq!(dup.remaining.len(), 1);

    assert!(engine.initial_state(&Query::new(vec![])).is_err());
}

#[test]
fn rule_r_on_node_and_edge_clauses() {
    let g = flights();
    let def = flight_defs();
    let engine = Engine::new(&g, &def).unwrap();
    let s = engine.initial_state(&barcelona_to_la()).unwrap();

    let at = |n: &str| BTreeMap::from([("x1".to_string(), node(&g, n))]);
    let ok = engine.apply_r(&s, 0, &at("n6")).unwrap().expect("n6 is a Barcelona station");
    assert_eq!(ok.remaining.len(), 2);
    assert_eq!(ok.bindings["x1"], node(&g, "n6"));
    assert!(engine.apply_r(&s, 0, &at("n1")).unwrap().is_none());

    let m = BTreeMap::from([
        ("x1".to_string(), node(&g, "n6")),
        ("y".to_string(), edge(&g, "e1")),
        ("x2".to_string(), node(&g, "n5")),
    ]);
    let after = engine.apply_r(&ok, 0, &m).unwrap().expect("e1 links n6 to n5");
    assert_eq!(after.bindings.len(), 3);

    assert!(matches!(engine.apply_r(&s, 7, &at("n6")), Err(EngineError::NoClause(7))));
    assert!(matches!(engine.apply_r(&s, 2, &at("n6")), Err(EngineError::WrongRule(_))));
}

#[test]
fn single_edge_unfolding_closes_the_path() {
    let g = flights();
    let def = flight_defs();
    let engine = Engine::new(&g, &def).unwrap();
    let s = engine.initial_state(&q("match (x) =[p:byTrain+]=> (x')")).unwrap();
    let u = edge_of(&engine, &s, 0);
    let m = unfolding_match(&g, &u, "n6", "e1", "n5");
    let s1 = engine.apply_u1(&s, 0, &u, &m).unwrap().expect("e1 is a byTrain edge");
    let e1 = g.edge("e1").unwrap();
    assert_eq!(s1.paths, BTreeMap::from([("p".to_string(), PathTriple { edges: vec![e1], cont: None })]));
    assert!(s1.remaining.is_empty());
    assert!(matches!(engine.apply_u2(&s, 0, &u, &m), Err(EngineError::WrongRule(_))));
}

#[test]
fn no_direct_flight_to_los_angeles() {
    let g = flights();
    let def = flight_defs();
    let engine = Engine::new(&g, &def).unwrap();
    let s = engine.initial_state(&two_hops()).unwrap();
    let u = edge_of(&engine, &s, 0);
    for (e, tgt) in [("e5", "n3"), ("e6", "n4")] {
        let m = unfolding_match(&g, &u, "n5", e, tgt);
        assert!(engine.apply_u1(&s, 0, &u, &m).unwrap().is_none(), "{e}");
    }
}

#[test]
fn step_unfoldings_follow_the_worked_derivation() {
    let g = flights();
    let def = flight_defs();
    let engine = Engine::new(&g, &def).unwrap();
    let s0 = engine.initial_state(&two_hops()).unwrap();
    let u = step_of(&engine, &s0, 0);
    let p2 = rest_var(&u);

    // First step through e5.
    let s1 = engine
        .apply_u2(&s0, 0, &u, &unfolding_match(&g, &u, "n5", "e5", "n3"))
        .unwrap()
        .expect("first step through e5 is consistent");
    let e5 = g.edge("e5").unwrap();
    assert_eq!(
        s1.paths,
        BTreeMap::from([("p1".to_string(), PathTriple { edges: vec![e5], cont: Some(p2.clone()) })])
    );
    let start = Term::Prop(Subject::Var(p2.clone()), "start".into());
    let early = Filter::atom(start.clone(), Pred::Le, Term::int(780));
    assert!(!s1.psi.add(&early).unwrap().is_consistent());
    let late = Filter::atom(start.clone(), Pred::Eq, Term::int(781));
    assert!(s1.psi.add(&late).unwrap().is_consistent());
    let clash = Filter::atom(start, Pred::Eq, Term::int(720));
    assert!(!s1.psi.add(&clash).unwrap().is_consistent());

    // Continuing through e3 departs too early.
    let i = path_clause(&s1);
    let v = step_of(&engine, &s1, i);
    let m = unfolding_match(&g, &v, "n3", "e3", "n2");
    assert!(engine.apply_u2(&s1, i, &v, &m).unwrap().is_none());

    // The alternative through e6 and e7 succeeds and closes the path.
    let s1b = engine
        .apply_u2(&s0, 0, &u, &unfolding_match(&g, &u, "n5", "e6", "n4"))
        .unwrap()
        .expect("first step through e6 is consistent");
    let i = path_clause(&s1b);
    let w = edge_of(&engine, &s1b, i);
    let s2 = engine
        .apply_u1(&s1b, i, &w, &unfolding_match(&g, &w, "n4", "e7", "n1"))
        .unwrap()
        .expect("e7 reaches Los Angeles");
    let (e6, e7) = (g.edge("e6").unwrap(), g.edge("e7").unwrap());
    assert_eq!(s2.paths["p1"], PathTriple { edges: vec![e6, e7], cont: None });
    let ans = engine.check_final(&s2).expect("final state is total");
    assert_eq!(ans.bindings["x2"], node(&g, "n1"));
}

#[test]
fn foreign_unfoldings_and_bad_matches_are_errors() {
    let g = flights();
    let def = flight_defs();
    let engine = Engine::new(&g, &def).unwrap();
    let s = engine.initial_state(&two_hops()).unwrap();
    let other = engine.initial_state(&q("match (a) =[r:byTrain+]=> (b)")).unwrap();
    let foreign = edge_of(&engine, &other, 0);
    let m = unfolding_match(&g, &foreign, "n6", "e1", "n5");
    assert!(matches!(engine.apply_u1(&s, 0, &foreign, &m), Err(EngineError::ForeignUnfolding)));
    let u = edge_of(&engine, &s, 0);
    let partial = BTreeMap::from([("x1".to_string(), node(&g, "n5"))]);
    assert!(matches!(engine.apply_u1(&s, 0, &u, &partial), Err(EngineError::BadMatch { .. })));
}
