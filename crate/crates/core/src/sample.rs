//! Seeded generators for small graphs, definitions and queries, used to
//! compare the engine against the reference semantics.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraint::{Filter, Pred, Term};
use crate::engine::PathMode;
use crate::graph::PropertyGraph;
use crate::props::PropertyDef;
use crate::query::{Clause, EdgePat, NodePat, Pattern, Query};
use crate::regex::Regex;
use crate::syntax::parse_defs;
use crate::value::Value;

const NODE_LABELS: [&str; 2] = ["A", "B"];
const EDGE_LABELS: [&str; 3] = ["a", "b", "c"];

/// Definitions the generator picks from. All bound path length from
/// below so that length filters prune during the search.
pub const DEFS: [&str; 3] = [
    "properties length: int, cost, start on p;
     case edge: p.length == 1, p.cost == y.price, p.start == y.dep;
     case step: p.length == 1 + p'.length, p.cost == y.price + p'.cost, p.start == y.dep,
                p'.length > 0, p'.cost > 0, p'.start > y.arr;",
    "properties length: int on p;
     case edge: p.length == 1;
     case step: p.length == 1 + p'.length, p'.length > 0;",
    "properties length: int, alt, last on p;
     case edge: p.length == 1, p.alt == y.price, p.last == y.arr;
     case step: p.length == 1 + p'.length, p'.length > 0, p.alt == y.price - p'.alt,
                p.last == p'.last, 2 * y.price >= p'.alt;",
];

const REGEXES: [&str; 9] = ["a+", "(a|b)+", "a.b*", "a*.b", "(a|b|c)+", "c", "a.(b|c)+", "b+|c.a", "(a.b)+"];

/// A random, unnormalized expression over the first `symbols` edge labels.
pub fn random_regex(rng: &mut impl Rng, symbols: usize, depth: u32) -> Regex {
    let sym = |rng: &mut dyn rand::RngCore| Regex::sym(EDGE_LABELS[rng.gen_range(0..symbols)]);
    if depth == 0 || rng.gen_bool(0.3) {
        return sym(rng);
    }
    let op = rng.gen_range(0..4);
    let mut sub = || Box::new(random_regex(rng, symbols, depth - 1));
    match op {
        0 => Regex::Union(sub(), sub()),
        1 => Regex::Concat(sub(), sub()),
        2 => Regex::Star(sub()),
        _ => Regex::Plus(sub()),
    }
}


/// Every word of length `1..=max_len` over the first `symbols` edge labels.
pub fn all_words(symbols: usize, max_len: usize) -> Vec<Vec<&'static str>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<&'static str>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                EDGE_LABELS[..symbols].iter().map(move |a| {
                    let mut w = w.clone();
                    w.push(*a);
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// One randomly generated test case.
#[derive(Clone, Debug)]
pub struct Case {
    pub graph: PropertyGraph,
    pub def: PropertyDef,
    pub query: Query,
    pub mode: PathMode,
    /// Upper bound on the length of any path in an answer.
    pub bound: usize,
}

pub fn random_graph(rng: &mut impl Rng, max_nodes: usize, max_edges: usize) -> PropertyGraph {
    let n = rng.gen_range(2..=max_nodes);
    let m = rng.gen_range(1..=max_edges);
    let mut b = PropertyGraph::builder();
    for i in 0..n {
        let labels: Vec<&str> = NODE_LABELS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let props = vec![
            ("w".to_string(), Value::Int(rng.gen_range(0..6))),
            ("loc".to_string(), Value::Text(["X", "Y"].choose(rng).expect("nonempty").to_string())),
        ];
        b.add_node(&format!("n{i}"), labels, props);
    }
    for j in 0..m {
        let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let mut labels = vec![*EDGE_LABELS.choose(rng).expect("nonempty")];
        if rng.gen_bool(0.1) {
            labels.push(EDGE_LABELS.choose(rng).expect("nonempty"));
        }
        let dep = rng.gen_range(0..100);
        let props = vec![
            ("price".to_string(), Value::Int(rng.gen_range(1..20))),
            ("dep".to_string(), Value::Time(dep)),
            ("arr".to_string(), Value::Time(dep + rng.gen_range(1..30))),
        ];
        b.add_edge(&format!("e{j}"), &format!("n{s}"), &format!("n{t}"), labels, props);
    }
    b.build().expect("generated graphs are well formed")
}

fn node_pat(rng: &mut impl Rng, var: String) -> NodePat {
    let labels: BTreeSet<String> = if rng.gen_bool(0.25) {
        BTreeSet::from([NODE_LABELS.choose(rng).expect("nonempty").to_string()])
    } else {
        BTreeSet::new()
    };
    NodePat { var, labels }
}

fn node_filter(rng: &mut impl Rng, var: &str, others: &[String]) -> Filter {
    match rng.gen_range(0..3) {
        0 => Filter::atom(Term::prop(var, "loc"), Pred::Eq, Term::lit("X")),
        1 => Filter::atom(Term::prop(var, "w"), Pred::Gt, Term::int(rng.gen_range(0..4))),
        _ => match others.choose(rng) {
            Some(o) => Filter::atom(Term::prop(var, "w"), Pred::Le, Term::prop(o, "w")),
            None => Filter::atom(Term::prop(var, "w"), Pred::Ne, Term::int(2)),
        },
    }
}

/// A query of up to three clauses over shared variables. Every path clause
/// carries a length filter of at most `max_len`.
pub fn random_query(rng: &mut impl Rng, def: &PropertyDef, max_len: usize) -> (Query, usize) {
    let n_clauses = rng.gen_range(1..=3);
    let mut nodes: Vec<String> = Vec::new();
    let mut clauses = Vec::new();
    let mut bound = 0;
    let mut paths = 0;
    // Reuses an earlier variable with probability `reuse`, never `avoid`.
    let pick_node = |rng: &mut ChaCha8Rng, nodes: &mut Vec<String>, reuse: f64, avoid: Option<&str>| {
        let old: Vec<&String> = nodes.iter().filter(|v| Some(v.as_str()) != avoid).collect();
        if !old.is_empty() && rng.gen_bool(reuse) {
            old.choose(rng).map(|v| v.to_string()).expect("nonempty")
        } else {
            let v = format!("x{}", nodes.len());
            nodes.push(v.clone());
            v
        }
    };
    let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
    for i in 0..n_clauses {
        let kind = if i + 1 == n_clauses && paths == 0 { 2 } else { r.gen_range(0..3) };
        let mut filter = Vec::new();
        let pattern = match kind {
            0 => {
                let v = pick_node(&mut r, &mut nodes, 0.6, None);
                if r.gen_bool(0.5) {
                    filter.push(node_filter(&mut r, &v, &nodes));
                }
                Pattern::Node(node_pat(&mut r, v))
            }
            1 => {
                let s = pick_node(&mut r, &mut nodes, 0.7, None);
                let avoid = if r.gen_bool(0.9) { Some(s.as_str()) } else { None };
                let t = pick_node(&mut r, &mut nodes, 0.2, avoid);
                let y = format!("y{i}");
                let labels = if r.gen_bool(0.5) {
                    BTreeSet::from([EDGE_LABELS.choose(&mut r).expect("nonempty").to_string()])
                } else {
                    BTreeSet::new()
                };
                if r.gen_bool(0.4) {
                    filter.push(Filter::atom(Term::prop(&y, "price"), Pred::Lt, Term::int(r.gen_range(5..20))));
                }
                Pattern::Edge {
                    src: node_pat(&mut r, s),
                    edge: EdgePat { var: y, labels },
                    tgt: node_pat(&mut r, t),
                }
            }
            _ => {
                paths += 1;
                let s = pick_node(&mut r, &mut nodes, 0.7, None);
                let avoid = if r.gen_bool(0.9) { Some(s.as_str()) } else { None };
                let t = pick_node(&mut r, &mut nodes, 0.2, avoid);
                let p = format!("p{i}");
                let k = r.gen_range(1..=max_len);
                bound = bound.max(k);
                filter.push(Filter::atom(Term::prop(&p, "length"), Pred::Le, Term::int(k as i64)));
                if def.properties.contains("cost") && r.gen_bool(0.4) {
                    filter.push(Filter::atom(Term::prop(&p, "cost"), Pred::Lt, Term::int(r.gen_range(5..40))));
                }
                if def.properties.contains("alt") && r.gen_bool(0.4) {
                    filter.push(Filter::atom(Term::prop(&p, "alt"), Pred::Ge, Term::int(r.gen_range(-5..10))));
                }
                if r.gen_bool(0.3) {
                    filter.push(node_filter(&mut r, &t, &nodes));
                }
                let regex = if r.gen_bool(0.15) {
                    None
                } else {
                    Some(Regex::parse(REGEXES.choose(&mut r).expect("nonempty")).expect("valid"))
                };
                Pattern::Path { src: node_pat(&mut r, s), path: p, regex, tgt: node_pat(&mut r, t) }
            }
        };
        clauses.push(Clause { pattern, filter });
    }
    (Query::new(clauses), bound)
}

/// A complete case from a seed.
pub fn random_case(seed: u64, max_nodes: usize, max_edges: usize, max_len: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = random_graph(&mut rng, max_nodes, max_edges);
    let def = parse_defs(DEFS.choose(&mut rng).expect("nonempty")).expect("valid definitions");
    let (query, bound) = random_query(&mut rng, &def, max_len);
    let mode = *[PathMode::Any, PathMode::Simple, PathMode::Trail].choose(&mut rng).expect("nonempty");
    Case { graph, def, query, mode, bound }
}
