//! Generator determinism and nesting, configuration errors, the CSV layout
//! and the relation between variants on small instances.

use std::collections::BTreeSet;
use std::time::Duration;

use pathprop::graph_json::graph_to_json;
use pathprop::{ElementId, Value};
use pathprop_bench::generate::{DEPARTURE, DURATION, PRICE};
use pathprop_bench::{
    generate_graphs, query_pairs, run_bench, run_cell, BenchConfig, BenchError, Cell, Variant,
    CSV_HEADER, VARIANTS,
};

fn cfg(nodes: usize, edges: &[usize]) -> BenchConfig {
    BenchConfig { nodes, edges: edges.to_vec(), ..BenchConfig::default() }
}

fn edge_set(g: &pathprop::PropertyGraph) -> BTreeSet<String> {
    g.edges()
        .map(|e| {
            let p = g.properties(ElementId::Edge(e));
            format!("{} {} {} {:?}", g.edge_name(e), g.node_name(g.src(e)), g.node_name(g.tgt(e)), p)
        })
        .collect()
}

#[test]
fn instances_are_nested() {
    for seed in [1, 42, 7777] {
        let c = BenchConfig { seed, ..cfg(100, &[200, 500]) };
        let gs = generate_graphs(&c).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0].name, "e200");
        assert_eq!(gs[1].graph.edge_count(), 500);
        assert!(edge_set(&gs[0].graph).is_subset(&edge_set(&gs[1].graph)), "seed {seed}");
    }
}

#[test]
fn generation_is_deterministic() {
    let a = generate_graphs(&cfg(30, &[50, 80])).unwrap();
    let b = generate_graphs(&cfg(30, &[50, 80])).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(graph_to_json(&x.graph), graph_to_json(&y.graph));
    }
    assert_eq!(query_pairs(&cfg(30, &[50])), query_pairs(&cfg(30, &[50])));
    let other = BenchConfig { seed: 43, ..cfg(30, &[50, 80]) };
    assert_ne!(graph_to_json(&a[1].graph), graph_to_json(&generate_graphs(&other).unwrap()[1].graph));
}

#[test]
fn generated_values_lie_in_their_ranges() {
    let g = &generate_graphs(&cfg(20, &[300])).unwrap()[0].graph;
    let mut pairs = BTreeSet::new();
    for e in g.edges() {
        let (s, t) = (g.src(e), g.tgt(e));
        assert_ne!(s, t);
        assert!(pairs.insert((s, t)), "duplicate flight");
        let p = g.properties(ElementId::Edge(e));
        let Value::Int(price) = p["price"] else { panic!() };
        let (Value::Time(dep), Value::Time(arr)) = (&p["dep"], &p["arr"]) else { panic!() };
        assert!((PRICE.0..=PRICE.1).contains(&price));
        assert!((DEPARTURE.0..DEPARTURE.1).contains(dep));
        assert!((DURATION.0..=DURATION.1).contains(&(arr - dep)));
    }
    for n in g.nodes() {
        assert!(g.node_labels(n).contains("Airport"));
    }
}

#[test]
fn edgeless_and_full_instances() {
    let g = generate_graphs(&cfg(5, &[0, 20])).unwrap();
    assert_eq!(g[0].graph.edge_count(), 0);
    assert_eq!(g[0].graph.node_count(), 5);
    assert_eq!(g[1].graph.edge_count(), 20);
    assert!(matches!(
        generate_graphs(&cfg(5, &[21])),
        Err(BenchError::TooManyEdges { capacity: 20, .. })
    ));
}

#[test]
fn edge_counts_must_increase() {
    assert!(matches!(cfg(10, &[20, 10]).validate(), Err(BenchError::EdgesNotIncreasing(_))));
    assert!(matches!(cfg(10, &[20, 20]).validate(), Err(BenchError::EdgesNotIncreasing(_))));
}

#[test]
fn zero_queries_give_a_header_only_report() {
    let c = BenchConfig { queries: 0, ..cfg(10, &[20]) };
    let r = run_bench(&c, &mut |_, _| {}).unwrap();
    assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n"));
}

#[test]
fn csv_layout() {
    let c = BenchConfig {
        queries: 2,
        variants: vec![Variant::by_name("none").unwrap(), Variant::by_name("L<3").unwrap()],
        timeout: Duration::from_millis(1),
        ..cfg(100, &[200, 1000])
    };
    let r = run_bench(&c, &mut |_, _| {}).unwrap();
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert!(csv.ends_with('\n'));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    let mut any_timeout = false;
    for line in rows {
        let f: Vec<_> = line.split(',').collect();
        assert_eq!(f.len(), 6, "{line}");
        assert!(["none", "L<3"].contains(&f[0]));
        assert!(["e200", "e1000"].contains(&f[1]));
        f[2].parse::<usize>().unwrap();
        match f[5] {
            "true" => {
                any_timeout = true;
                assert_eq!((f[3], f[4]), ("*", "*"));
            }
            "false" => {
                f[3].parse::<usize>().unwrap();
                let (whole, frac) = f[4].split_once('.').unwrap();
                whole.parse::<u64>().unwrap();
                assert_eq!(frac.len(), 6);
            }
            other => panic!("timed_out field {other}"),
        }
    }
    assert!(any_timeout, "a 1 ms timeout should cut the unconstrained search");
}

#[test]
fn bounded_variants_are_ordered() {
    let c = cfg(25, &[60]);
    let g = &generate_graphs(&c).unwrap()[0].graph;
    let t = Duration::from_secs(60);
    for (from, to) in query_pairs(&BenchConfig { queries: 6, ..c }) {
        let count = |name| run_cell(g, &Variant::by_name(name).unwrap(), from, to, t).results().unwrap();
        let none = count("none");
        assert!(count("gap>120") <= none);
        let l3 = count("L<3");
        let l5 = count("L<5");
        let l10 = count("L<10");
        assert!(l3 <= l5 && l5 <= l10 && l10 <= none);
        assert!(count("L<3&C<10000") <= l3);
        assert!(count("L<5&C<10000") <= l5);
        assert!(count("L<10&C<10000") <= l10);
    }
}

#[test]
fn cells_report_timeouts() {
    let g = &generate_graphs(&cfg(100, &[1000])).unwrap()[0].graph;
    let pairs = query_pairs(&BenchConfig { queries: 3, ..cfg(100, &[1000]) });
    let (from, to) = pairs[2];
    let cell = run_cell(g, &VARIANTS[0], from, to, Duration::from_millis(50));
    assert!(matches!(cell, Cell::TimedOut { .. }), "{cell:?}");
}
