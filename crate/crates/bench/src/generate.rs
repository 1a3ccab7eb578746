//! Random airport networks. Every instance extends the previous one, so
//! the edge set of a smaller instance is a prefix of the next.

use std::collections::HashSet;

use pathprop::graph::PropertyGraph;
use pathprop::Value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::run::{BenchConfig, BenchError};

pub const PRICE: (i64, i64) = (50, 1000);
/// Departure minute, half open.
pub const DEPARTURE: (u32, u32) = (300, 1380);
/// Flight duration in minutes, inclusive.
pub const DURATION: (u32, u32) = (60, 600);

/// Stream of the seeded generator used for query endpoints.
const QUERY_STREAM: u64 = 1;

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub graph: PropertyGraph,
}

pub fn instance_name(edges: usize) -> String {
    format!("e{edges}")
}

pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

pub fn city(i: usize) -> String {
    format!("City_{i}")
}

struct Flight {
    src: usize,
    tgt: usize,
    price: i64,
    dep: u32,
    arr: u32,
}

fn flights(rng: &mut ChaCha8Rng, nodes: usize, count: usize) -> Vec<Flight> {
    let mut used = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let src = rng.gen_range(0..nodes);
        let tgt = rng.gen_range(0..nodes);
        if src == tgt || !used.insert((src, tgt)) {
            continue;
        }
        let dep = rng.gen_range(DEPARTURE.0..DEPARTURE.1);
        out.push(Flight {
            src,
            tgt,
            price: rng.gen_range(PRICE.0..=PRICE.1),
            dep,
            arr: dep + rng.gen_range(DURATION.0..=DURATION.1),
        });
    }
    out
}

fn build(nodes: usize, flights: &[Flight]) -> PropertyGraph {
    let mut b = PropertyGraph::builder();
    for i in 0..nodes {
        b.add_node(&node_name(i), ["Airport"], [("loc".to_string(), Value::Text(city(i)))]);
    }
    for (i, f) in flights.iter().enumerate() {
        b.add_edge(
            &format!("e{i}"),
            &node_name(f.src),
            &node_name(f.tgt),
            ["Flight"],
            [
                ("price".to_string(), Value::Int(f.price)),
                ("dep".to_string(), Value::Time(f.dep)),
                ("arr".to_string(), Value::Time(f.arr)),
            ],
        );
    }
    b.build().expect("generated graphs are well formed")
}

/// One graph per entry of `cfg.edges`, all over the same nodes.
pub fn generate_graphs(cfg: &BenchConfig) -> Result<Vec<Instance>, BenchError> {
    cfg.validate()?;
    let max = cfg.edges.last().copied().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all = flights(&mut rng, cfg.nodes, max);
    Ok(cfg
        .edges
        .iter()
        .map(|&n| Instance {
            name: instance_name(n),
            graph: build(cfg.nodes, &all[..n]),
        })
        .collect())
}

/// Distinct origin and destination airports for each query.
pub fn query_pairs(cfg: &BenchConfig) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(QUERY_STREAM);
    if cfg.nodes < 2 {
        return Vec::new();
    }
    (0..cfg.queries)
        .map(|_| {
            let a = rng.gen_range(0..cfg.nodes);
            let b = (a + rng.gen_range(1..cfg.nodes)) % cfg.nodes;
            (a, b)
        })
        .collect()
}
