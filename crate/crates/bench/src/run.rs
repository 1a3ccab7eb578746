//! Running every variant on every instance for every query.

use std::ops::ControlFlow;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use pathprop::engine::{Engine, PathMode, SolveOptions};
use pathprop::graph::PropertyGraph;
use thiserror::Error;

use crate::generate::{generate_graphs, query_pairs};
use crate::report::{Report, Row, ERROR_MARK, TIMEOUT_MARK};
use crate::variant::{Variant, VARIANTS};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("edge counts must be strictly increasing: {0:?}")]
    EdgesNotIncreasing(Vec<usize>),
    #[error("{edges} edges exceed the {capacity} possible flights between {nodes} airports")]
    TooManyEdges { nodes: usize, edges: usize, capacity: usize },
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub nodes: usize,
    /// Edge counts of the nested instances.
    pub edges: Vec<usize>,
    pub seed: u64,
    pub queries: usize,
    pub variants: Vec<Variant>,
    pub timeout: Duration,
    pub out: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            nodes: 100,
            edges: vec![200, 500, 1000, 5000],
            seed: 42,
            queries: 10,
            variants: VARIANTS.to_vec(),
            timeout: Duration::from_secs(60),
            out: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::EdgesNotIncreasing(self.edges.clone()));
        }
        let capacity = self.nodes * self.nodes.saturating_sub(1);
        if let Some(&edges) = self.edges.last() {
            if edges > capacity {
                return Err(BenchError::TooManyEdges { nodes: self.nodes, edges, capacity });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Done { results: usize, seconds: f64 },
    /// Answers found before the timeout.
    TimedOut { partial: usize },
    Failed(String),
}

impl Cell {
    pub fn results(&self) -> Option<usize> {
        match self {
            Cell::Done { results, .. } => Some(*results),
            _ => None,
        }
    }

    pub fn seconds(&self) -> Option<f64> {
        match self {
            Cell::Done { seconds, .. } => Some(*seconds),
            _ => None,
        }
    }
}

/// Counts the simple-path answers of one variant between two airports.
pub fn run_cell(g: &PropertyGraph, v: &Variant, from: usize, to: usize, timeout: Duration) -> Cell {
    let def = v.def();
    let query = v.query(from, to);
    let engine = match Engine::new(g, &def) {
        Ok(e) => e,
        Err(e) => return Cell::Failed(e.to_string()),
    };
    let opts = SolveOptions {
        mode: PathMode::Simple,
        timeout: Some(timeout),
        depth_cap: usize::MAX,
        ..SolveOptions::default()
    };
    let mut count = 0;
    let start = Instant::now();
    let out = engine.solve_with(&query, &opts, &mut |_| {
        count += 1;
        ControlFlow::Continue(())
    });
    let seconds = start.elapsed().as_secs_f64();
    match out {
        Err(e) => Cell::Failed(e.to_string()),
        Ok(o) if o.timed_out => Cell::TimedOut { partial: count },
        Ok(_) => Cell::Done { results: count, seconds },
    }
}

fn row(v: &Variant, instance: &str, query_id: usize, cell: &Cell) -> Row {
    let (results, seconds, timed_out) = match cell {
        Cell::Done { results, seconds } => (results.to_string(), format!("{seconds:.6}"), false),
        Cell::TimedOut { .. } => (TIMEOUT_MARK.to_string(), TIMEOUT_MARK.to_string(), true),
        Cell::Failed(_) => (ERROR_MARK.to_string(), String::new(), false),
    };
    Row {
        variant: v.name.to_string(),
        instance: instance.to_string(),
        query_id,
        results,
        seconds,
        timed_out,
    }
}

/// Runs all cells, query by query, and writes the CSV when an output path
/// is configured. `progress` sees each cell as it completes.
pub fn run_bench(
    cfg: &BenchConfig,
    progress: &mut dyn FnMut(&Row, &Cell),
) -> Result<Report, BenchError> {
    let instances = generate_graphs(cfg)?;
    let mut report = Report::default();
    for (q, &(from, to)) in query_pairs(cfg).iter().enumerate() {
        for v in &cfg.variants {
            for inst in &instances {
                let cell = run_cell(&inst.graph, v, from, to, cfg.timeout);
                let r = row(v, &inst.name, q, &cell);
                progress(&r, &cell);
                report.rows.push(r);
            }
        }
    }
    if let Some(path) = &cfg.out {
        std::fs::write(path, report.to_csv())?;
    }
    Ok(report)
}
