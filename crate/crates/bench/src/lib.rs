//! Benchmark harness: nested random flight networks, the eight query
//! variants, per-cell timing with a timeout, and the CSV report.

pub mod generate;
pub mod report;
pub mod run;
pub mod variant;

pub use generate::{generate_graphs, query_pairs, Instance};
pub use report::{Report, Row, CSV_HEADER};
pub use run::{run_bench, run_cell, BenchConfig, BenchError, Cell};
pub use variant::{Variant, VARIANTS};
