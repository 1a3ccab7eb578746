//! `pathprop`: evaluate queries, validate input files, run the benchmark
//! and check automaton translations.
//!
//! Exit codes: 0 on success, 1 on invalid input or usage, 2 when a query
//! stopped at its timeout and the answers are incomplete.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pathprop::engine::PathMode;
use pathprop::syntax::GRAMMAR;

#[derive(Parser)]
#[command(name = "pathprop", version, about = "Regular path queries with path properties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query over a graph.
    Query(QueryArgs),
    /// Time the query variants on generated flight networks.
    Bench(BenchArgs),
    /// Register automaton tools.
    Rdpa {
        #[command(subcommand)]
        command: RdpaCommand,
    },
    /// Parse and check graph, definition, query or automaton files.
    Validate(ValidateArgs),
}

#[derive(Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Definition file; defaults to the one named in the query file.
    #[arg(long)]
    pub defs: Option<PathBuf>,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long, default_value = "any", value_parser = parse_mode)]
    pub mode: PathMode,
    #[arg(long)]
    pub limit: Option<usize>,
    /// Seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub depth_cap: usize,
    #[arg(long, default_value = "json", value_parser = ["json", "table"])]
    pub format: String,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub nodes: usize,
    /// Strictly increasing edge counts of the nested instances.
    #[arg(long, value_delimiter = ',', default_value = "200,500,1000,5000")]
    pub edges: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub queries: usize,
    /// Seconds per cell.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    /// Variant names; all eight by default.
    #[arg(long, value_delimiter = ',')]
    pub variants: Vec<String>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum RdpaCommand {
    /// Compare acceptance with recognition by the translated definition on
    /// every data path up to a length.
    Check(RdpaCheckArgs),
}

#[derive(Args)]
pub struct RdpaCheckArgs {
    #[arg(long)]
    pub automaton: PathBuf,
    /// Longest data path, counted in positions.
    #[arg(long, default_value_t = 7)]
    pub max_len: usize,
    /// Data values range over 0..data.
    #[arg(long, default_value_t = 4)]
    pub data: u64,
    /// Word symbols; defaults to those on the automaton's transitions.
    #[arg(long, value_delimiter = ',')]
    pub alphabet: Vec<String>,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub defs: Option<PathBuf>,
    #[arg(long)]
    pub query: Option<PathBuf>,
    #[arg(long)]
    pub automaton: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<PathMode, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{GRAMMAR}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Query(a) => commands::query(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Rdpa { command: RdpaCommand::Check(a) } => commands::rdpa_check(&a),
        Command::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                eprintln!("\n{GRAMMAR}");
            }
            ExitCode::from(1)
        }
    }
}
