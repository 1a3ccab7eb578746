//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use pathprop::engine::{Engine, SolveOptions, SolveOutcome};
use pathprop::graph_json::{load_graph, value_to_json};
use pathprop::syntax::{parse_defs, parse_query, QueryDocument};
use pathprop::{PropertyDef, PropertyGraph};
use pathprop_bench::{run_bench, BenchConfig, Variant, VARIANTS};
use rdpa::{check_translation, Rdpa};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::{BenchArgs, QueryArgs, RdpaCheckArgs, ValidateArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    File { path: PathBuf, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn is_usage(&self) -> bool {
        matches!(self, CliError::Usage(_))
    }
}

pub enum Status {
    Done,
    Truncated,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        match s {
            Status::Done => ExitCode::SUCCESS,
            Status::Truncated => ExitCode::from(2),
        }
    }
}

fn file_error(path: &Path, msg: impl ToString) -> CliError {
    CliError::File { path: path.to_path_buf(), msg: msg.to_string() }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| file_error(path, e))
}

fn graph(path: &Path) -> Result<PropertyGraph, CliError> {
    load_graph(path).map_err(|e| file_error(path, e))
}

fn defs(path: &Path) -> Result<PropertyDef, CliError> {
    let def = parse_defs(&read(path)?).map_err(|e| file_error(path, e))?;
    def.validate().map_err(|e| file_error(path, e))?;
    Ok(def)
}

fn query_doc(path: &Path) -> Result<QueryDocument, CliError> {
    let doc = parse_query(&read(path)?).map_err(|e| file_error(path, e))?;
    doc.query.validate().map_err(|e| file_error(path, e))?;
    Ok(doc)
}

/// The definition named by `--defs`, else the one the query file names
/// (relative to the query file), else none.
fn defs_for(explicit: Option<&Path>, query: &Path, doc: &QueryDocument) -> Result<PropertyDef, CliError> {
    if let Some(p) = explicit {
        return defs(p);
    }
    match &doc.defs {
        Some(name) => defs(&query.parent().unwrap_or(Path::new(".")).join(name)),
        None => Ok(PropertyDef::empty()),
    }
}

fn automaton(path: &Path) -> Result<Rdpa, CliError> {
    let j: Json = serde_json::from_str(&read(path)?).map_err(|e| file_error(path, e))?;
    let a = Rdpa::from_json(&j).map_err(|e| file_error(path, e))?;
    a.validate().map_err(|e| file_error(path, e))?;
    Ok(a)
}

/// JSON rendering of a solve outcome, element ids replaced by names.
pub fn outcome_json(g: &PropertyGraph, out: &SolveOutcome) -> Json {
    let answers: Vec<Json> = out
        .answers
        .iter()
        .map(|a| {
            let bindings: BTreeMap<_, _> =
                a.bindings.iter().map(|(k, id)| (k.clone(), g.element_name(*id).to_string())).collect();
            let paths: BTreeMap<_, _> = a
                .paths
                .iter()
                .map(|(k, p)| {
                    let rep = &a.reports[k];
                    let values: BTreeMap<_, _> =
                        rep.values.iter().map(|(n, v)| (n.clone(), value_to_json(v))).collect();
                    let residual: Vec<_> = rep.residual.iter().map(|f| f.render(Some(g))).collect();
                    let p = json!({
                        "source": g.node_name(p.source),
                        "target": g.node_name(p.target),
                        "edges": p.edges.iter().map(|e| g.edge_name(*e)).collect::<Vec<_>>(),
                        "values": values,
                        "residual": residual,
                    });
                    (k.clone(), p)
                })
                .collect();
            json!({ "bindings": bindings, "paths": paths })
        })
        .collect();
    json!({
        "answers": answers,
        "count": out.answers.len(),
        "timed_out": out.timed_out,
        "limit_reached": out.limit_reached,
        "depth_capped": out.depth_capped,
    })
}

fn table(g: &PropertyGraph, out: &SolveOutcome) -> String {
    let mut s = String::new();
    for a in &out.answers {
        let mut cols: Vec<String> =
            a.bindings.iter().map(|(k, id)| format!("{k}={}", g.element_name(*id))).collect();
        for (k, p) in &a.paths {
            let edges: Vec<_> = p.edges.iter().map(|e| g.edge_name(*e)).collect();
            let values: Vec<_> = a.reports[k].values.iter().map(|(n, v)| format!("{n}={v}")).collect();
            cols.push(format!("{k}={} {{{}}}", edges.join("·"), values.join(", ")));
        }
        s.push_str(&cols.join("  "));
        s.push('\n');
    }
    s.push_str(&format!("{} answer(s)", out.answers.len()));
    if out.timed_out {
        s.push_str(", timed out");
    }
    if out.depth_capped {
        s.push_str(", depth cap reached");
    }
    s.push('\n');
    s
}

fn seconds(s: f64, what: &str) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("{what}: invalid duration {s}")))
}

pub fn query(a: &QueryArgs) -> Result<Status, CliError> {
    let g = graph(&a.graph)?;
    let doc = query_doc(&a.query)?;
    let def = defs_for(a.defs.as_deref(), &a.query, &doc)?;
    let opts = SolveOptions {
        mode: a.mode,
        limit: a.limit,
        depth_cap: a.depth_cap,
        timeout: a.timeout.map(|t| seconds(t, "--timeout")).transpose()?,
        record_derivations: false,
    };
    let engine = Engine::new(&g, &def).map_err(|e| CliError::Failed(e.to_string()))?;
    let out = engine.solve(&doc.query, &opts).map_err(|e| CliError::Failed(e.to_string()))?;
    if a.format == "table" {
        print!("{}", table(&g, &out));
    } else {
        println!("{}", serde_json::to_string_pretty(&outcome_json(&g, &out)).expect("json"));
    }
    Ok(if out.timed_out { Status::Truncated } else { Status::Done })
}

pub fn bench(a: &BenchArgs) -> Result<Status, CliError> {
    let variants = if a.variants.is_empty() {
        VARIANTS.to_vec()
    } else {
        a.variants
            .iter()
            .map(|n| {
                Variant::by_name(n).ok_or_else(|| {
                    let known: Vec<_> = VARIANTS.iter().map(|v| v.name).collect();
                    CliError::Usage(format!("unknown variant `{n}` (known: {})", known.join(" ")))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let cfg = BenchConfig {
        nodes: a.nodes,
        edges: a.edges.clone(),
        seed: a.seed,
        queries: a.queries,
        variants,
        timeout: seconds(a.timeout, "--timeout")?,
        out: a.out.clone(),
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = run_bench(&cfg, &mut |r, _| {
        eprintln!("{} {} q{}: {} results, {} s", r.variant, r.instance, r.query_id, r.results, r.seconds)
    })
    .map_err(|e| CliError::Failed(e.to_string()))?;
    if cfg.out.is_none() {
        print!("{}", report.to_csv());
    }
    Ok(Status::Done)
}

pub fn rdpa_check(a: &RdpaCheckArgs) -> Result<Status, CliError> {
    let aut = automaton(&a.automaton)?;
    let mut alphabet: Vec<String> = if a.alphabet.is_empty() {
        aut.alphabet().into_iter().collect()
    } else {
        a.alphabet.clone()
    };
    if alphabet.is_empty() {
        alphabet.push("a".to_string());
    }
    let alphabet: Vec<&str> = alphabet.iter().map(String::as_str).collect();
    let data: Vec<u64> = (0..a.data).collect();
    match check_translation(&aut, &alphabet, &data, a.max_len) {
        Ok(n) => {
            println!("agree on {n} data paths up to {} positions", a.max_len);
            Ok(Status::Done)
        }
        Err(d) => Err(CliError::Failed(format!(
            "disagreement on {}: automaton {}, translation {}",
            d.path,
            if d.accepted { "accepts" } else { "rejects" },
            if d.recognized { "recognizes" } else { "does not recognize" },
        ))),
    }
}

pub fn validate(a: &ValidateArgs) -> Result<Status, CliError> {
    let mut checked = 0;
    if let Some(p) = &a.graph {
        let g = graph(p)?;
        println!("{}: graph with {} nodes, {} edges", p.display(), g.node_count(), g.edge_count());
        checked += 1;
    }
    if let Some(p) = &a.defs {
        let d = defs(p)?;
        println!(
            "{}: {} properties, {} edge and {} step constraints",
            p.display(),
            d.properties.len(),
            d.edge_case.len(),
            d.step_case.len()
        );
        checked += 1;
    }
    if let Some(p) = &a.query {
        let doc = query_doc(p)?;
        if a.defs.is_none() && doc.defs.is_some() {
            defs_for(None, p, &doc)?;
        }
        println!("{}: query with {} clauses", p.display(), doc.query.clauses.len());
        checked += 1;
    }
    if let Some(p) = &a.automaton {
        let aut = automaton(p)?;
        println!("{}: automaton with {} states", p.display(), aut.states.len());
        checked += 1;
    }
    if checked == 0 {
        return Err(CliError::Usage("validate needs at least one of --graph, --defs, --query, --automaton".into()));
    }
    Ok(Status::Done)
}
