//! Query clauses: node, edge and path patterns with attached filters.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::constraint::{Filter, VarKind};
use crate::regex::Regex;

/// Names starting with this prefix are reserved for engine-generated variables.
pub const FRESH_PREFIX: char = '_';

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePat {
    pub var: String,
    pub labels: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgePat {
    pub var: String,
    pub labels: BTreeSet<String>,
}

impl NodePat {
    pub fn new(var: &str, labels: &[&str]) -> Self {
        NodePat {
            var: var.to_string(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl EdgePat {
    pub fn new(var: &str, labels: &[&str]) -> Self {
        EdgePat {
            var: var.to_string(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Node(NodePat),
    Edge {
        src: NodePat,
        edge: EdgePat,
        tgt: NodePat,
    },
    /// `regex == None` stands for every nonempty path.
    Path {
        src: NodePat,
        path: String,
        regex: Option<Regex>,
        tgt: NodePat,
    },
}

impl Pattern {
    /// Pattern variables with their kinds, in pattern order.
    pub fn vars(&self) -> Vec<(String, VarKind)> {
        match self {
            Pattern::Node(n) => vec![(n.var.clone(), VarKind::Node)],
            Pattern::Edge { src, edge, tgt } => vec![
                (src.var.clone(), VarKind::Node),
                (edge.var.clone(), VarKind::Edge),
                (tgt.var.clone(), VarKind::Node),
            ],
            Pattern::Path { src, path, tgt, .. } => vec![
                (src.var.clone(), VarKind::Node),
                (path.clone(), VarKind::Path),
                (tgt.var.clone(), VarKind::Node),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub pattern: Pattern,
    pub filter: Vec<Filter>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("a query needs at least one clause")]
    Empty,
    #[error("variable `{var}` used both as {first:?} and as {second:?}")]
    ConflictingKind {
        var: String,
        first: VarKind,
        second: VarKind,
    },
    #[error("variable names starting with `_` are reserved: `{0}`")]
    ReservedName(String),
    #[error("filter mentions `{0}`, which no pattern binds")]
    UnboundVariable(String),
    #[error("path variable `{0}` appears in more than one path pattern")]
    DuplicatePathVar(String),
}

impl Query {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Query { clauses }
    }

    /// Checks the query and returns the kind of every variable.
    pub fn validate(&self) -> Result<BTreeMap<String, VarKind>, QueryError> {
        if self.clauses.is_empty() {
            return Err(QueryError::Empty);
        }
        let mut kinds: BTreeMap<String, VarKind> = BTreeMap::new();
        let mut declare = |var: &str, kind: VarKind| -> Result<(), QueryError> {
            if var.starts_with(FRESH_PREFIX) {
                return Err(QueryError::ReservedName(var.to_string()));
            }
            match kinds.get(var) {
                Some(k) if *k != kind => Err(QueryError::ConflictingKind {
                    var: var.to_string(),
                    first: *k,
                    second: kind,
                }),
                Some(_) if kind == VarKind::Path => {
                    Err(QueryError::DuplicatePathVar(var.to_string()))
                }
                _ => {
                    kinds.insert(var.to_string(), kind);
                    Ok(())
                }
            }
        };
        for c in &self.clauses {
            for (v, k) in c.pattern.vars() {
                declare(&v, k)?;
            }
        }
        for c in &self.clauses {
            for f in &c.filter {
                for v in f.subject_vars() {
                    if !kinds.contains_key(&v) {
                        return Err(QueryError::UnboundVariable(v));
                    }
                }
            }
        }
        for c in &self.clauses {
            for f in &c.filter {
                for v in f.value_vars() {
                    if v.starts_with(FRESH_PREFIX) {
                        return Err(QueryError::ReservedName(v));
                    }
                    if let Some(k) = kinds.get(&v) {
                        return Err(QueryError::ConflictingKind {
                            var: v,
                            first: *k,
                            second: VarKind::Value,
                        });
                    }
                }
            }
        }
        Ok(kinds)
    }

    pub fn path_vars(&self) -> BTreeSet<String> {
        self.clauses
            .iter()
            .filter_map(|c| match &c.pattern {
                Pattern::Path { path, .. } => Some(path.clone()),
                _ => None,
            })
            .collect()
    }
}
