//! Path property definitions, pattern unfoldings and the constraint sets
//! attached to unfoldings and to concrete paths.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::constraint::{
    apply_substitution, Binding, ConstraintStore, Filter, Key, Subject, Substitution,
};
use crate::graph::{GraphError, GraphPath, PropertyGraph};
use crate::query::{EdgePat, NodePat, FRESH_PREFIX};
use crate::regex::{decompose, is_universal_plus, Regex, RegexError};

/// Reserved variable names available inside a definition's cases.
pub const SRC: &str = "x";
pub const TGT: &str = "x'";
pub const MID: &str = "x''";
pub const EDGE: &str = "y";

/// `(PP, p, {edge case, step case}, Δ)`: each case lists the constraints
/// attached to the single-edge unfolding `x -y-> x'` and to the step
/// unfolding `x -y-> x'' =p'=> x'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyDef {
    pub properties: BTreeSet<String>,
    /// Properties whose values range over the integers.
    pub integer_properties: BTreeSet<String>,
    pub path_var: String,
    pub edge_case: Vec<Filter>,
    pub step_case: Vec<Filter>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropError {
    #[error("unknown reserved variable `{0}`")]
    UnknownVariable(String),
    #[error("reserved variable `{0}` used as a value")]
    BareVariable(String),
    #[error("property `{0}` is not declared")]
    UndeclaredProperty(String),
    #[error("path is not valid in the graph")]
    InvalidPath,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl Default for PropertyDef {
    fn default() -> Self {
        PropertyDef::empty()
    }
}

impl PropertyDef {
    /// A definition with no properties and no constraints.
    pub fn empty() -> Self {
        PropertyDef {
            properties: BTreeSet::new(),
            integer_properties: BTreeSet::new(),
            path_var: "p".to_string(),
            edge_case: Vec::new(),
            step_case: Vec::new(),
        }
    }

    pub fn rest_var(&self) -> String {
        format!("{}'", self.path_var)
    }

    pub fn reserved(&self) -> BTreeSet<String> {
        [SRC, TGT, MID, EDGE]
            .iter()
            .map(|s| s.to_string())
            .chain([self.path_var.clone(), self.rest_var()])
            .collect()
    }

    /// Checks the closed variable namespace and the declared property set.
    pub fn validate(&self) -> Result<(), PropError> {
        let reserved = self.reserved();
        let paths = [self.path_var.clone(), self.rest_var()];
        for f in self.edge_case.iter().chain(&self.step_case) {
            for v in f.subject_vars() {
                if !reserved.contains(&v) {
                    return Err(PropError::UnknownVariable(v));
                }
            }
            if let Some(v) = f.value_vars().into_iter().next() {
                return Err(if reserved.contains(&v) {
                    PropError::BareVariable(v)
                } else {
                    PropError::UnknownVariable(v)
                });
            }
            for (v, k) in f.var_props() {
                if paths.contains(&v) && !self.properties.contains(&k) {
                    return Err(PropError::UndeclaredProperty(k));
                }
            }
        }
        Ok(())
    }

    /// An empty store whose integer sorts follow this definition.
    pub fn store(&self) -> ConstraintStore {
        ConstraintStore::with_integer_props(self.integer_properties.iter().cloned())
    }
}

/// One unfolding of a path pattern `src =path:α=> tgt`.
///
/// `label == None` is the untyped edge of the simplified unfoldings; it
/// matches any edge carrying at least one label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Unfolding {
    Edge {
        src: NodePat,
        edge: String,
        label: Option<String>,
        tgt: NodePat,
    },
    Step {
        src: NodePat,
        edge: String,
        label: Option<String>,
        mid: String,
        rest: String,
        regex: Option<Regex>,
        tgt: NodePat,
    },
}

impl Unfolding {
    pub fn is_step(&self) -> bool {
        matches!(self, Unfolding::Step { .. })
    }

    pub fn edge_var(&self) -> &str {
        match self {
            Unfolding::Edge { edge, .. } | Unfolding::Step { edge, .. } => edge,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Unfolding::Edge { label, .. } | Unfolding::Step { label, .. } => label.as_deref(),
        }
    }

    pub fn src(&self) -> &NodePat {
        match self {
            Unfolding::Edge { src, .. } | Unfolding::Step { src, .. } => src,
        }
    }

    pub fn tgt(&self) -> &NodePat {
        match self {
            Unfolding::Edge { tgt, .. } | Unfolding::Step { tgt, .. } => tgt,
        }
    }

    /// The edge pattern of the unfolding, as written in a query.
    pub fn edge_pat(&self) -> EdgePat {
        EdgePat {
            var: self.edge_var().to_string(),
            labels: self.label().into_iter().map(str::to_string).collect(),
        }
    }
}

/// Names of the fresh variables introduced by one unfolding step.
pub fn fresh_names(tag: u32) -> (String, String, String) {
    (
        format!("{FRESH_PREFIX}y{tag}"),
        format!("{FRESH_PREFIX}x{tag}"),
        format!("{FRESH_PREFIX}p{tag}"),
    )
}

/// Single-edge unfoldings first (sorted by symbol), then step unfoldings.
pub fn unfold_pattern(
    src: &NodePat,
    regex: Option<&Regex>,
    tgt: &NodePat,
    alphabet: &BTreeSet<String>,
    tag: u32,
) -> Result<Vec<Unfolding>, RegexError> {
    let (y, x, p) = fresh_names(tag);
    let universal = match regex {
        None => true,
        Some(r) => {
            if !r.productive() {
                return Err(RegexError::Uninhabited);
            }
            is_universal_plus(r, alphabet)
        }
    };
    if universal {
        return Ok(vec![
            Unfolding::Edge {
                src: src.clone(),
                edge: y.clone(),
                label: None,
                tgt: tgt.clone(),
            },
            Unfolding::Step {
                src: src.clone(),
                edge: y,
                label: None,
                mid: x,
                rest: p,
                regex: None,
                tgt: tgt.clone(),
            },
        ]);
    }
    let d = decompose(regex.expect("non-universal has a regex"), alphabet)?;
    let mut out = Vec::new();
    for a in &d.s0 {
        out.push(Unfolding::Edge {
            src: src.clone(),
            edge: y.clone(),
            label: Some(a.clone()),
            tgt: tgt.clone(),
        });
    }
    for a in &d.s1 {
        out.push(Unfolding::Step {
            src: src.clone(),
            edge: y.clone(),
            label: Some(a.clone()),
            mid: x.clone(),
            rest: p.clone(),
            regex: Some(d.rem[a].clone()),
            tgt: tgt.clone(),
        });
    }
    Ok(out)
}

/// The definition's constraints for `u`, renamed onto the unfolding's variables.
pub fn constr_pu(path_var: &str, u: &Unfolding, def: &PropertyDef) -> Vec<Filter> {
    let mut s = Substitution::new()
        .with(SRC, Binding::Var(u.src().var.clone()))
        .with(TGT, Binding::Var(u.tgt().var.clone()))
        .with(EDGE, Binding::Var(u.edge_var().to_string()))
        .with(&def.path_var, Binding::Var(path_var.to_string()));
    let cases = match u {
        Unfolding::Edge { .. } => &def.edge_case,
        Unfolding::Step { mid, rest, .. } => {
            s.bind(MID, Binding::Var(mid.clone()));
            s.bind(&def.rest_var(), Binding::Var(rest.clone()));
            &def.step_case
        }
    };
    cases
        .iter()
        .map(|f| apply_substitution(f, &s).expect("renaming is kind-agnostic"))
        .collect()
}

/// Key naming a concrete path inside constraints.
pub fn path_subject(g: &PropertyGraph, p: &GraphPath) -> Subject {
    Subject::Path(p.key(g))
}

pub fn path_key(g: &PropertyGraph, p: &GraphPath, prop: &str) -> Key {
    Key::Prop(path_subject(g, p), prop.to_string())
}

/// Grounded step-case constraints contributed by edge `i` of `path`
/// (`i < len - 1`), or the edge case for the last edge.
pub fn head_constraints(
    def: &PropertyDef,
    g: &PropertyGraph,
    path: &GraphPath,
    i: usize,
) -> Result<Vec<Filter>, PropError> {
    let k = path.len();
    if i >= k {
        return Err(PropError::InvalidPath);
    }
    let e = path.edges[i];
    let here = path.suffix(g, i).expect("in range");
    let mut s = Substitution::new()
        .with(SRC, Binding::Node(g.src(e)))
        .with(TGT, Binding::Node(path.target))
        .with(EDGE, Binding::Edge(e))
        .with(&def.path_var, Binding::Path(here.key(g)));
    let cases = if i + 1 == k {
        &def.edge_case
    } else {
        let rest = path.suffix(g, i + 1).expect("in range");
        s.bind(MID, Binding::Node(g.tgt(e)));
        s.bind(&def.rest_var(), Binding::Path(rest.key(g)));
        &def.step_case
    };
    Ok(cases
        .iter()
        .map(|f| apply_substitution(f, &s).expect("kind-agnostic").ground(g))
        .collect())
}

/// Constraints associated with a concrete path: the step case for every edge
/// but the last, and the edge case for the last one.
pub fn constr_path(
    def: &PropertyDef,
    g: &PropertyGraph,
    path: &GraphPath,
) -> Result<Vec<Filter>, PropError> {
    if !g.validate_path(path)? {
        return Err(PropError::InvalidPath);
    }
    let mut out = Vec::new();
    for i in 0..path.len() {
        out.extend(head_constraints(def, g, path, i)?);
    }
    Ok(out)
}

/// The store of `constr_path`.
pub fn path_store(
    def: &PropertyDef,
    g: &PropertyGraph,
    path: &GraphPath,
) -> Result<ConstraintStore, PropError> {
    let cs = constr_path(def, g, path)?;
    Ok(def.store().add_all(&cs).expect("fresh store is consistent"))
}
