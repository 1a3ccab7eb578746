//! Backtracking evaluation: engine states, the clause rule and the two
//! unfolding rules, and the depth-first search that enumerates computed
//! answers.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::constraint::{ConstraintStore, Filter, Key, Subject, Term, VarKind};
use crate::graph::{EdgeId, ElementId, GraphPath, NodeId, PropertyGraph};
use crate::props::{constr_pu, unfold_pattern, PropError, PropertyDef, Unfolding};
use crate::query::{Clause, NodePat, Pattern, Query, QueryError, FRESH_PREFIX};
use crate::regex::{Regex, RegexError};
use crate::value::Value;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PathMode {
    #[default]
    Any,
    /// No repeated nodes.
    Simple,
    /// No repeated edges.
    Trail,
}

impl FromStr for PathMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(PathMode::Any),
            "simple" => Ok(PathMode::Simple),
            "trail" => Ok(PathMode::Trail),
            other => Err(format!(
                "unknown path mode `{other}` (expected any, simple or trail)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub mode: PathMode,
    pub limit: Option<usize>,
    /// Longest path explored in `any` mode.
    pub depth_cap: usize,
    pub timeout: Option<Duration>,
    /// Keep the rule applications that led to each answer.
    pub record_derivations: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: PathMode::Any,
            limit: None,
            depth_cap: 64,
            timeout: None,
            record_derivations: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Regex(#[from] RegexError),
    #[error(transparent)]
    Def(#[from] PropError),
    #[error("no remaining clause at index {0}")]
    NoClause(usize),
    #[error("rule does not apply to this clause: {0}")]
    WrongRule(&'static str),
    #[error("unfolding is not one of the clause's unfoldings")]
    ForeignUnfolding,
    #[error("match must bind exactly {expected:?}")]
    BadMatch { expected: Vec<String> },
    #[error("step {0} of the derivation does not apply")]
    ReplayRejected(usize),
}

/// Element assignment produced by one rule application.
pub type Match = BTreeMap<String, ElementId>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Clause,
    EdgeUnfold,
    StepUnfold,
}

/// One rule application, enough to replay a derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub clause: usize,
    pub rule: Rule,
    pub unfolding: Option<Unfolding>,
    pub m: Match,
}

/// A clause still to be solved. Continuations of partially unfolded path
/// clauses remember the original path variable in `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveClause {
    pub pattern: Pattern,
    pub filter: Arc<Vec<Filter>>,
    pub origin: usize,
    pub root: Option<String>,
    pub filter_added: bool,
}

/// Edges matched so far for a path variable and, while open, the variable
/// naming the rest of the path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathTriple {
    pub edges: Vec<EdgeId>,
    pub cont: Option<String>,
}

#[derive(Clone, Debug)]
pub struct EngineState {
    pub remaining: Vec<ActiveClause>,
    pub psi: ConstraintStore,
    pub bindings: BTreeMap<String, ElementId>,
    pub paths: BTreeMap<String, PathTriple>,
    /// Constraints waiting for a node or edge variable to be bound.
    pub pending: Vec<Filter>,
    pub fresh: u32,
    /// Number of unfolding constraints added per original path variable.
    pub unfolding_constraints: BTreeMap<String, usize>,
    kinds: Arc<BTreeMap<String, VarKind>>,
    sources: Arc<BTreeMap<String, String>>,
}

impl EngineState {
    pub fn kinds(&self) -> &BTreeMap<String, VarKind> {
        &self.kinds
    }

    fn is_path_var(&self, v: &str) -> bool {
        match self.kinds.get(v) {
            Some(k) => *k == VarKind::Path,
            None => v.starts_with(FRESH_PREFIX) && v[1..].starts_with('p'),
        }
    }
}

/// What the store and the bindings say about one query path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathReport {
    pub values: BTreeMap<String, Value>,
    pub residual: Vec<Filter>,
}

#[derive(Clone, Debug)]
pub struct Answer {
    pub bindings: BTreeMap<String, ElementId>,
    pub paths: BTreeMap<String, GraphPath>,
    pub reports: BTreeMap<String, PathReport>,
    pub psi: ConstraintStore,
    pub derivation: Option<Vec<Step>>,
}

/// Identity of an answer: the general match restricted to query variables.
pub type AnswerKey = (BTreeMap<String, ElementId>, BTreeMap<String, Vec<EdgeId>>);

impl Answer {
    pub fn key(&self) -> AnswerKey {
        (
            self.bindings.clone(),
            self.paths
                .iter()
                .map(|(k, p)| (k.clone(), p.edges.clone()))
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Successful rule applications.
    pub explored: u64,
    /// Rule applications attempted.
    pub attempted: u64,
    /// Attempts rejected because the store became inconsistent.
    pub inconsistent: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOutcome {
    pub answers: Vec<Answer>,
    pub timed_out: bool,
    pub limit_reached: bool,
    /// Some branch was cut by the depth cap, so answers may be missing.
    pub depth_capped: bool,
    pub stats: SolveStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reject {
    Mismatch,
    Mode,
    DepthCap,
    Inconsistent,
}

type Applied = Result<EngineState, Reject>;

pub struct Engine<'a> {
    graph: &'a PropertyGraph,
    def: &'a PropertyDef,
    alphabet: BTreeSet<String>,
    mode: PathMode,
    depth_cap: usize,
    unfold_cache: Mutex<HashMap<Option<Regex>, Arc<Vec<Unfolding>>>>,
}

impl<'a> Engine<'a> {
    pub fn new(graph: &'a PropertyGraph, def: &'a PropertyDef) -> Result<Self, EngineError> {
        def.validate()?;
        Ok(Engine {
            graph,
            def,
            alphabet: graph.edge_alphabet(),
            mode: PathMode::Any,
            depth_cap: SolveOptions::default().depth_cap,
            unfold_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Path discipline used by the rule functions.
    pub fn with_mode(mut self, mode: PathMode, depth_cap: usize) -> Self {
        self.mode = mode;
        self.depth_cap = depth_cap;
        self
    }

    pub fn graph(&self) -> &PropertyGraph {
        self.graph
    }

    pub fn def(&self) -> &PropertyDef {
        self.def
    }

    pub fn initial_state(&self, q: &Query) -> Result<EngineState, EngineError> {
        let kinds = q.validate()?;
        let mut sources = BTreeMap::new();
        for c in &q.clauses {
            if let Pattern::Path {
                src, path, regex, ..
            } = &c.pattern
            {
                sources.insert(path.clone(), src.var.clone());
                if let Some(r) = regex {
                    if !r.productive() {
                        return Err(RegexError::Uninhabited.into());
                    }
                }
            }
        }
        Ok(EngineState {
            remaining: q
                .clauses
                .iter()
                .enumerate()
                .filter(|(i, c)| !q.clauses[..*i].contains(c))
                .map(|(i, c)| ActiveClause {
                    pattern: c.pattern.clone(),
                    filter: Arc::new(c.filter.clone()),
                    origin: i,
                    root: None,
                    filter_added: false,
                })
                .collect(),
            psi: self.def.store(),
            bindings: BTreeMap::new(),
            paths: BTreeMap::new(),
            pending: Vec::new(),
            fresh: 0,
            unfolding_constraints: BTreeMap::new(),
            kinds: Arc::new(kinds),
            sources: Arc::new(sources),
        })
    }

    /// Unfoldings of the path clause at `i`, single-edge forms first.
    pub fn unfoldings(&self, s: &EngineState, i: usize) -> Result<Vec<Unfolding>, EngineError> {
        let c = s.remaining.get(i).ok_or(EngineError::NoClause(i))?;
        let Pattern::Path {
            src, regex, tgt, ..
        } = &c.pattern
        else {
            return Err(EngineError::WrongRule("not a path clause"));
        };
        let template = self.unfold_template(regex.as_ref())?;
        let (y, x, p) = crate::props::fresh_names(s.fresh);
        Ok(template
            .iter()
            .map(|u| match u {
                Unfolding::Edge { label, .. } => Unfolding::Edge {
                    src: src.clone(),
                    edge: y.clone(),
                    label: label.clone(),
                    tgt: tgt.clone(),
                },
                Unfolding::Step { label, regex, .. } => Unfolding::Step {
                    src: src.clone(),
                    edge: y.clone(),
                    label: label.clone(),
                    mid: x.clone(),
                    rest: p.clone(),
                    regex: regex.clone(),
                    tgt: tgt.clone(),
                },
            })
            .collect())
    }

    fn unfold_template(&self, regex: Option<&Regex>) -> Result<Arc<Vec<Unfolding>>, EngineError> {
        let key = regex.cloned();
        if let Some(t) = self.unfold_cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(t));
        }
        let blank = NodePat {
            var: String::new(),
            labels: BTreeSet::new(),
        };
        let t = Arc::new(unfold_pattern(&blank, regex, &blank, &self.alphabet, 0)?);
        self.unfold_cache
            .lock()
            .expect("cache lock")
            .insert(key, Arc::clone(&t));
        Ok(t)
    }

    /// Rule for node and edge clauses.
    pub fn apply_r(
        &self,
        s: &EngineState,
        i: usize,
        m: &Match,
    ) -> Result<Option<EngineState>, EngineError> {
        let c = s.remaining.get(i).ok_or(EngineError::NoClause(i))?;
        let expected: Vec<String> = match &c.pattern {
            Pattern::Path { .. } => return Err(EngineError::WrongRule("path clauses unfold")),
            p => p.vars().into_iter().map(|v| v.0).collect(),
        };
        check_domain(m, &expected)?;
        Ok(self.try_r(s, i, m).ok())
    }

    /// Rule for the single-edge unfolding of a path clause.
    pub fn apply_u1(
        &self,
        s: &EngineState,
        i: usize,
        u: &Unfolding,
        m: &Match,
    ) -> Result<Option<EngineState>, EngineError> {
        if u.is_step() {
            return Err(EngineError::WrongRule(
                "step unfolding given to the edge rule",
            ));
        }
        self.check_unfolding(s, i, u, m)?;
        Ok(self.try_unfold(s, i, u, m).ok())
    }

    /// Rule for the step unfolding of a path clause.
    pub fn apply_u2(
        &self,
        s: &EngineState,
        i: usize,
        u: &Unfolding,
        m: &Match,
    ) -> Result<Option<EngineState>, EngineError> {
        if !u.is_step() {
            return Err(EngineError::WrongRule(
                "edge unfolding given to the step rule",
            ));
        }
        self.check_unfolding(s, i, u, m)?;
        Ok(self.try_unfold(s, i, u, m).ok())
    }

    fn check_unfolding(
        &self,
        s: &EngineState,
        i: usize,
        u: &Unfolding,
        m: &Match,
    ) -> Result<(), EngineError> {
        if !self.unfoldings(s, i)?.contains(u) {
            return Err(EngineError::ForeignUnfolding);
        }
        let third = match u {
            Unfolding::Edge { tgt, .. } => tgt.var.clone(),
            Unfolding::Step { mid, .. } => mid.clone(),
        };
        let mut expected = vec![u.src().var.clone(), u.edge_var().to_string(), third];
        expected.sort();
        expected.dedup();
        check_domain(m, &expected)
    }

    fn node_ok(&self, pat: &NodePat, id: Option<&ElementId>) -> Option<NodeId> {
        match id {
            Some(ElementId::Node(n)) if pat.labels.is_subset(self.graph.node_labels(*n)) => {
                Some(*n)
            }
            _ => None,
        }
    }

    fn edge_of(id: Option<&ElementId>) -> Option<EdgeId> {
        match id {
            Some(ElementId::Edge(e)) => Some(*e),
            _ => None,
        }
    }

    fn compatible(s: &EngineState, m: &Match) -> bool {
        m.iter()
            .all(|(v, id)| s.bindings.get(v).is_none_or(|b| b == id))
    }

    fn try_r(&self, s: &EngineState, i: usize, m: &Match) -> Applied {
        let c = &s.remaining[i];
        match &c.pattern {
            Pattern::Node(n) => {
                self.node_ok(n, m.get(&n.var)).ok_or(Reject::Mismatch)?;
            }
            Pattern::Edge { src, edge, tgt } => {
                let a = self.node_ok(src, m.get(&src.var)).ok_or(Reject::Mismatch)?;
                let b = self.node_ok(tgt, m.get(&tgt.var)).ok_or(Reject::Mismatch)?;
                let e = Self::edge_of(m.get(&edge.var)).ok_or(Reject::Mismatch)?;
                if self.graph.src(e) != a
                    || self.graph.tgt(e) != b
                    || !edge.labels.is_subset(self.graph.edge_labels(e))
                {
                    return Err(Reject::Mismatch);
                }
            }
            Pattern::Path { .. } => return Err(Reject::Mismatch),
        }
        if !Self::compatible(s, m) {
            return Err(Reject::Mismatch);
        }
        let mut next = s.clone();
        let c = next.remaining.remove(i);
        next.bindings.extend(m.iter().map(|(k, v)| (k.clone(), *v)));
        if !self.flush_pending(&mut next) {
            return Err(Reject::Inconsistent);
        }
        if !c.filter_added && !self.add_constraints(&mut next, c.filter.iter().cloned()) {
            return Err(Reject::Inconsistent);
        }
        Ok(next)
    }

    fn edge_label_ok(&self, label: Option<&str>, e: EdgeId) -> bool {
        let labels = self.graph.edge_labels(e);
        match label {
            Some(a) => labels.contains(a),
            None => labels.iter().any(|l| self.alphabet.contains(l)),
        }
    }

    fn try_unfold(&self, s: &EngineState, i: usize, u: &Unfolding, m: &Match) -> Applied {
        let c = &s.remaining[i];
        let Pattern::Path { path, .. } = &c.pattern else {
            return Err(Reject::Mismatch);
        };
        let a = self
            .node_ok(u.src(), m.get(&u.src().var))
            .ok_or(Reject::Mismatch)?;
        let e = Self::edge_of(m.get(u.edge_var())).ok_or(Reject::Mismatch)?;
        if self.graph.src(e) != a || !self.edge_label_ok(u.label(), e) {
            return Err(Reject::Mismatch);
        }
        let b = match u {
            Unfolding::Edge { tgt, .. } => self.node_ok(tgt, m.get(&tgt.var)),
            Unfolding::Step { mid, .. } => match m.get(mid) {
                Some(ElementId::Node(n)) => Some(*n),
                _ => None,
            },
        }
        .ok_or(Reject::Mismatch)?;
        if self.graph.tgt(e) != b || !Self::compatible(s, m) {
            return Err(Reject::Mismatch);
        }

        let root = c.root.clone().unwrap_or_else(|| path.clone());
        let prefix: &[EdgeId] = s
            .paths
            .get(&root)
            .map(|t| t.edges.as_slice())
            .unwrap_or(&[]);
        match self.mode {
            PathMode::Any => {
                let needed = prefix.len() + if u.is_step() { 2 } else { 1 };
                if needed > self.depth_cap {
                    return Err(Reject::DepthCap);
                }
            }
            PathMode::Trail => {
                if prefix.contains(&e) {
                    return Err(Reject::Mode);
                }
            }
            PathMode::Simple => {
                let start = match prefix.first() {
                    Some(f) => self.graph.src(*f),
                    None => a,
                };
                let next = self.graph.tgt(e);
                if next == start || prefix.iter().any(|p| self.graph.tgt(*p) == next) {
                    return Err(Reject::Mode);
                }
                if let Unfolding::Step { tgt, .. } = u {
                    if s.bindings.get(&tgt.var) == Some(&ElementId::Node(next)) {
                        return Err(Reject::Mode);
                    }
                }
            }
        }

        let mut next = s.clone();
        let mut edges = prefix.to_vec();
        edges.push(e);
        next.bindings.extend(m.iter().map(|(k, v)| (k.clone(), *v)));
        next.fresh += 1;
        let c = if u.is_step() {
            next.remaining[i].clone()
        } else {
            next.remaining.remove(i)
        };
        if !self.flush_pending(&mut next) {
            return Err(Reject::Inconsistent);
        }
        if !c.filter_added && !self.add_constraints(&mut next, c.filter.iter().cloned()) {
            return Err(Reject::Inconsistent);
        }
        let pu = constr_pu(path, u, self.def);
        *next.unfolding_constraints.entry(root.clone()).or_default() += pu.len();
        if !self.add_constraints(&mut next, pu.into_iter()) {
            return Err(Reject::Inconsistent);
        }
        match u {
            Unfolding::Edge { .. } => {
                next.paths.insert(root, PathTriple { edges, cont: None });
            }
            Unfolding::Step {
                mid,
                rest,
                regex,
                tgt,
                ..
            } => {
                next.paths.insert(
                    root.clone(),
                    PathTriple {
                        edges,
                        cont: Some(rest.clone()),
                    },
                );
                next.remaining[i] = ActiveClause {
                    pattern: Pattern::Path {
                        src: NodePat {
                            var: mid.clone(),
                            labels: BTreeSet::new(),
                        },
                        path: rest.clone(),
                        regex: regex.clone(),
                        tgt: tgt.clone(),
                    },
                    filter: c.filter,
                    origin: c.origin,
                    root: Some(root),
                    filter_added: true,
                };
            }
        }
        Ok(next)
    }

    /// Replaces bound node and edge variables and reads stored properties.
    fn bind_filter(&self, s: &EngineState, f: &Filter) -> (Filter, bool) {
        let bound = f
            .map_terms(&mut |t| {
                Ok(match t {
                    Term::Prop(Subject::Var(v), k) => match s.bindings.get(v) {
                        Some(ElementId::Node(n)) => Some(Term::Prop(Subject::Node(*n), k.clone())),
                        Some(ElementId::Edge(e)) => Some(Term::Prop(Subject::Edge(*e), k.clone())),
                        None => None,
                    },
                    _ => None,
                })
            })
            .expect("binding cannot fail")
            .ground(self.graph);
        let waiting = bound.subject_vars().iter().any(|v| !s.is_path_var(v));
        (bound, waiting)
    }

    fn add_constraints(&self, s: &mut EngineState, fs: impl Iterator<Item = Filter>) -> bool {
        for f in fs {
            let (b, waiting) = self.bind_filter(s, &f);
            if waiting {
                s.pending.push(b);
            } else if !s.psi.add_in_place(&b) {
                return false;
            }
        }
        true
    }

    fn flush_pending(&self, s: &mut EngineState) -> bool {
        if s.pending.is_empty() {
            return true;
        }
        let pending = std::mem::take(&mut s.pending);
        self.add_constraints(s, pending.into_iter())
    }

    /// Index of the clause to solve next: most bound pattern variables,
    /// earliest position on ties.
    pub fn select(&self, s: &EngineState) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (i, c) in s.remaining.iter().enumerate() {
            let score = c
                .pattern
                .vars()
                .iter()
                .filter(|(v, k)| *k != VarKind::Path && s.bindings.contains_key(v))
                .count();
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        best.map(|b| b.0)
    }

    fn bound_node(s: &EngineState, var: &str) -> Option<NodeId> {
        match s.bindings.get(var) {
            Some(ElementId::Node(n)) => Some(*n),
            _ => None,
        }
    }

    fn candidate_nodes(&self, s: &EngineState, pat: &NodePat) -> Vec<NodeId> {
        if let Some(n) = Self::bound_node(s, &pat.var) {
            return vec![n];
        }
        match pat.labels.iter().next() {
            Some(l) => self
                .graph
                .elements_by_label(l)
                .into_iter()
                .filter_map(|id| match id {
                    ElementId::Node(n) if pat.labels.is_subset(self.graph.node_labels(n)) => {
                        Some(n)
                    }
                    _ => None,
                })
                .collect(),
            None => self.graph.nodes().collect(),
        }
    }

    fn out_candidates(&self, s: &EngineState, src: &NodePat) -> Vec<EdgeId> {
        if let Some(n) = Self::bound_node(s, &src.var) {
            return self.graph.out_slice(n).to_vec();
        }
        let mut v: Vec<EdgeId> = self
            .candidate_nodes(s, src)
            .into_iter()
            .flat_map(|n| self.graph.out_slice(n).iter().copied())
            .collect();
        v.sort();
        v
    }

    /// Every successor of `s` reachable by one rule application on clause
    /// `i`, in canonical order, with the step that produced it.
    fn successors(
        &self,
        s: &EngineState,
        i: usize,
        stats: &mut SolveStats,
        capped: &mut bool,
        f: &mut dyn FnMut(EngineState, Step, &mut SolveStats, &mut bool) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>, EngineError> {
        let c = &s.remaining[i];
        let tally = |r: &Applied, stats: &mut SolveStats, capped: &mut bool| {
            stats.attempted += 1;
            match r {
                Ok(_) => stats.explored += 1,
                Err(Reject::Inconsistent) => stats.inconsistent += 1,
                Err(Reject::DepthCap) => *capped = true,
                Err(_) => {}
            }
        };
        match &c.pattern {
            Pattern::Node(n) => {
                for id in self.candidate_nodes(s, n) {
                    let m = Match::from([(n.var.clone(), ElementId::Node(id))]);
                    let r = self.try_r(s, i, &m);
                    tally(&r, stats, capped);
                    if let Ok(next) = r {
                        let step = Step {
                            clause: i,
                            rule: Rule::Clause,
                            unfolding: None,
                            m,
                        };
                        if f(next, step, stats, capped).is_break() {
                            return Ok(ControlFlow::Break(()));
                        }
                    }
                }
            }
            Pattern::Edge { src, edge, tgt } => {
                let cands: Vec<EdgeId> = match s.bindings.get(&edge.var) {
                    Some(ElementId::Edge(e)) => vec![*e],
                    Some(_) => vec![],
                    None => match (Self::bound_node(s, &src.var), Self::bound_node(s, &tgt.var)) {
                        (Some(a), _) => self.graph.out_slice(a).to_vec(),
                        (None, Some(b)) => self.graph.in_edges(b).expect("node").to_vec(),
                        (None, None) => self.graph.edges().collect(),
                    },
                };
                for e in cands {
                    let m = Match::from([
                        (src.var.clone(), ElementId::Node(self.graph.src(e))),
                        (edge.var.clone(), ElementId::Edge(e)),
                        (tgt.var.clone(), ElementId::Node(self.graph.tgt(e))),
                    ]);
                    if m.len() < 3 && src.var == tgt.var && self.graph.src(e) != self.graph.tgt(e) {
                        continue;
                    }
                    let r = self.try_r(s, i, &m);
                    tally(&r, stats, capped);
                    if let Ok(next) = r {
                        let step = Step {
                            clause: i,
                            rule: Rule::Clause,
                            unfolding: None,
                            m,
                        };
                        if f(next, step, stats, capped).is_break() {
                            return Ok(ControlFlow::Break(()));
                        }
                    }
                }
            }
            Pattern::Path { src, .. } => {
                let unfoldings = self.unfoldings(s, i)?;
                let cands = self.out_candidates(s, src);
                for u in &unfoldings {
                    for &e in &cands {
                        if !self.edge_label_ok(u.label(), e) {
                            continue;
                        }
                        let (a, b) = (self.graph.src(e), self.graph.tgt(e));
                        let third = match u {
                            Unfolding::Edge { tgt, .. } => tgt.var.clone(),
                            Unfolding::Step { mid, .. } => mid.clone(),
                        };
                        if third == u.src().var && a != b {
                            continue;
                        }
                        let m = Match::from([
                            (u.src().var.clone(), ElementId::Node(a)),
                            (u.edge_var().to_string(), ElementId::Edge(e)),
                            (third, ElementId::Node(b)),
                        ]);
                        let r = self.try_unfold(s, i, u, &m);
                        tally(&r, stats, capped);
                        if let Ok(next) = r {
                            let rule = if u.is_step() {
                                Rule::StepUnfold
                            } else {
                                Rule::EdgeUnfold
                            };
                            let step = Step {
                                clause: i,
                                rule,
                                unfolding: Some(u.clone()),
                                m,
                            };
                            if f(next, step, stats, capped).is_break() {
                                return Ok(ControlFlow::Break(()));
                            }
                        }
                    }
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    /// Reads the computed answer off a final state.
    pub fn answer(&self, s: &EngineState) -> Option<Answer> {
        if !s.remaining.is_empty() || !s.psi.is_consistent() {
            return None;
        }
        let mut bindings = BTreeMap::new();
        let mut paths = BTreeMap::new();
        for (v, k) in s.kinds.iter() {
            match k {
                VarKind::Node | VarKind::Edge => {
                    bindings.insert(v.clone(), *s.bindings.get(v)?);
                }
                VarKind::Path => {
                    let t = s.paths.get(v)?;
                    if t.cont.is_some() {
                        return None;
                    }
                    let src = Self::bound_node(s, s.sources.get(v)?)?;
                    let p = GraphPath::from_edges(self.graph, t.edges.clone())?;
                    if p.source != src {
                        return None;
                    }
                    paths.insert(v.clone(), p);
                }
                VarKind::Value => {}
            }
        }
        let residual = s.psi.residual();
        let reports = paths
            .keys()
            .map(|p| {
                let values = self
                    .def
                    .properties
                    .iter()
                    .filter_map(|pr| {
                        s.psi
                            .entailed_value(&Key::prop(p, pr))
                            .map(|v| (pr.clone(), v))
                    })
                    .collect();
                let residual = residual
                    .iter()
                    .filter(|f| {
                        f.keys()
                            .iter()
                            .any(|k| matches!(k, Key::Prop(Subject::Var(v), _) if v == p))
                    })
                    .cloned()
                    .collect();
                (p.clone(), PathReport { values, residual })
            })
            .collect();
        Some(Answer {
            bindings,
            paths,
            reports,
            psi: s.psi.clone(),
            derivation: None,
        })
    }

    pub fn solve(&self, q: &Query, opts: &SolveOptions) -> Result<SolveOutcome, EngineError> {
        let mut answers = Vec::new();
        let mut out = self.solve_with(q, opts, &mut |a| {
            answers.push(a.clone());
            ControlFlow::Continue(())
        })?;
        out.answers = answers;
        Ok(out)
    }

    /// Streams answers to `sink` as they are found. The returned outcome
    /// carries the flags and statistics but no answers.
    pub fn solve_with(
        &self,
        q: &Query,
        opts: &SolveOptions,
        sink: &mut dyn FnMut(&Answer) -> ControlFlow<()>,
    ) -> Result<SolveOutcome, EngineError> {
        let engine = Engine {
            graph: self.graph,
            def: self.def,
            alphabet: self.alphabet.clone(),
            mode: opts.mode,
            depth_cap: opts.depth_cap,
            unfold_cache: Mutex::new(HashMap::new()),
        };
        let init = engine.initial_state(q)?;
        let mut ctx = Search {
            opts,
            start: Instant::now(),
            seen: HashSet::new(),
            emitted: 0,
            out: SolveOutcome::default(),
            trail: Vec::new(),
            sink,
        };
        let _ = engine.search(init, &mut ctx)?;
        Ok(ctx.out)
    }

    fn search(&self, s: EngineState, ctx: &mut Search<'_>) -> Result<ControlFlow<()>, EngineError> {
        if let Some(limit) = ctx.opts.timeout {
            if ctx.out.stats.attempted.is_multiple_of(64) && ctx.start.elapsed() > limit {
                ctx.out.timed_out = true;
                return Ok(ControlFlow::Break(()));
            }
        }
        let Some(i) = self.select(&s) else {
            if let Some(mut a) = self.answer(&s) {
                if ctx.seen.insert(a.key()) {
                    if ctx.opts.record_derivations {
                        a.derivation = Some(ctx.trail.clone());
                    }
                    ctx.emitted += 1;
                    if (ctx.sink)(&a).is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                    if ctx.opts.limit.is_some_and(|l| ctx.emitted >= l) {
                        ctx.out.limit_reached = true;
                        return Ok(ControlFlow::Break(()));
                    }
                }
            }
            return Ok(ControlFlow::Continue(()));
        };
        let mut err = None;
        let mut stats = ctx.out.stats;
        let mut capped = ctx.out.depth_capped;
        let flow = self.successors(
            &s,
            i,
            &mut stats,
            &mut capped,
            &mut |next, step, stats, capped| {
                ctx.out.stats = *stats;
                ctx.out.depth_capped = *capped;
                if ctx.opts.record_derivations {
                    ctx.trail.push(step);
                }
                let r = self.search(next, ctx);
                if ctx.opts.record_derivations {
                    ctx.trail.pop();
                }
                *stats = ctx.out.stats;
                *capped = ctx.out.depth_capped;
                match r {
                    Ok(flow) => flow,
                    Err(e) => {
                        err = Some(e);
                        ControlFlow::Break(())
                    }
                }
            },
        )?;
        ctx.out.stats = stats;
        ctx.out.depth_capped = capped;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(flow)
    }
}

/// A broken state invariant found while walking a derivation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct InvariantViolation(pub String);

fn violation(msg: impl Into<String>) -> Result<(), InvariantViolation> {
    Err(InvariantViolation(msg.into()))
}

impl Engine<'_> {
    /// Re-applies recorded steps from the initial state, returning every
    /// state of the derivation.
    pub fn replay(&self, q: &Query, steps: &[Step]) -> Result<Vec<EngineState>, EngineError> {
        let mut states = vec![self.initial_state(q)?];
        for (k, st) in steps.iter().enumerate() {
            let s = states.last().expect("nonempty");
            let next = match st.rule {
                Rule::Clause => self.apply_r(s, st.clause, &st.m)?,
                Rule::EdgeUnfold | Rule::StepUnfold => {
                    let u = st.unfolding.as_ref().ok_or(EngineError::ReplayRejected(k))?;
                    if st.rule == Rule::EdgeUnfold {
                        self.apply_u1(s, st.clause, u, &st.m)?
                    } else {
                        self.apply_u2(s, st.clause, u, &st.m)?
                    }
                }
            };
            states.push(next.ok_or(EngineError::ReplayRejected(k))?);
        }
        Ok(states)
    }

    /// Consistency of a single state and its relation to its predecessor:
    /// the store is not refuted, bindings only grow, path sequences only
    /// extend, closed sequences never change, and stored values entailed
    /// earlier stay entailed.
    pub fn check_step(
        &self,
        prev: Option<&EngineState>,
        s: &EngineState,
    ) -> Result<(), InvariantViolation> {
        if !s.psi.is_consistent() {
            return violation("store is inconsistent");
        }
        for (root, t) in &s.paths {
            for w in t.edges.windows(2) {
                if self.graph.tgt(w[0]) != self.graph.src(w[1]) {
                    return violation(format!("edges of `{root}` do not chain"));
                }
            }
            let Some(first) = t.edges.first() else {
                return violation(format!("`{root}` has an empty sequence"));
            };
            if let Some(src) = s.sources.get(root) {
                if s.bindings.get(src) != Some(&ElementId::Node(self.graph.src(*first))) {
                    return violation(format!("`{root}` does not start at its source"));
                }
            }
        }
        let Some(prev) = prev else { return Ok(()) };
        for (v, id) in &prev.bindings {
            if s.bindings.get(v) != Some(id) {
                return violation(format!("binding of `{v}` changed or vanished"));
            }
        }
        for (root, t) in &prev.paths {
            let Some(now) = s.paths.get(root) else {
                return violation(format!("path triple of `{root}` vanished"));
            };
            if !now.edges.starts_with(&t.edges) {
                return violation(format!("sequence of `{root}` is not extended by prefix"));
            }
            if t.cont.is_none() && now != t {
                return violation(format!("closed triple of `{root}` changed"));
            }
        }
        let before = prev.psi.entailed();
        let after = s.psi.entailed();
        for (k, v) in before {
            if after.get(&k) != Some(&v) {
                return violation(format!("entailed value of {k} was lost"));
            }
        }
        Ok(())
    }

    /// Totality of the computed answer and the number of unfolding
    /// constraints contributed by each path.
    pub fn check_final(&self, s: &EngineState) -> Result<Answer, InvariantViolation> {
        if !s.remaining.is_empty() {
            return Err(InvariantViolation("clauses remain".into()));
        }
        for (v, k) in s.kinds.iter() {
            let ok = match k {
                VarKind::Node | VarKind::Edge => s.bindings.contains_key(v),
                VarKind::Path => s.paths.get(v).is_some_and(|t| t.cont.is_none()),
                VarKind::Value => true,
            };
            if !ok {
                return Err(InvariantViolation(format!("`{v}` is not bound in the final state")));
            }
        }
        let (d1, d2) = (self.def.edge_case.len(), self.def.step_case.len());
        for (root, t) in &s.paths {
            let n = t.edges.len();
            let want = (n - 1) * d2 + d1;
            let got = s.unfolding_constraints.get(root).copied().unwrap_or(0);
            if got != want {
                return Err(InvariantViolation(format!(
                    "`{root}` of length {n} added {got} unfolding constraints, expected {want}"
                )));
            }
        }
        self.answer(s).ok_or_else(|| InvariantViolation("no computed answer".into()))
    }
}

struct Search<'s> {
    opts: &'s SolveOptions,
    start: Instant,
    seen: HashSet<AnswerKey>,
    emitted: usize,
    out: SolveOutcome,
    trail: Vec<Step>,
    sink: &'s mut dyn FnMut(&Answer) -> ControlFlow<()>,
}

fn check_domain(m: &Match, expected: &[String]) -> Result<(), EngineError> {
    let want: BTreeSet<&String> = expected.iter().collect();
    let got: BTreeSet<&String> = m.keys().collect();
    if want != got {
        return Err(EngineError::BadMatch {
            expected: expected.to_vec(),
        });
    }
    Ok(())
}

/// Convenience wrapper: validates, builds an engine and solves.
pub fn solve(
    graph: &PropertyGraph,
    def: &PropertyDef,
    q: &Query,
    opts: &SolveOptions,
) -> Result<SolveOutcome, EngineError> {
    Engine::new(graph, def)?.solve(q, opts)
}

/// The clause an original query clause index refers to.
pub fn clause_of(q: &Query, origin: usize) -> Option<&Clause> {
    q.clauses.get(origin)
}
