//! Reference semantics by brute force: enumerate every match up to a path
//! length bound and keep those whose condition set is satisfiable.
//!
//! The satisfiability check is independent of the incremental store. It
//! propagates definitional equalities, evaluates what became ground, and
//! searches a small grid for any unknowns left over. Only when that grid
//! search is inconclusive does it defer to the store.

use std::collections::{BTreeMap, BTreeSet};

use crate::constraint::{Atom, ConstraintStore, Filter, Key, Pred, Subject, Term, Verdict};
use crate::engine::{AnswerKey, PathMode};
use crate::graph::{EdgeId, ElementId, GraphPath, NodeId, PropertyGraph};
use crate::props::{constr_path, PropertyDef};
use crate::query::{NodePat, Pattern, Query, QueryError};
use crate::regex::{decompose, Regex};
use crate::value::Value;

/// Largest number of grid points tried before deferring to the store.
const GRID_BUDGET: usize = 20_000;
const GRID: [i64; 9] = [-2, -1, 0, 1, 2, 3, 4, 5, 1000];

/// The conditions a general match must satisfy: every clause filter under
/// the match, plus the defining constraints of every matched path.
pub fn conditions(
    g: &PropertyGraph,
    def: &PropertyDef,
    q: &Query,
    bindings: &BTreeMap<String, ElementId>,
    paths: &BTreeMap<String, GraphPath>,
) -> Vec<Filter> {
    let mut out = Vec::new();
    for c in &q.clauses {
        for f in &c.filter {
            let f = f
                .map_terms(&mut |t| {
                    Ok(match t {
                        Term::Prop(Subject::Var(v), k) => {
                            let s = match (bindings.get(v), paths.get(v)) {
                                (Some(ElementId::Node(n)), _) => Subject::Node(*n),
                                (Some(ElementId::Edge(e)), _) => Subject::Edge(*e),
                                (None, Some(p)) => Subject::Path(p.key(g)),
                                (None, None) => return Ok(None),
                            };
                            Some(Term::Prop(s, k.clone()))
                        }
                        _ => None,
                    })
                })
                .expect("substitution cannot fail")
                .ground(g);
            out.push(f);
        }
    }
    for p in paths.values() {
        out.extend(constr_path(def, g, p).expect("matched paths are valid"));
    }
    out
}

fn flatten(fs: &[Filter], out: &mut Vec<Filter>) {
    for f in fs {
        match f {
            Filter::And(xs) => flatten(xs, out),
            f => out.push(f.clone()),
        }
    }
}

fn key_of(t: &Term) -> Option<Key> {
    match t {
        Term::Var(v) => Some(Key::Var(v.clone())),
        Term::Prop(s, k) => Some(Key::Prop(s.clone(), k.clone())),
        _ => None,
    }
}

fn eval_term(t: &Term, env: &BTreeMap<Key, Value>) -> Option<Value> {
    match t {
        Term::Lit(v) => Some(v.clone()),
        Term::Var(_) | Term::Prop(..) => env.get(&key_of(t)?).cloned(),
        Term::Op(op, a, b) => {
            let (a, b) = (eval_term(a, env)?, eval_term(b, env)?);
            let r = crate::constraint::arith(*op, a.as_number()?, b.as_number()?);
            Some(Value::from_number(r))
        }
    }
}

/// Whether the conjunction of `fs` has a solution.
pub fn satisfiable(fs: &[Filter], int_props: &BTreeSet<String>) -> bool {
    let mut flat = Vec::new();
    flatten(fs, &mut flat);
    let mut env: BTreeMap<Key, Value> = BTreeMap::new();
    loop {
        let mut changed = false;
        for f in &flat {
            if let Filter::Atom(Atom { lhs, pred: Pred::Eq, rhs }) = f {
                for (k, t) in [(lhs, rhs), (rhs, lhs)] {
                    let Some(k) = key_of(k) else { continue };
                    if env.contains_key(&k) {
                        continue;
                    }
                    if let Some(v) = eval_term(t, &env) {
                        env.insert(k, v);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut open = BTreeSet::new();
    for f in &flat {
        match f.eval(&|k| env.get(k).cloned()) {
            Some(false) => return false,
            Some(true) => {}
            None => open.extend(f.keys().into_iter().filter(|k| !env.contains_key(k))),
        }
    }
    if open.is_empty() {
        return true;
    }
    let open: Vec<Key> = open.into_iter().collect();
    if GRID.len().checked_pow(open.len() as u32).is_some_and(|n| n <= GRID_BUDGET) {
        let mut idx = vec![0usize; open.len()];
        loop {
            let mut trial = env.clone();
            for (k, i) in open.iter().zip(&idx) {
                trial.insert(k.clone(), Value::Int(GRID[*i]));
            }
            if flat.iter().all(|f| f.eval(&|k| trial.get(k).cloned()) == Some(true)) {
                return true;
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < GRID.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }
    let store = ConstraintStore::with_integer_props(int_props.iter().cloned());
    match store.add_all(&flat) {
        Ok(s) => s.verdict() != Verdict::Inconsistent,
        Err(_) => false,
    }
}

/// One answer of the reference semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleAnswer {
    pub bindings: BTreeMap<String, ElementId>,
    pub paths: BTreeMap<String, GraphPath>,
}

impl OracleAnswer {
    pub fn key(&self) -> AnswerKey {
        (
            self.bindings.clone(),
            self.paths.iter().map(|(k, p)| (k.clone(), p.edges.clone())).collect(),
        )
    }
}

/// Every nonempty path from `from` with at most `bound` edges, in `mode`.
pub fn paths_from(g: &PropertyGraph, from: NodeId, bound: usize, mode: PathMode) -> Vec<GraphPath> {
    fn go(
        g: &PropertyGraph,
        from: NodeId,
        at: NodeId,
        edges: &mut Vec<EdgeId>,
        visited: &mut Vec<NodeId>,
        bound: usize,
        mode: PathMode,
        out: &mut Vec<GraphPath>,
    ) {
        if edges.len() == bound {
            return;
        }
        for e in g.out_edges(at, None).expect("node exists") {
            let next = g.tgt(e);
            let ok = match mode {
                PathMode::Any => true,
                PathMode::Trail => !edges.contains(&e),
                PathMode::Simple => !visited.contains(&next),
            };
            if !ok {
                continue;
            }
            edges.push(e);
            visited.push(next);
            out.push(GraphPath::new(from, edges.clone(), next));
            go(g, from, next, edges, visited, bound, mode, out);
            edges.pop();
            visited.pop();
        }
    }
    let mut out = Vec::new();
    go(g, from, from, &mut Vec::new(), &mut vec![from], bound, mode, &mut out);
    out
}

fn node_fits(g: &PropertyGraph, pat: &NodePat, n: NodeId, b: &BTreeMap<String, ElementId>) -> bool {
    pat.labels.is_subset(g.node_labels(n)) && b.get(&pat.var).is_none_or(|x| *x == ElementId::Node(n))
}

/// Answers of `q` whose paths have at most `bound` edges.
pub fn oracle_solve(
    g: &PropertyGraph,
    def: &PropertyDef,
    q: &Query,
    bound: usize,
    mode: PathMode,
) -> Result<Vec<OracleAnswer>, QueryError> {
    q.validate()?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut b = BTreeMap::new();
    let mut ps = BTreeMap::new();
    enumerate(g, def, q, 0, bound, mode, &mut b, &mut ps, &mut out, &mut seen);
    Ok(out)
}

/// Prunes early: the filters of `c` whose variables are all bound, with
/// the constraints of its matched path, form a subset of the final
/// conditions, so their unsatisfiability rules the match out.
fn partial_ok(
    g: &PropertyGraph,
    def: &PropertyDef,
    c: &crate::query::Clause,
    b: &BTreeMap<String, ElementId>,
    ps: &BTreeMap<String, GraphPath>,
    path: Option<&GraphPath>,
) -> bool {
    let ready: Vec<Filter> = c
        .filter
        .iter()
        .filter(|f| f.subject_vars().iter().all(|v| b.contains_key(v) || ps.contains_key(v)))
        .filter(|f| f.value_vars().is_empty())
        .cloned()
        .collect();
    let single = Query::new(vec![crate::query::Clause { pattern: c.pattern.clone(), filter: ready }]);
    let mut only = BTreeMap::new();
    if let (Some(p), Pattern::Path { path: var, .. }) = (path, &c.pattern) {
        only.insert(var.clone(), p.clone());
    }
    let cond = conditions(g, def, &single, b, &only);
    satisfiable(&cond, &def.integer_properties)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    g: &PropertyGraph,
    def: &PropertyDef,
    q: &Query,
    i: usize,
    bound: usize,
    mode: PathMode,
    b: &mut BTreeMap<String, ElementId>,
    ps: &mut BTreeMap<String, GraphPath>,
    out: &mut Vec<OracleAnswer>,
    seen: &mut BTreeSet<AnswerKey>,
) {
    let Some(c) = q.clauses.get(i) else {
        let cond = conditions(g, def, q, b, ps);
        if satisfiable(&cond, &def.integer_properties) {
            let a = OracleAnswer { bindings: b.clone(), paths: ps.clone() };
            if seen.insert(a.key()) {
                out.push(a);
            }
        }
        return;
    };
    type Choice = (Vec<(String, ElementId)>, Option<(String, GraphPath)>);
    let mut choices: Vec<Choice> = Vec::new();
    match &c.pattern {
        Pattern::Node(n) => {
            for id in g.nodes().filter(|x| node_fits(g, n, *x, b)) {
                choices.push((vec![(n.var.clone(), ElementId::Node(id))], None));
            }
        }
        Pattern::Edge { src, edge, tgt } => {
            for e in g.edges() {
                let (a, z) = (g.src(e), g.tgt(e));
                let fits = edge.labels.is_subset(g.edge_labels(e))
                    && b.get(&edge.var).is_none_or(|x| *x == ElementId::Edge(e))
                    && node_fits(g, src, a, b)
                    && node_fits(g, tgt, z, b)
                    && (src.var != tgt.var || a == z);
                if fits {
                    choices.push((
                        vec![
                            (src.var.clone(), ElementId::Node(a)),
                            (edge.var.clone(), ElementId::Edge(e)),
                            (tgt.var.clone(), ElementId::Node(z)),
                        ],
                        None,
                    ));
                }
            }
        }
        Pattern::Path { src, path, regex, tgt } => {
            for a in g.nodes().filter(|x| node_fits(g, src, *x, b)) {
                for p in paths_from(g, a, bound, mode) {
                    let labels: Vec<&BTreeSet<String>> =
                        p.edges.iter().map(|e| g.edge_labels(*e)).collect();
                    let word_ok = match regex {
                        Some(r) => r.matches_label_sets(&labels),
                        None => labels.iter().all(|l| !l.is_empty()),
                    };
                    if !word_ok || !node_fits(g, tgt, p.target, b) {
                        continue;
                    }
                    if src.var == tgt.var && p.target != a {
                        continue;
                    }
                    choices.push((
                        vec![
                            (src.var.clone(), ElementId::Node(a)),
                            (tgt.var.clone(), ElementId::Node(p.target)),
                        ],
                        Some((path.clone(), p)),
                    ));
                }
            }
        }
    }
    for (extra, path) in choices {
        let saved = b.clone();
        b.extend(extra);
        if let Some((k, p)) = &path {
            ps.insert(k.clone(), p.clone());
        }
        if partial_ok(g, def, c, b, ps, path.as_ref().map(|x| &x.1)) {
            enumerate(g, def, q, i + 1, bound, mode, b, ps, out, seen);
        }
        if let Some((k, _)) = path {
            ps.remove(&k);
        }
        *b = saved;
    }
}

/// Membership by structural recursion over the expression, computing the
/// set of positions reachable after matching from `i`. Shares no code with
/// the derivative machinery.
pub fn regex_accepts<S: AsRef<str>>(r: &Regex, word: &[S]) -> bool {
    fn ends<S: AsRef<str>>(r: &Regex, w: &[S], i: usize) -> BTreeSet<usize> {
        match r {
            Regex::Empty => BTreeSet::new(),
            Regex::Epsilon => BTreeSet::from([i]),
            Regex::Symbol(a) => match w.get(i) {
                Some(x) if x.as_ref() == a => BTreeSet::from([i + 1]),
                _ => BTreeSet::new(),
            },
            Regex::Union(a, b) => &ends(a, w, i) | &ends(b, w, i),
            Regex::Concat(a, b) => ends(a, w, i).into_iter().flat_map(|j| ends(b, w, j)).collect(),
            Regex::Star(a) | Regex::Plus(a) => {
                let mut seen = BTreeSet::new();
                let mut todo = ends(a, w, i).into_iter().collect::<Vec<_>>();
                while let Some(j) = todo.pop() {
                    if seen.insert(j) {
                        todo.extend(ends(a, w, j));
                    }
                }
                if matches!(r, Regex::Star(_)) {
                    seen.insert(i);
                }
                seen
            }
        }
    }
    !word.is_empty() && ends(r, word, 0).contains(&word.len())
}

/// Membership by iterating the disjunctive decomposition: a single letter
/// must be in `s0`; a longer word starts with some `b` in `s1` and its tail
/// belongs to `rem[b]`.
pub fn decomposition_accepts<S: AsRef<str>>(r: &Regex, word: &[S], alphabet: &BTreeSet<String>) -> bool {
    let Ok(d) = decompose(r, alphabet) else {
        return false;
    };
    match word {
        [] => false,
        [a] => d.s0.contains(a.as_ref()),
        [a, rest @ ..] => d
            .rem
            .get(a.as_ref())
            .is_some_and(|next| decomposition_accepts(next, rest, alphabet)),
    }
}
