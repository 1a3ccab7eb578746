//! Terms, filters and substitutions over element, path and value variables.

mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{EdgeId, ElementId, NodeId, PropertyGraph};
use crate::value::{Rational, Value};

pub use store::{ConstraintStore, LinExpr, StoreError, Verdict};

/// The thing whose property a term reads.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    /// A node, edge or path variable not yet replaced by an element.
    Var(String),
    Node(NodeId),
    Edge(EdgeId),
    /// A concrete path, named by its key.
    Path(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Lit(Value),
    /// A value variable.
    Var(String),
    Prop(Subject, String),
    Op(ArithOp, Box<Term>, Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub lhs: Term,
    pub pred: Pred,
    pub rhs: Term,
}

/// Boolean combination of atoms. `And(vec![])` is true.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Filter {
    Atom(Atom),
    And(Vec<Filter>),
    Not(Box<Filter>),
}

/// A store unknown: a value variable or a property of some subject.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    Var(String),
    Prop(Subject, String),
}

impl Pred {
    pub fn negate(self) -> Pred {
        match self {
            Pred::Eq => Pred::Ne,
            Pred::Ne => Pred::Eq,
            Pred::Lt => Pred::Ge,
            Pred::Le => Pred::Gt,
            Pred::Gt => Pred::Le,
            Pred::Ge => Pred::Lt,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Pred::Eq => "==",
            Pred::Ne => "!=",
            Pred::Lt => "<",
            Pred::Le => "<=",
            Pred::Gt => ">",
            Pred::Ge => ">=",
        }
    }
}

impl Term {
    pub fn lit(v: impl Into<Value>) -> Term {
        Term::Lit(v.into())
    }

    pub fn int(i: i64) -> Term {
        Term::Lit(Value::Int(i))
    }

    pub fn prop(var: &str, key: &str) -> Term {
        Term::Prop(Subject::Var(var.to_string()), key.to_string())
    }

    pub fn op(op: ArithOp, a: Term, b: Term) -> Term {
        Term::Op(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::op(ArithOp::Add, a, b)
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::op(ArithOp::Sub, a, b)
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::op(ArithOp::Mul, a, b)
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::Op(_, a, b) = self {
            a.visit(f);
            b.visit(f);
        }
    }

    fn map(
        &self,
        f: &mut impl FnMut(&Term) -> Result<Option<Term>, SubstError>,
    ) -> Result<Term, SubstError> {
        if let Some(t) = f(self)? {
            return Ok(t);
        }
        Ok(match self {
            Term::Op(op, a, b) => Term::op(*op, a.map(f)?, b.map(f)?),
            t => t.clone(),
        })
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl Atom {
    pub fn new(lhs: Term, pred: Pred, rhs: Term) -> Atom {
        Atom { lhs, pred, rhs }
    }
}

impl Filter {
    pub fn atom(lhs: Term, pred: Pred, rhs: Term) -> Filter {
        Filter::Atom(Atom::new(lhs, pred, rhs))
    }

    pub fn truth() -> Filter {
        Filter::And(Vec::new())
    }

    pub fn falsity() -> Filter {
        Filter::Not(Box::new(Filter::truth()))
    }

    pub fn not(f: Filter) -> Filter {
        Filter::Not(Box::new(f))
    }

    fn visit_terms<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Filter::Atom(a) => {
                a.lhs.visit(f);
                a.rhs.visit(f);
            }
            Filter::And(fs) => fs.iter().for_each(|x| x.visit_terms(f)),
            Filter::Not(x) => x.visit_terms(f),
        }
    }

    pub fn map_terms(
        &self,
        f: &mut impl FnMut(&Term) -> Result<Option<Term>, SubstError>,
    ) -> Result<Filter, SubstError> {
        Ok(match self {
            Filter::Atom(a) => Filter::Atom(Atom::new(a.lhs.map(f)?, a.pred, a.rhs.map(f)?)),
            Filter::And(fs) => Filter::And(
                fs.iter()
                    .map(|x| x.map_terms(f))
                    .collect::<Result<_, _>>()?,
            ),
            Filter::Not(x) => Filter::not(x.map_terms(f)?),
        })
    }

    /// Variables used as the subject of a property access.
    pub fn subject_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Prop(Subject::Var(v), _) = t {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Value variables.
    pub fn value_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Property accesses `(variable, key)` on variable subjects.
    pub fn var_props(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Prop(Subject::Var(v), k) = t {
                out.insert((v.clone(), k.clone()));
            }
        });
        out
    }

    /// Every store unknown the filter mentions.
    pub fn keys(&self) -> BTreeSet<Key> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| match t {
            Term::Var(v) => {
                out.insert(Key::Var(v.clone()));
            }
            Term::Prop(s, k) => {
                out.insert(Key::Prop(s.clone(), k.clone()));
            }
            _ => {}
        });
        out
    }

    /// Replaces properties of concrete nodes and edges by their stored values.
    /// Absent properties stay symbolic.
    pub fn ground(&self, g: &PropertyGraph) -> Filter {
        self.map_terms(&mut |t| {
            Ok(match t {
                Term::Prop(Subject::Node(n), k) => g
                    .get_property(ElementId::Node(*n), k)
                    .ok()
                    .flatten()
                    .map(|v| Term::Lit(v.clone())),
                Term::Prop(Subject::Edge(e), k) => g
                    .get_property(ElementId::Edge(*e), k)
                    .ok()
                    .flatten()
                    .map(|v| Term::Lit(v.clone())),
                _ => None,
            })
        })
        .expect("grounding cannot fail")
    }

    /// Evaluates the filter when every unknown is supplied by `lookup`.
    /// Returns `None` while some unknown remains.
    pub fn eval(&self, lookup: &impl Fn(&Key) -> Option<Value>) -> Option<bool> {
        match self {
            Filter::Atom(a) => eval_atom(a, lookup),
            Filter::And(fs) => {
                let mut unknown = false;
                for f in fs {
                    match f.eval(lookup) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            Filter::Not(f) => f.eval(lookup).map(|b| !b),
        }
    }

    /// Renders with element names taken from `g`.
    pub fn render(&self, g: Option<&PropertyGraph>) -> String {
        let mut s = String::new();
        write_filter(&mut s, self, g, true);
        s
    }
}

enum EvalTerm {
    Val(Value),
    Unknown,
    IllSorted,
}

fn eval_term(t: &Term, lookup: &impl Fn(&Key) -> Option<Value>) -> EvalTerm {
    let key = match t {
        Term::Lit(v) => return EvalTerm::Val(v.clone()),
        Term::Var(v) => Key::Var(v.clone()),
        Term::Prop(s, k) => Key::Prop(s.clone(), k.clone()),
        Term::Op(op, a, b) => {
            let (a, b) = (eval_term(a, lookup), eval_term(b, lookup));
            return match (a, b) {
                (EvalTerm::IllSorted, _) | (_, EvalTerm::IllSorted) => EvalTerm::IllSorted,
                (EvalTerm::Val(a), EvalTerm::Val(b)) => match (a.as_number(), b.as_number()) {
                    (Some(x), Some(y)) => EvalTerm::Val(Value::from_number(arith(*op, x, y))),
                    _ => EvalTerm::IllSorted,
                },
                (EvalTerm::Val(v), _) | (_, EvalTerm::Val(v)) if !v.is_numeric() => {
                    EvalTerm::IllSorted
                }
                _ => EvalTerm::Unknown,
            };
        }
    };
    match lookup(&key) {
        Some(v) => EvalTerm::Val(v),
        None => EvalTerm::Unknown,
    }
}

pub(crate) fn arith(op: ArithOp, x: Rational, y: Rational) -> Rational {
    match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
    }
}

/// Truth of `a pred b` on two values under the constraint semantics.
pub fn compare(a: &Value, pred: Pred, b: &Value) -> bool {
    match pred {
        Pred::Eq => a.semantic_eq(b),
        Pred::Ne => !a.semantic_eq(b),
        _ => match a.semantic_cmp(b) {
            None => false,
            Some(o) => match pred {
                Pred::Lt => o.is_lt(),
                Pred::Le => o.is_le(),
                Pred::Gt => o.is_gt(),
                Pred::Ge => o.is_ge(),
                Pred::Eq | Pred::Ne => unreachable!(),
            },
        },
    }
}

fn eval_atom(a: &Atom, lookup: &impl Fn(&Key) -> Option<Value>) -> Option<bool> {
    match (eval_term(&a.lhs, lookup), eval_term(&a.rhs, lookup)) {
        (EvalTerm::IllSorted, _) | (_, EvalTerm::IllSorted) => Some(false),
        (EvalTerm::Val(x), EvalTerm::Val(y)) => Some(compare(&x, a.pred, &y)),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Node,
    Edge,
    Path,
    Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Binding {
    Node(NodeId),
    Edge(EdgeId),
    /// A concrete path, by key.
    Path(String),
    /// Renaming to another variable.
    Var(String),
    Value(Value),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstError {
    #[error("variable `{var}` of kind {expected:?} cannot be bound to {found}")]
    KindMismatch {
        var: String,
        expected: VarKind,
        found: String,
    },
}

/// A partial map from variables to elements, paths, values or variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<String, Binding>,
    kinds: BTreeMap<String, VarKind>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares variable kinds; bindings are then checked against them.
    pub fn with_kinds(mut self, kinds: BTreeMap<String, VarKind>) -> Self {
        self.kinds = kinds;
        self
    }

    pub fn bind(&mut self, var: &str, b: Binding) {
        self.map.insert(var.to_string(), b);
    }

    pub fn with(mut self, var: &str, b: Binding) -> Self {
        self.bind(var, b);
        self
    }

    pub fn get(&self, var: &str) -> Option<&Binding> {
        self.map.get(var)
    }

    fn check(&self, var: &str, b: &Binding, as_value: bool) -> Result<(), SubstError> {
        let found = match b {
            Binding::Var(_) => return Ok(()),
            Binding::Node(_) => VarKind::Node,
            Binding::Edge(_) => VarKind::Edge,
            Binding::Path(_) => VarKind::Path,
            Binding::Value(_) => VarKind::Value,
        };
        let expected = match self.kinds.get(var) {
            Some(k) => *k,
            None if as_value => VarKind::Value,
            None if found == VarKind::Value => VarKind::Node,
            None => return Ok(()),
        };
        if expected != found {
            return Err(SubstError::KindMismatch {
                var: var.to_string(),
                expected,
                found: format!("{found:?}").to_lowercase(),
            });
        }
        Ok(())
    }
}

/// Applies `s` to every variable occurrence in `f`.
pub fn apply_substitution(f: &Filter, s: &Substitution) -> Result<Filter, SubstError> {
    f.map_terms(&mut |t| match t {
        Term::Var(v) => match s.get(v) {
            None => Ok(None),
            Some(b) => {
                s.check(v, b, true)?;
                Ok(Some(match b {
                    Binding::Value(x) => Term::Lit(x.clone()),
                    Binding::Var(w) => Term::Var(w.clone()),
                    _ => unreachable!("checked above"),
                }))
            }
        },
        Term::Prop(Subject::Var(v), k) => match s.get(v) {
            None => Ok(None),
            Some(b) => {
                s.check(v, b, false)?;
                let subj = match b {
                    Binding::Node(n) => Subject::Node(*n),
                    Binding::Edge(e) => Subject::Edge(*e),
                    Binding::Path(p) => Subject::Path(p.clone()),
                    Binding::Var(w) => Subject::Var(w.clone()),
                    Binding::Value(_) => unreachable!("checked above"),
                };
                Ok(Some(Term::Prop(subj, k.clone())))
            }
        },
        _ => Ok(None),
    })
}

fn write_subject(out: &mut String, s: &Subject, g: Option<&PropertyGraph>) {
    match (s, g) {
        (Subject::Var(v), _) => out.push_str(v),
        (Subject::Node(n), Some(g)) => out.push_str(g.node_name(*n)),
        (Subject::Edge(e), Some(g)) => out.push_str(g.edge_name(*e)),
        (Subject::Node(n), None) => out.push_str(&format!("node#{}", n.0)),
        (Subject::Edge(e), None) => out.push_str(&format!("edge#{}", e.0)),
        (Subject::Path(k), _) => out.push_str(&format!("path[{k}]")),
    }
}

pub(crate) fn write_term(out: &mut String, t: &Term, g: Option<&PropertyGraph>) {
    match t {
        Term::Lit(v) => out.push_str(&v.to_string()),
        Term::Var(v) => out.push_str(v),
        Term::Prop(s, k) => {
            write_subject(out, s, g);
            out.push('.');
            out.push_str(k);
        }
        Term::Op(op, a, b) => {
            for (i, side) in [a, b].into_iter().enumerate() {
                if i == 1 {
                    out.push_str(match op {
                        ArithOp::Add => " + ",
                        ArithOp::Sub => " - ",
                        ArithOp::Mul => " * ",
                    });
                }
                if matches!(**side, Term::Op(..)) {
                    out.push('(');
                    write_term(out, side, g);
                    out.push(')');
                } else {
                    write_term(out, side, g);
                }
            }
        }
    }
}

fn write_filter(out: &mut String, f: &Filter, g: Option<&PropertyGraph>, top: bool) {
    match f {
        Filter::Atom(a) => {
            write_term(out, &a.lhs, g);
            out.push(' ');
            out.push_str(a.pred.symbol());
            out.push(' ');
            write_term(out, &a.rhs, g);
        }
        Filter::And(fs) if fs.is_empty() => out.push_str("true"),
        Filter::And(fs) => {
            if !top {
                out.push('(');
            }
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_filter(out, x, g, false);
            }
            if !top {
                out.push(')');
            }
        }
        Filter::Not(x) if **x == Filter::truth() => out.push_str("false"),
        Filter::Not(x) => {
            out.push_str("not (");
            write_filter(out, x, g, true);
            out.push(')');
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self, None);
        f.write_str(&s)
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Var(v) => f.write_str(v),
            Key::Prop(s, k) => {
                let mut out = String::new();
                write_subject(&mut out, s, None);
                write!(f, "{out}.{k}")
            }
        }
    }
}

impl Key {
    pub fn prop(var: &str, key: &str) -> Key {
        Key::Prop(Subject::Var(var.to_string()), key.to_string())
    }

    pub fn as_term(&self) -> Term {
        match self {
            Key::Var(v) => Term::Var(v.clone()),
            Key::Prop(s, k) => Term::Prop(s.clone(), k.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_renames_and_grounds() {
        let f = Filter::atom(Term::prop("x", "loc"), Pred::Eq, Term::Var("v".into()));
        let s = Substitution::new()
            .with("x", Binding::Node(NodeId(0)))
            .with("v", Binding::Value(Value::text("LA")));
        let g = apply_substitution(&f, &s).unwrap();
        assert_eq!(
            g,
            Filter::atom(
                Term::Prop(Subject::Node(NodeId(0)), "loc".into()),
                Pred::Eq,
                Term::Lit(Value::text("LA"))
            )
        );
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let f = Filter::atom(Term::prop("p", "cost"), Pred::Gt, Term::int(0));
        let kinds = BTreeMap::from([("p".to_string(), VarKind::Path)]);
        let s = Substitution::new()
            .with_kinds(kinds)
            .with("p", Binding::Node(NodeId(1)));
        assert!(matches!(
            apply_substitution(&f, &s),
            Err(SubstError::KindMismatch { .. })
        ));
        let s2 = Substitution::new().with("v", Binding::Node(NodeId(1)));
        let f2 = Filter::atom(Term::Var("v".into()), Pred::Eq, Term::int(0));
        assert!(apply_substitution(&f2, &s2).is_err());
    }

    #[test]
    fn ground_evaluation() {
        let f = Filter::atom(
            Term::add(Term::int(2), Term::Lit(Value::hm(1, 0))),
            Pred::Eq,
            Term::int(62),
        );
        assert_eq!(f.eval(&|_| None), Some(true));
        let ill = Filter::atom(
            Term::add(Term::lit("a"), Term::int(1)),
            Pred::Ne,
            Term::int(0),
        );
        assert_eq!(ill.eval(&|_| None), Some(false));
        let open = Filter::atom(Term::Var("z".into()), Pred::Lt, Term::int(0));
        assert_eq!(open.eval(&|_| None), None);
        assert_eq!(Filter::falsity().eval(&|_| None), Some(false));
    }
}
