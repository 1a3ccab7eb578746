//! Incremental partial constraint solver.
//!
//! Linear equalities are kept in solved form (each solved unknown maps to an
//! expression over unsolved ones). Single-unknown inequalities become bounds,
//! tightened to integers for integer-sorted properties; the remaining
//! inequalities are checked with Fourier-Motzkin elimination, which also
//! projects out bounds on each unknown. Small systems over bounded integer
//! unknowns are searched exhaustively. Disequalities
//! are kept as excluded points or hyperplanes. Anything nonlinear or
//! undecidable for now is suspended and retried whenever the store learns
//! something new.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{compare, ArithOp, Atom, Filter, Key, Pred, Subject, Term};
use crate::value::{Rational, Value};

/// Rows beyond which elimination stops and the store reports `Unknown`.
const FM_LIMIT: usize = 4000;

/// Largest number of grid points searched when labelling bounded integer
/// unknowns.
const LABEL_LIMIT: u64 = 4096;

/// Rounds of implied-bound propagation per feasibility check.
const PROPAGATION_ROUNDS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("constraint store is already inconsistent")]
    Inconsistent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    /// Not refuted, but satisfiability was not fully decided.
    Unknown,
}

/// `Σ coefᵢ·keyᵢ + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    terms: BTreeMap<Key, Rational>,
    constant: Rational,
}

impl LinExpr {
    pub fn constant(c: Rational) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn key(k: Key) -> Self {
        LinExpr {
            terms: BTreeMap::from([(k, Rational::one())]),
            constant: Rational::zero(),
        }
    }

    pub fn terms(&self) -> &BTreeMap<Key, Rational> {
        &self.terms
    }

    pub fn constant_part(&self) -> Rational {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_lone_key(&self) -> Option<&Key> {
        if self.terms.len() == 1 && self.constant.is_zero() {
            let (k, c) = self.terms.iter().next().unwrap();
            if c.is_one() {
                return Some(k);
            }
        }
        None
    }

    fn add_scaled(&mut self, other: &LinExpr, s: Rational) {
        for (k, c) in &other.terms {
            let e = self.terms.entry(k.clone()).or_insert_with(Rational::zero);
            *e += *c * s;
            if e.is_zero() {
                self.terms.remove(k);
            }
        }
        self.constant += other.constant * s;
    }

    fn scale(&mut self, s: Rational) {
        if s.is_zero() {
            self.terms.clear();
            self.constant = Rational::zero();
            return;
        }
        for c in self.terms.values_mut() {
            *c *= s;
        }
        self.constant *= s;
    }

    fn substitute(&mut self, k: &Key, by: &LinExpr) -> bool {
        match self.terms.remove(k) {
            Some(c) => {
                self.add_scaled(by, c);
                true
            }
            None => false,
        }
    }

    /// Scales so that the first coefficient has absolute value one; with
    /// `keep_sign` false the first coefficient becomes exactly one.
    fn normalized(mut self, keep_sign: bool) -> LinExpr {
        if let Some(c) = self.terms.values().next().copied() {
            let s = if keep_sign {
                c.abs().recip()
            } else {
                c.recip()
            };
            self.scale(s);
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Bound {
    value: Rational,
    strict: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Bounds {
    lo: Option<Bound>,
    hi: Option<Bound>,
}

/// `expr > 0` when strict, else `expr >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Ineq {
    expr: LinExpr,
    strict: bool,
}

enum Side {
    /// Numeric expression; the flag marks a bare unknown with no arithmetic.
    Num(LinExpr, bool),
    Other(Value),
    IllSorted,
    Nonlinear,
}

/// A persistent CLP-style store. `add` never mutates the receiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintStore {
    solved: BTreeMap<Key, LinExpr>,
    fixed: BTreeMap<Key, Value>,
    bounds: BTreeMap<Key, Bounds>,
    ineqs: BTreeSet<Ineq>,
    diseqs: BTreeSet<LinExpr>,
    suspended: Vec<Filter>,
    int_props: Arc<BTreeSet<String>>,
    consistent: bool,
    gave_up: bool,
    dirty: bool,
    /// Set while implied bounds are being propagated, so that nested
    /// feasibility checks do not start another propagation.
    propagating: bool,
}

impl Default for ConstraintStore {
    fn default() -> Self {
        ConstraintStore {
            solved: BTreeMap::new(),
            fixed: BTreeMap::new(),
            bounds: BTreeMap::new(),
            ineqs: BTreeSet::new(),
            diseqs: BTreeSet::new(),
            suspended: Vec::new(),
            int_props: Arc::new(BTreeSet::new()),
            consistent: true,
            gave_up: false,
            dirty: false,
            propagating: false,
        }
    }
}

impl ConstraintStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// A store in which the named properties range over the integers.
    pub fn with_integer_props<I, S>(props: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ConstraintStore {
            int_props: Arc::new(props.into_iter().map(Into::into).collect()),
            ..Self::default()
        }
    }

    pub fn integer_props(&self) -> &BTreeSet<String> {
        &self.int_props
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn verdict(&self) -> Verdict {
        if !self.consistent {
            Verdict::Inconsistent
        } else if self.gave_up
            || !self.suspended.is_empty()
            || !self.diseqs.is_empty()
            || self.bounds.keys().any(|k| self.is_int(k))
        {
            Verdict::Unknown
        } else {
            Verdict::Consistent
        }
    }

    /// Returns the store extended with `f`.
    pub fn add(&self, f: &Filter) -> Result<ConstraintStore, StoreError> {
        if !self.consistent {
            return Err(StoreError::Inconsistent);
        }
        let mut s = self.clone();
        s.add_in_place(f);
        Ok(s)
    }

    pub fn add_all<'a>(
        &self,
        fs: impl IntoIterator<Item = &'a Filter>,
    ) -> Result<ConstraintStore, StoreError> {
        if !self.consistent {
            return Err(StoreError::Inconsistent);
        }
        let mut s = self.clone();
        for f in fs {
            if !s.add_in_place(f) {
                break;
            }
        }
        Ok(s)
    }

    /// Adds `f` to this store; returns whether it is still consistent.
    pub fn add_in_place(&mut self, f: &Filter) -> bool {
        self.add_filter(f);
        self.wake();
        self.label();
        self.consistent
    }

    /// The unique value of `k` in every solution, when the store knows it.
    pub fn entailed_value(&self, k: &Key) -> Option<Value> {
        if let Some(v) = self.fixed.get(k) {
            return Some(v.clone());
        }
        match self.solved.get(k) {
            Some(e) if e.is_constant() => Some(Value::from_number(e.constant)),
            _ => None,
        }
    }

    /// Every unknown the store has a unique value for.
    pub fn entailed(&self) -> BTreeMap<Key, Value> {
        let mut out: BTreeMap<Key, Value> = self.fixed.clone();
        for (k, e) in &self.solved {
            if e.is_constant() {
                out.insert(k.clone(), Value::from_number(e.constant));
            }
        }
        out
    }

    /// Simplified constraints that are not yet reduced to values.
    pub fn residual(&self) -> Vec<Filter> {
        let mut out = Vec::new();
        for (k, e) in &self.solved {
            if e.is_constant() {
                continue;
            }
            // The solved unknown leads: `k - rhs == c`.
            let rest = e.terms.iter().map(|(x, c)| (x, -*c));
            let lhs = lin_term(std::iter::once((k, Rational::one())).chain(rest));
            out.push(Filter::atom(lhs, Pred::Eq, num_lit(e.constant)));
        }
        for (k, b) in &self.bounds {
            let t = k.as_term();
            if let Some(lo) = b.lo {
                let p = if lo.strict { Pred::Gt } else { Pred::Ge };
                out.push(Filter::atom(t.clone(), p, num_lit(lo.value)));
            }
            if let Some(hi) = b.hi {
                let p = if hi.strict { Pred::Lt } else { Pred::Le };
                out.push(Filter::atom(t, p, num_lit(hi.value)));
            }
        }
        for i in &self.ineqs {
            let mut e = i.expr.clone();
            let c = -e.constant;
            e.constant = Rational::zero();
            let p = if i.strict { Pred::Gt } else { Pred::Ge };
            out.push(Filter::atom(
                lin_term(e.terms.iter().map(|(k, c)| (k, *c))),
                p,
                num_lit(c),
            ));
        }
        for d in &self.diseqs {
            let mut e = d.clone();
            let c = -e.constant;
            e.constant = Rational::zero();
            out.push(Filter::atom(
                lin_term(e.terms.iter().map(|(k, c)| (k, *c))),
                Pred::Ne,
                num_lit(c),
            ));
        }
        out.extend(self.suspended.iter().cloned());
        out
    }

    /// Constraints still waiting for more information.
    pub fn suspended(&self) -> &[Filter] {
        &self.suspended
    }

    fn is_int(&self, k: &Key) -> bool {
        match k {
            Key::Prop(_, name) => self.int_props.contains(name),
            Key::Var(_) => false,
        }
    }

    fn fail(&mut self) {
        self.consistent = false;
    }

    fn wake(&mut self) {
        let mut rounds = 0;
        while self.dirty && self.consistent {
            self.dirty = false;
            rounds += 1;
            if rounds > 10_000 {
                break;
            }
            let pending = std::mem::take(&mut self.suspended);
            for f in &pending {
                if !self.consistent {
                    return;
                }
                self.add_filter(f);
            }
        }
    }

    fn add_filter(&mut self, f: &Filter) {
        if !self.consistent {
            return;
        }
        match f {
            Filter::Atom(a) => self.add_atom(a, f),
            Filter::And(fs) => {
                for x in fs {
                    self.add_filter(x);
                    if !self.consistent {
                        return;
                    }
                }
            }
            Filter::Not(g) => self.add_not(g),
        }
    }

    fn eval_known(&self, f: &Filter) -> Option<bool> {
        f.eval(&|k| self.entailed_value(k))
    }

    fn add_not(&mut self, g: &Filter) {
        match g {
            Filter::Atom(a) => match self.eval_known(g) {
                Some(true) => self.fail(),
                Some(false) => {}
                None => {
                    let neg = Atom::new(a.lhs.clone(), a.pred.negate(), a.rhs.clone());
                    let f = Filter::Atom(neg.clone());
                    self.add_atom(&neg, &f);
                }
            },
            Filter::Not(h) => self.add_filter(h),
            Filter::And(fs) => {
                let mut open = Vec::new();
                for x in fs {
                    match self.eval_known(x) {
                        Some(false) => return,
                        Some(true) => {}
                        None => open.push(x.clone()),
                    }
                }
                match open.len() {
                    0 => self.fail(),
                    1 => self.add_not(&open[0]),
                    _ => self.suspend(Filter::not(Filter::And(open))),
                }
            }
        }
    }

    fn suspend(&mut self, f: Filter) {
        if !self.suspended.contains(&f) {
            self.suspended.push(f);
        }
    }

    fn resolve(&self, t: &Term) -> Side {
        let key = match t {
            Term::Lit(v) => {
                return match v.as_number() {
                    Some(r) => Side::Num(LinExpr::constant(r), false),
                    None => Side::Other(v.clone()),
                }
            }
            Term::Var(v) => Key::Var(v.clone()),
            Term::Prop(s, k) => Key::Prop(s.clone(), k.clone()),
            Term::Op(op, a, b) => {
                let (a, b) = (self.resolve(a), self.resolve(b));
                return match (a, b) {
                    (Side::IllSorted, _) | (_, Side::IllSorted) => Side::IllSorted,
                    (Side::Other(_), _) | (_, Side::Other(_)) => Side::IllSorted,
                    (Side::Nonlinear, _) | (_, Side::Nonlinear) => Side::Nonlinear,
                    (Side::Num(mut x, _), Side::Num(y, _)) => match op {
                        ArithOp::Add => {
                            x.add_scaled(&y, Rational::one());
                            Side::Num(x, false)
                        }
                        ArithOp::Sub => {
                            x.add_scaled(&y, -Rational::one());
                            Side::Num(x, false)
                        }
                        ArithOp::Mul => {
                            if x.is_constant() {
                                let c = x.constant;
                                let mut y = y;
                                y.scale(c);
                                Side::Num(y, false)
                            } else if y.is_constant() {
                                x.scale(y.constant);
                                Side::Num(x, false)
                            } else {
                                Side::Nonlinear
                            }
                        }
                    },
                };
            }
        };
        if let Some(v) = self.fixed.get(&key) {
            return Side::Other(v.clone());
        }
        if let Some(e) = self.solved.get(&key) {
            let lone = e.is_lone_key().is_some();
            return Side::Num(e.clone(), lone);
        }
        Side::Num(LinExpr::key(key), true)
    }

    fn add_atom(&mut self, a: &Atom, original: &Filter) {
        let (l, r) = (self.resolve(&a.lhs), self.resolve(&a.rhs));
        match (l, r) {
            (Side::IllSorted, _) | (_, Side::IllSorted) => self.fail(),
            (Side::Other(x), Side::Other(y)) => {
                if !compare(&x, a.pred, &y) {
                    self.fail();
                }
            }
            (Side::Other(v), Side::Num(e, lone)) | (Side::Num(e, lone), Side::Other(v)) => {
                if e.is_constant() {
                    // Orientation is irrelevant: mixed sorts are unordered.
                    if !compare(&Value::from_number(e.constant), a.pred, &v) {
                        self.fail();
                    }
                } else if lone {
                    match a.pred {
                        Pred::Eq => {
                            let k = e.is_lone_key().expect("lone").clone();
                            self.fix(k, v);
                        }
                        _ => self.suspend(original.clone()),
                    }
                } else if a.pred != Pred::Ne {
                    self.fail();
                }
            }
            (Side::Nonlinear, _) | (_, Side::Nonlinear) => self.suspend(original.clone()),
            (Side::Num(l, ll), Side::Num(r, rl)) => {
                let mut e = l;
                e.add_scaled(&r, -Rational::one());
                match a.pred {
                    Pred::Eq => self.add_eq(e),
                    Pred::Ne if ll && rl && !e.is_constant() => self.suspend(original.clone()),
                    Pred::Ne => self.add_diseq(e),
                    Pred::Gt => self.add_ineq(e, true),
                    Pred::Ge => self.add_ineq(e, false),
                    Pred::Lt => {
                        e.scale(-Rational::one());
                        self.add_ineq(e, true)
                    }
                    Pred::Le => {
                        e.scale(-Rational::one());
                        self.add_ineq(e, false)
                    }
                }
            }
        }
    }

    /// Rewrites `e` over unsolved unknowns. `None` if it mentions a
    /// non-numeric unknown.
    fn canon(&self, mut e: LinExpr) -> Option<LinExpr> {
        let keys: Vec<Key> = e.terms.keys().cloned().collect();
        for k in keys {
            if self.fixed.contains_key(&k) {
                return None;
            }
            if let Some(by) = self.solved.get(&k) {
                e.substitute(&k, by);
            }
        }
        Some(e)
    }

    fn add_eq(&mut self, e: LinExpr) {
        let Some(e) = self.canon(e) else {
            return self.fail();
        };
        if e.is_constant() {
            if !e.constant.is_zero() {
                self.fail();
            }
            return;
        }
        let (k, c) = e
            .terms
            .iter()
            .max_by(|a, b| (pivot_rank(a.0), a.0).cmp(&(pivot_rank(b.0), b.0)))
            .map(|(k, c)| (k.clone(), *c))
            .unwrap();
        let mut rhs = e;
        rhs.terms.remove(&k);
        rhs.scale(-c.recip());
        self.eliminate(k, rhs);
    }

    fn eliminate(&mut self, k: Key, rhs: LinExpr) {
        if rhs.is_constant() && self.is_int(&k) && !rhs.constant.is_integer() {
            return self.fail();
        }
        let mut bad = false;
        let ints = Arc::clone(&self.int_props);
        for (sk, v) in self.solved.iter_mut() {
            let is_int = matches!(sk, Key::Prop(_, name) if ints.contains(name));
            if v.substitute(&k, &rhs) && v.is_constant() && is_int && !v.constant.is_integer() {
                bad = true;
            }
        }
        if bad {
            return self.fail();
        }
        self.solved.insert(k.clone(), rhs.clone());
        self.dirty = true;
        if let Some(b) = self.bounds.remove(&k) {
            if let Some(lo) = b.lo {
                let mut e = rhs.clone();
                e.constant -= lo.value;
                self.add_ineq(e, lo.strict);
            }
            if let Some(hi) = b.hi {
                let mut e = LinExpr::constant(hi.value);
                e.add_scaled(&rhs, -Rational::one());
                self.add_ineq(e, hi.strict);
            }
        }
        let touched: Vec<Ineq> = self
            .ineqs
            .iter()
            .filter(|i| i.expr.terms.contains_key(&k))
            .cloned()
            .collect();
        for i in &touched {
            self.ineqs.remove(i);
        }
        for i in touched {
            if !self.consistent {
                return;
            }
            self.add_ineq(i.expr, i.strict);
        }
        let touched: Vec<LinExpr> = self
            .diseqs
            .iter()
            .filter(|d| d.terms.contains_key(&k))
            .cloned()
            .collect();
        for d in &touched {
            self.diseqs.remove(d);
        }
        for d in touched {
            if !self.consistent {
                return;
            }
            self.add_diseq(d);
        }
    }

    fn add_ineq(&mut self, e: LinExpr, strict: bool) {
        if !self.consistent {
            return;
        }
        let Some(e) = self.canon(e) else {
            return self.fail();
        };
        if e.is_constant() {
            let c = e.constant;
            if (strict && !c.is_positive()) || (!strict && c.is_negative()) {
                self.fail();
            }
            return;
        }
        if e.terms.len() == 1 {
            let (k, a) = e.terms.iter().next().map(|(k, a)| (k.clone(), *a)).unwrap();
            let value = -e.constant / a;
            self.tighten(k, a.is_positive(), Bound { value, strict });
            return;
        }
        let ineq = if e.terms.keys().all(|k| self.is_int(k)) {
            integer_row(e, strict)
        } else {
            Ineq {
                expr: e.normalized(true),
                strict,
            }
        };
        if self.ineqs.insert(ineq) {
            self.fm_check();
        }
    }

    fn round(&self, k: &Key, lower: bool, b: Bound) -> Bound {
        if !self.is_int(k) {
            return b;
        }
        let v = b.value;
        let value = match (lower, b.strict) {
            (true, true) => v.floor() + Rational::one(),
            (true, false) => v.ceil(),
            (false, true) => v.ceil() - Rational::one(),
            (false, false) => v.floor(),
        };
        Bound {
            value,
            strict: false,
        }
    }

    fn excluded_point(&self, k: &Key) -> BTreeSet<Rational> {
        self.diseqs
            .iter()
            .filter(|d| d.terms.len() == 1 && d.terms.contains_key(k))
            .map(|d| -d.constant)
            .collect()
    }

    fn tighten(&mut self, k: Key, lower: bool, b: Bound) {
        let excluded = self.excluded_point(&k);
        let mut b = self.round(&k, lower, b);
        while !b.strict && excluded.contains(&b.value) {
            b = self.round(
                &k,
                lower,
                Bound {
                    value: b.value,
                    strict: true,
                },
            );
        }
        let cur = self.bounds.get(&k).copied().unwrap_or_default();
        let mut next = cur;
        if lower {
            let tighter = match cur.lo {
                None => true,
                Some(o) => b.value > o.value || (b.value == o.value && b.strict && !o.strict),
            };
            if tighter {
                next.lo = Some(b);
            }
        } else {
            let tighter = match cur.hi {
                None => true,
                Some(o) => b.value < o.value || (b.value == o.value && b.strict && !o.strict),
            };
            if tighter {
                next.hi = Some(b);
            }
        }
        if next == cur {
            return;
        }
        if let (Some(lo), Some(hi)) = (next.lo, next.hi) {
            if lo.value > hi.value || (lo.value == hi.value && (lo.strict || hi.strict)) {
                return self.fail();
            }
            if lo.value == hi.value {
                self.bounds.remove(&k);
                let mut e = LinExpr::key(k);
                e.constant = -lo.value;
                return self.add_eq(e);
            }
        }
        self.bounds.insert(k.clone(), next);
        if self.ineqs.iter().any(|i| i.expr.terms.contains_key(&k)) {
            self.fm_check();
        }
    }

    fn add_diseq(&mut self, e: LinExpr) {
        if !self.consistent {
            return;
        }
        // A disequality on a non-numeric unknown holds trivially.
        let Some(e) = self.canon(e) else { return };
        if e.is_constant() {
            if e.constant.is_zero() {
                self.fail();
            }
            return;
        }
        let e = e.normalized(false);
        if e.terms.len() == 1 {
            let k = e.terms.keys().next().unwrap().clone();
            let point = -e.constant;
            if self.is_int(&k) && !point.is_integer() {
                return;
            }
            self.diseqs.insert(e);
            if let Some(b) = self.bounds.get(&k).copied() {
                if let Some(lo) = b.lo.filter(|lo| lo.value == point && !lo.strict) {
                    self.tighten(
                        k.clone(),
                        true,
                        Bound {
                            value: lo.value,
                            strict: true,
                        },
                    );
                }
                if !self.consistent {
                    return;
                }
                if let Some(hi) = b.hi.filter(|hi| hi.value == point && !hi.strict) {
                    self.tighten(
                        k,
                        false,
                        Bound {
                            value: hi.value,
                            strict: true,
                        },
                    );
                }
            }
        } else {
            self.diseqs.insert(e);
        }
    }

    fn fix(&mut self, k: Key, v: Value) {
        if self.bounds.contains_key(&k) || self.ineqs.iter().any(|i| i.expr.terms.contains_key(&k))
        {
            return self.fail();
        }
        let touched: Vec<LinExpr> = self
            .diseqs
            .iter()
            .filter(|d| d.terms.contains_key(&k))
            .cloned()
            .collect();
        for d in touched {
            if d.terms.len() > 1 {
                return self.fail();
            }
            self.diseqs.remove(&d);
        }
        self.fixed.insert(k.clone(), v.clone());
        self.dirty = true;
        let refs: Vec<Key> = self
            .solved
            .iter()
            .filter(|(_, e)| e.terms.contains_key(&k))
            .map(|(s, _)| s.clone())
            .collect();
        for r in refs {
            let rhs = self.solved.remove(&r).expect("present");
            if rhs.is_lone_key() == Some(&k) {
                self.fix(r, v.clone());
            } else {
                return self.fail();
            }
            if !self.consistent {
                return;
            }
        }
    }

    /// Integer bounds `[lo, hi]` of an unsolved integer unknown, when finite.
    fn finite_range(&self, k: &Key) -> Option<(i128, i128)> {
        if !self.is_int(k) {
            return None;
        }
        let b = self.bounds.get(k)?;
        let (lo, hi) = (b.lo?, b.hi?);
        let lo = if lo.strict { lo.value.floor() + Rational::one() } else { lo.value.ceil() };
        let hi = if hi.strict { hi.value.ceil() - Rational::one() } else { hi.value.floor() };
        Some((lo.to_integer(), hi.to_integer()))
    }

    /// Finite-domain completion: the relations whose unknowns are all
    /// bounded integers are searched exhaustively when the grid is small.
    /// The search ignores every other constraint, so its conclusions (no
    /// solution, or an unknown or solved expression taking one value) also
    /// hold for the whole store.
    fn label(&mut self) {
        for _ in 0..PROPAGATION_ROUNDS {
            if !self.consistent || !self.label_once() {
                return;
            }
            self.wake();
        }
    }

    /// One labelling pass; returns whether the store learned something.
    fn label_once(&mut self) -> bool {
        let all_finite = |e: &LinExpr| e.terms.keys().all(|k| self.finite_range(k).is_some());
        let ineqs: Vec<Ineq> = self.ineqs.iter().filter(|i| all_finite(&i.expr)).cloned().collect();
        let diseqs: Vec<LinExpr> = self
            .diseqs
            .iter()
            .filter(|d| d.terms.len() > 1 && all_finite(d))
            .cloned()
            .collect();
        let solved: Vec<(Key, LinExpr)> = self
            .solved
            .iter()
            .filter(|(_, e)| !e.is_constant() && all_finite(e))
            .map(|(k, e)| (k.clone(), e.clone()))
            .collect();
        let mut keys: BTreeSet<Key> = BTreeSet::new();
        for e in ineqs.iter().map(|i| &i.expr).chain(&diseqs).chain(solved.iter().map(|s| &s.1)) {
            keys.extend(e.terms.keys().cloned());
        }
        if keys.is_empty() {
            return false;
        }
        let keys: Vec<Key> = keys.into_iter().collect();
        let mut domains: Vec<Vec<Rational>> = Vec::new();
        let mut size: u64 = 1;
        for k in &keys {
            let (lo, hi) = self.finite_range(k).expect("filtered");
            let out = self.excluded_point(k);
            let d: Vec<Rational> = (lo..=hi)
                .map(Rational::from_integer)
                .filter(|v| !out.contains(v))
                .collect();
            size = size.saturating_mul(d.len().max(1) as u64);
            if size > LABEL_LIMIT {
                return false;
            }
            domains.push(d);
        }
        if domains.iter().any(Vec::is_empty) {
            self.fail();
            return false;
        }

        let eval = |e: &LinExpr, at: &[usize]| -> Rational {
            let mut v = e.constant;
            for (k, c) in &e.terms {
                let i = keys.binary_search(k).expect("collected");
                v += *c * domains[i][at[i]];
            }
            v
        };
        // Per unknown, then per solved expression: observed range and
        // whether a single value was seen.
        let mut seen_keys: Vec<Option<(Rational, Rational)>> = vec![None; keys.len()];
        let mut seen_solved: Vec<Option<(Rational, Rational)>> = vec![None; solved.len()];
        let widen = |slot: &mut Option<(Rational, Rational)>, v: Rational| {
            *slot = Some(match *slot {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        };
        let mut at = vec![0usize; keys.len()];
        loop {
            let ok = ineqs.iter().all(|i| {
                let v = eval(&i.expr, &at);
                if i.strict { v.is_positive() } else { !v.is_negative() }
            }) && diseqs.iter().all(|d| !eval(d, &at).is_zero())
                && solved
                    .iter()
                    .all(|(k, e)| !self.is_int(k) || eval(e, &at).is_integer());
            if ok {
                for (i, slot) in seen_keys.iter_mut().enumerate() {
                    widen(slot, domains[i][at[i]]);
                }
                for (j, slot) in seen_solved.iter_mut().enumerate() {
                    widen(slot, eval(&solved[j].1, &at));
                }
            }
            let mut i = 0;
            while i < at.len() {
                at[i] += 1;
                if at[i] < domains[i].len() {
                    break;
                }
                at[i] = 0;
                i += 1;
            }
            if i == at.len() {
                break;
            }
        }

        if seen_keys[0].is_none() {
            self.fail();
            return false;
        }
        let before = (self.bounds.clone(), self.solved.clone());
        for (j, slot) in seen_solved.iter().enumerate() {
            if let Some((lo, hi)) = *slot {
                if lo == hi {
                    let mut e = solved[j].1.clone();
                    e.constant -= lo;
                    self.add_eq(e);
                }
            }
        }
        for (i, slot) in seen_keys.iter().enumerate() {
            if !self.consistent {
                return false;
            }
            let (lo, hi) = slot.expect("some solution");
            self.tighten(keys[i].clone(), true, Bound { value: lo, strict: false });
            self.tighten(keys[i].clone(), false, Bound { value: hi, strict: false });
        }
        self.consistent && (self.bounds.clone(), self.solved.clone()) != before
    }

    /// Inequality rows plus the bounds of every unknown they mention.
    fn fm_rows(&self) -> BTreeSet<Ineq> {
        let mut keys: BTreeSet<Key> = BTreeSet::new();
        for i in &self.ineqs {
            keys.extend(i.expr.terms.keys().cloned());
        }
        let mut rows: BTreeSet<Ineq> = self.ineqs.clone();
        for k in &keys {
            if let Some(b) = self.bounds.get(k) {
                if let Some(lo) = b.lo {
                    let mut e = LinExpr::key(k.clone());
                    e.constant = -lo.value;
                    rows.insert(Ineq {
                        expr: e,
                        strict: lo.strict,
                    });
                }
                if let Some(hi) = b.hi {
                    let mut e = LinExpr::key(k.clone());
                    e.scale(-Rational::one());
                    e.constant = hi.value;
                    rows.insert(Ineq {
                        expr: e,
                        strict: hi.strict,
                    });
                }
            }
        }
        rows
    }

    fn fm_check(&mut self) {
        if !self.consistent || self.ineqs.is_empty() {
            return;
        }
        match fourier_motzkin(self.fm_rows()) {
            Some(true) => {}
            Some(false) => return self.fail(),
            None => {
                self.gave_up = true;
                return;
            }
        }
        if self.propagating {
            return;
        }
        self.propagating = true;
        for _ in 0..PROPAGATION_ROUNDS {
            let before = (self.bounds.clone(), self.solved.len());
            for (k, lower, b) in self.implied_bounds() {
                self.tighten(k, lower, b);
                if !self.consistent {
                    break;
                }
            }
            if !self.consistent || (self.bounds.clone(), self.solved.len()) == before {
                break;
            }
        }
        self.propagating = false;
    }

    /// Bounds on each unknown of a multi-unknown inequality, obtained by
    /// projecting the inequality system onto that unknown.
    fn implied_bounds(&self) -> Vec<(Key, bool, Bound)> {
        let rows = self.fm_rows();
        let keys: BTreeSet<Key> = self
            .ineqs
            .iter()
            .flat_map(|i| i.expr.terms.keys().cloned())
            .collect();
        let mut out = Vec::new();
        for k in keys {
            let Some(Some(left)) = fm_eliminate(rows.clone(), Some(&k)) else {
                continue;
            };
            for r in left {
                let a = r.expr.terms[&k];
                let bound = Bound {
                    value: -r.expr.constant / a,
                    strict: r.strict,
                };
                out.push((k.clone(), a.is_positive(), bound));
            }
        }
        out
    }
}

/// `e > 0` or `e >= 0` over integer unknowns, rescaled to coprime integer
/// coefficients and rounded to an equivalent non-strict row.
fn integer_row(mut e: LinExpr, strict: bool) -> Ineq {
    let lcm = e.terms.values().fold(1i128, |acc, c| num_integer::lcm(acc, *c.denom()));
    e.scale(Rational::from_integer(lcm));
    let gcd = e.terms.values().fold(0i128, |acc, c| num_integer::gcd(acc, *c.numer()));
    e.scale(Rational::new(1, gcd));
    // Sum of terms >= -constant, or > -constant when strict.
    let need = -e.constant;
    let floor = if strict { need.floor() + Rational::one() } else { need.ceil() };
    e.constant = -floor;
    Ineq {
        expr: e,
        strict: false,
    }
}

/// Feasibility of a system of `expr > 0` / `expr >= 0` rows over the
/// rationals. `None` when the row budget is exhausted.
fn fourier_motzkin(rows: BTreeSet<Ineq>) -> Option<bool> {
    fm_eliminate(rows, None).map(|r| r.is_some())
}

/// Eliminates every unknown except `keep`. Returns the rows left over
/// `keep`, `Some(None)` when the system is infeasible, and `None` when the
/// row budget is exhausted.
fn fm_eliminate(mut rows: BTreeSet<Ineq>, keep: Option<&Key>) -> Option<Option<BTreeSet<Ineq>>> {
    loop {
        for r in &rows {
            if r.expr.is_constant() {
                let c = r.expr.constant;
                if (r.strict && !c.is_positive()) || (!r.strict && c.is_negative()) {
                    return Some(None);
                }
            }
        }
        rows.retain(|r| !r.expr.is_constant());
        let mut counts: BTreeMap<&Key, (usize, usize)> = BTreeMap::new();
        for r in &rows {
            for (k, c) in &r.expr.terms {
                if Some(k) == keep {
                    continue;
                }
                let e = counts.entry(k).or_default();
                if c.is_positive() {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let Some(pick) = counts
            .iter()
            .min_by_key(|(_, (p, n))| p * n)
            .map(|(k, _)| (*k).clone())
        else {
            return Some(Some(rows));
        };
        let (with, without): (Vec<Ineq>, Vec<Ineq>) = rows
            .into_iter()
            .partition(|r| r.expr.terms.contains_key(&pick));
        let mut next: BTreeSet<Ineq> = without.into_iter().collect();
        let (pos, neg): (Vec<&Ineq>, Vec<&Ineq>) =
            with.iter().partition(|r| r.expr.terms[&pick].is_positive());
        for p in &pos {
            for n in &neg {
                let cp = p.expr.terms[&pick];
                let cn = -n.expr.terms[&pick];
                let mut e = p.expr.clone();
                e.scale(cn);
                e.add_scaled(&n.expr, cp);
                e.terms.remove(&pick);
                next.insert(Ineq {
                    expr: e.normalized(true),
                    strict: p.strict || n.strict,
                });
            }
        }
        if next.len() > FM_LIMIT {
            return None;
        }
        rows = next;
    }
}

/// Preference when choosing which unknown an equation solves for:
/// engine-generated unknowns go first, element properties last, so that
/// residuals read in terms of user-visible names.
fn pivot_rank(k: &Key) -> u8 {
    match k {
        Key::Prop(Subject::Var(v), _) | Key::Var(v) if v.starts_with('_') => 3,
        Key::Prop(Subject::Var(_) | Subject::Path(_), _) => 2,
        Key::Var(_) => 1,
        Key::Prop(Subject::Node(_) | Subject::Edge(_), _) => 0,
    }
}

fn num_lit(r: Rational) -> Term {
    Term::Lit(Value::from_number(r))
}

fn lin_term<'a>(terms: impl Iterator<Item = (&'a Key, Rational)>) -> Term {
    let mut acc: Option<Term> = None;
    for (k, c) in terms {
        let mag = c.abs();
        let unit = if mag.is_one() {
            k.as_term()
        } else {
            Term::mul(num_lit(mag), k.as_term())
        };
        acc = Some(match acc {
            None if c.is_negative() => Term::mul(num_lit(c), k.as_term()),
            None => unit,
            Some(a) if c.is_negative() => Term::sub(a, unit),
            Some(a) => Term::add(a, unit),
        });
    }
    acc.unwrap_or_else(|| num_lit(Rational::zero()))
}
