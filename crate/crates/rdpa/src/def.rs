//! Property definitions over data paths and recognition by branch sets.
//!
//! A data path has two unfoldings: a single symbol `x`, and a symbol `x`
//! followed by the rest `p'`. Each case is a disjunction of constraint
//! conjunctions. Disjunctions are executed by branching: every branch is
//! one consistent store, and a branch is dropped as soon as it becomes
//! inconsistent.
//!
//! The suffix of a data path starting at position `i` is named `w{i}` in
//! the stores.

use std::collections::{BTreeMap, BTreeSet};

use pathprop::constraint::{apply_substitution, Binding, ConstraintStore, Filter, Key, Subject, Substitution};
use pathprop::syntax::{parse_filters, SyntaxError};
use pathprop::Value;
use thiserror::Error;

use crate::path::Symbol;

/// The symbol variable of both unfoldings.
pub const SYMBOL: &str = "x";
/// The variable naming the whole data path inside a filter `Φ`.
pub const WHOLE: &str = "w";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DefError {
    #[error("variable `{0}` is not available here")]
    UnknownVariable(String),
    #[error("property `{0}` is not declared")]
    UndeclaredProperty(String),
    #[error("data path is empty")]
    Empty,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataPathDef {
    pub properties: BTreeSet<String>,
    pub integer_properties: BTreeSet<String>,
    pub path_var: String,
    /// Disjuncts for a single remaining symbol.
    pub single: Vec<Vec<Filter>>,
    /// Disjuncts for a symbol followed by the rest of the path.
    pub step: Vec<Vec<Filter>>,
}

/// Name of the suffix starting at position `i`.
pub fn suffix_key(i: usize) -> String {
    format!("w{i}")
}

impl DataPathDef {
    /// Builds a definition on path variable `p` whose disjuncts are filter
    /// lists in query syntax.
    pub fn parse(
        properties: &[&str],
        integer_properties: &[&str],
        single: &[&str],
        step: &[&str],
    ) -> Result<DataPathDef, DefError> {
        let parse = |cases: &[&str]| -> Result<Vec<Vec<Filter>>, DefError> {
            cases.iter().map(|c| Ok(parse_filters(c)?)).collect()
        };
        let def = DataPathDef {
            properties: properties.iter().map(|s| s.to_string()).collect(),
            integer_properties: integer_properties.iter().map(|s| s.to_string()).collect(),
            path_var: "p".to_string(),
            single: parse(single)?,
            step: parse(step)?,
        };
        def.validate()?;
        Ok(def)
    }

    pub fn rest_var(&self) -> String {
        format!("{}'", self.path_var)
    }

    fn check(&self, f: &Filter, subjects: &[&str], values: &[&str]) -> Result<(), DefError> {
        for (v, k) in f.var_props() {
            if !subjects.contains(&v.as_str()) {
                return Err(DefError::UnknownVariable(v));
            }
            if !self.properties.contains(&k) {
                return Err(DefError::UndeclaredProperty(k));
            }
        }
        for v in f.value_vars() {
            if !values.contains(&v.as_str()) {
                return Err(DefError::UnknownVariable(v));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), DefError> {
        let rest = self.rest_var();
        for f in self.single.iter().flatten() {
            self.check(f, &[&self.path_var], &[SYMBOL])?;
        }
        for f in self.step.iter().flatten() {
            self.check(f, &[&self.path_var, &rest], &[SYMBOL])?;
        }
        Ok(())
    }

    /// Checks a filter over the whole path `w`.
    pub fn validate_phi(&self, phi: &[Filter]) -> Result<(), DefError> {
        phi.iter().try_for_each(|f| self.check(f, &[WHOLE], &[]))
    }

    pub fn store(&self) -> ConstraintStore {
        ConstraintStore::with_integer_props(self.integer_properties.iter().cloned())
    }

    /// The grounded disjuncts for position `i` of a path with `n` symbols:
    /// the single-symbol case at the last position, the step case before.
    pub fn position_constraints(&self, sym: &Symbol, i: usize, last: bool) -> Vec<Vec<Filter>> {
        let mut s = Substitution::new()
            .with(SYMBOL, Binding::Value(sym.value()))
            .with(&self.path_var, Binding::Path(suffix_key(i)));
        let cases = if last {
            &self.single
        } else {
            s.bind(&self.rest_var(), Binding::Path(suffix_key(i + 1)));
            &self.step
        };
        cases
            .iter()
            .map(|c| {
                c.iter()
                    .map(|f| apply_substitution(f, &s).expect("renaming onto paths and values"))
                    .collect()
            })
            .collect()
    }
}

/// `Φ` with `w` naming the path that starts at position 0.
pub fn ground_phi(phi: &[Filter]) -> Vec<Filter> {
    let s = Substitution::new().with(WHOLE, Binding::Path(suffix_key(0)));
    phi.iter()
        .map(|f| apply_substitution(f, &s).expect("renaming onto a path"))
        .collect()
}

/// The consistent branches after reading a prefix of a data path.
#[derive(Clone, Debug)]
pub struct Branches {
    stores: Vec<ConstraintStore>,
    pos: usize,
}

impl Branches {
    /// Branches before position 0, seeded with the grounded `phi`.
    pub fn start(def: &DataPathDef, phi: &[Filter]) -> Branches {
        let s = def.store().add_all(&ground_phi(phi)).expect("fresh store");
        Branches {
            stores: if s.is_consistent() { vec![s] } else { Vec::new() },
            pos: 0,
        }
    }

    pub fn stores(&self) -> &[ConstraintStore] {
        &self.stores
    }

    pub fn is_empty(&self) -> bool {
        self.stores.is_empty()
    }

    /// Position of the next symbol.
    pub fn position(&self) -> usize {
        self.pos
    }

    fn cross(&self, cases: &[Vec<Filter>]) -> Vec<ConstraintStore> {
        let mut out: Vec<ConstraintStore> = Vec::new();
        for s in &self.stores {
            for c in cases {
                let t = s.add_all(c).expect("branches are consistent");
                if t.is_consistent() && !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Reads `sym` as a non-final symbol.
    pub fn step(&self, def: &DataPathDef, sym: &Symbol) -> Branches {
        Branches {
            stores: self.cross(&def.position_constraints(sym, self.pos, false)),
            pos: self.pos + 1,
        }
    }

    /// Reads `sym` as the final symbol.
    pub fn finish(&self, def: &DataPathDef, sym: &Symbol) -> Vec<ConstraintStore> {
        self.cross(&def.position_constraints(sym, self.pos, true))
    }

    /// Keeps one branch among those entailing the same value for every
    /// property of the suffix about to be read. Later positions only
    /// mention that suffix and newer ones, so such branches have the same
    /// continuations.
    pub fn compact(mut self, def: &DataPathDef) -> Branches {
        let front = Subject::Path(suffix_key(self.pos));
        let mut seen: BTreeSet<BTreeMap<String, Value>> = BTreeSet::new();
        self.stores.retain(|s| {
            let sig: Option<BTreeMap<String, Value>> = def
                .properties
                .iter()
                .map(|k| {
                    s.entailed_value(&Key::Prop(front.clone(), k.clone()))
                        .map(|v| (k.clone(), v))
                })
                .collect();
            match sig {
                Some(sig) => seen.insert(sig),
                None => true,
            }
        });
        self
    }
}

/// The branch set of `w` under `def`.
pub fn data_constr(def: &DataPathDef, w: &[Symbol]) -> Result<Vec<ConstraintStore>, DefError> {
    let (last, init) = w.split_last().ok_or(DefError::Empty)?;
    let mut b = Branches::start(def, &[]);
    for sym in init {
        b = b.step(def, sym);
    }
    Ok(b.finish(def, last))
}

/// Whether `Constr(def, w) ∪ phi` is consistent, decided branch by branch.
pub fn recognized(def: &DataPathDef, phi: &[Filter], w: &[Symbol]) -> bool {
    let Some((last, init)) = w.split_last() else {
        return false;
    };
    let mut b = Branches::start(def, phi);
    for sym in init {
        if b.is_empty() {
            return false;
        }
        b = b.step(def, sym).compact(def);
    }
    !b.finish(def, last).is_empty()
}
