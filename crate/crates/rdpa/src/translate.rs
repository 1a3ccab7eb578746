//! Simulation of an automaton by a data-path property definition.
//!
//! Properties: `state`, the index of the current state, and `r1..rk`, the
//! register contents. A step disjunct exists per transition; a single-symbol
//! disjunct exists per data transition into a final state. The filter sets
//! the initial state and registers.

use pathprop::constraint::{Filter, Pred, Term};
use pathprop::Value;

use crate::automaton::{Condition, DataTransition, Rdpa, WordTransition};
use crate::def::{DataPathDef, SYMBOL, WHOLE};

/// Value of an unassigned register. Text never equals a datum.
pub const BOTTOM: &str = "⊥";

fn reg(i: usize) -> String {
    format!("r{i}")
}

fn eq(a: Term, b: Term) -> Filter {
    Filter::atom(a, Pred::Eq, b)
}

/// Condition `c` on the datum `x` and the registers of path variable `p`.
fn upsilon(c: &Condition, p: &str) -> Filter {
    let x = || Term::Var(SYMBOL.to_string());
    match c {
        Condition::RegEq(i) => eq(Term::prop(p, &reg(*i)), x()),
        Condition::RegNe(i) => Filter::atom(Term::prop(p, &reg(*i)), Pred::Ne, x()),
        Condition::ValEq(v) => eq(x(), Term::int(*v as i64)),
        Condition::ValNe(v) => Filter::atom(x(), Pred::Ne, Term::int(*v as i64)),
        Condition::And(a, b) => Filter::And(vec![upsilon(a, p), upsilon(b, p)]),
        Condition::Or(a, b) => Filter::not(Filter::And(vec![
            Filter::not(upsilon(a, p)),
            Filter::not(upsilon(b, p)),
        ])),
        Condition::Not(a) => Filter::not(upsilon(a, p)),
    }
}

fn state_is(p: &str, q: usize) -> Filter {
    eq(Term::prop(p, "state"), Term::int(q as i64))
}

fn word_step(a: &Rdpa, t: &WordTransition, p: &str, rest: &str) -> Vec<Filter> {
    let mut c = vec![
        state_is(p, t.from),
        state_is(rest, t.to),
        eq(Term::Var(SYMBOL.to_string()), Term::lit(Value::text(&t.symbol))),
    ];
    for j in 1..=a.registers {
        c.push(eq(Term::prop(rest, &reg(j)), Term::prop(p, &reg(j))));
    }
    c
}

fn data_step(a: &Rdpa, t: &DataTransition, p: &str, rest: &str) -> Vec<Filter> {
    let mut c = vec![state_is(p, t.from), upsilon(&t.condition, p), state_is(rest, t.to)];
    for j in 1..=a.registers {
        let new = if t.update.contains(&j) {
            Term::Var(SYMBOL.to_string())
        } else {
            Term::prop(p, &reg(j))
        };
        c.push(eq(Term::prop(rest, &reg(j)), new));
    }
    c
}

/// The definition and filter recognizing the language of `a`.
pub fn translate(a: &Rdpa) -> (DataPathDef, Vec<Filter>) {
    let p = "p";
    let rest = "p'";
    let mut properties: Vec<String> = vec!["state".to_string()];
    properties.extend((1..=a.registers).map(reg));
    let mut step: Vec<Vec<Filter>> = Vec::new();
    for t in &a.word_transitions {
        step.push(word_step(a, t, p, rest));
    }
    for t in &a.data_transitions {
        step.push(data_step(a, t, p, rest));
    }
    let single = a
        .data_transitions
        .iter()
        .filter(|t| a.finals.contains(&t.to))
        .map(|t| vec![state_is(p, t.from), upsilon(&t.condition, p)])
        .collect();
    let def = DataPathDef {
        properties: properties.into_iter().collect(),
        integer_properties: ["state".to_string()].into(),
        path_var: p.to_string(),
        single,
        step,
    };
    let mut phi = vec![state_is(WHOLE, a.initial)];
    for (j, v) in a.tau0.iter().enumerate() {
        let init = match v {
            Some(d) => Term::int(*d as i64),
            None => Term::lit(Value::text(BOTTOM)),
        };
        phi.push(eq(Term::prop(WHOLE, &reg(j + 1)), init));
    }
    (def, phi)
}
