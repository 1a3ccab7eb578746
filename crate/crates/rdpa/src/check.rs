//! Exhaustive comparison of automaton acceptance with recognition by the
//! translated definition, sharing branch sets between paths with a common
//! prefix.

use pathprop::constraint::Filter;

use crate::automaton::Rdpa;
use crate::def::{Branches, DataPathDef};
use crate::path::{DataPath, Symbol};
use crate::translate::translate;

/// A data path on which the automaton and its translation disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub path: DataPath,
    pub accepted: bool,
    pub recognized: bool,
}

/// Calls `visit(path, recognized)` for every data path with
/// `3..=max_positions` positions. Prefixes whose branch set is empty are
/// still expanded, since every path must be visited.
pub fn for_each_path(
    def: &DataPathDef,
    phi: &[Filter],
    alphabet: &[&str],
    data: &[u64],
    max_positions: usize,
    visit: &mut impl FnMut(&DataPath, bool),
) {
    fn go(
        def: &DataPathDef,
        alphabet: &[&str],
        data: &[u64],
        max: usize,
        prefix: &mut Vec<Symbol>,
        branches: &Branches,
        visit: &mut impl FnMut(&DataPath, bool),
    ) {
        for &d in data {
            let sym = Symbol::Data(d);
            if !prefix.is_empty() {
                let rec = !branches.is_empty() && !branches.finish(def, &sym).is_empty();
                prefix.push(sym.clone());
                let p = DataPath::new(prefix.clone()).expect("alternating by construction");
                visit(&p, rec);
                prefix.pop();
            }
            if prefix.len() + 3 > max {
                continue;
            }
            let after = branches.step(def, &sym).compact(def);
            prefix.push(sym);
            for e in alphabet {
                let sym = Symbol::word(e);
                let next = after.step(def, &sym).compact(def);
                prefix.push(sym);
                go(def, alphabet, data, max, prefix, &next, visit);
                prefix.pop();
            }
            prefix.pop();
        }
    }
    let start = Branches::start(def, phi);
    go(def, alphabet, data, max_positions, &mut Vec::new(), &start, visit);
}

/// Data paths recognized by `def` and `phi`. A prefix with no branch left
/// is not expanded: adding constraints cannot restore consistency.
pub fn recognized_paths(
    def: &DataPathDef,
    phi: &[Filter],
    alphabet: &[&str],
    data: &[u64],
    max_positions: usize,
) -> Vec<DataPath> {
    fn go(
        def: &DataPathDef,
        alphabet: &[&str],
        data: &[u64],
        max: usize,
        prefix: &mut Vec<Symbol>,
        branches: &Branches,
        out: &mut Vec<DataPath>,
    ) {
        if branches.is_empty() {
            return;
        }
        for &d in data {
            let sym = Symbol::Data(d);
            if !prefix.is_empty() && !branches.finish(def, &sym).is_empty() {
                let mut p = prefix.clone();
                p.push(sym.clone());
                out.push(DataPath::new(p).expect("alternating by construction"));
            }
            if prefix.len() + 3 > max {
                continue;
            }
            let after = branches.step(def, &sym).compact(def);
            prefix.push(sym);
            for e in alphabet {
                let sym = Symbol::word(e);
                let next = after.step(def, &sym).compact(def);
                prefix.push(sym);
                go(def, alphabet, data, max, prefix, &next, out);
                prefix.pop();
            }
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let start = Branches::start(def, phi);
    go(def, alphabet, data, max_positions, &mut Vec::new(), &start, &mut out);
    out
}

/// Compares `a.accepts` with recognition by `translate(a)` on every data
/// path up to `max_positions`. Returns the number of paths compared.
pub fn check_translation(
    a: &Rdpa,
    alphabet: &[&str],
    data: &[u64],
    max_positions: usize,
) -> Result<usize, Disagreement> {
    let (def, phi) = translate(a);
    let mut count = 0;
    let mut bad = None;
    for_each_path(&def, &phi, alphabet, data, max_positions, &mut |p, rec| {
        count += 1;
        let acc = a.accepts(p);
        if acc != rec && bad.is_none() {
            bad = Some(Disagreement {
                path: p.clone(),
                accepted: acc,
                recognized: rec,
            });
        }
    });
    match bad {
        Some(d) => Err(d),
        None => Ok(count),
    }
}
