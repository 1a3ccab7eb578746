//! A definition recognizing data paths `0 e 0 ... e d` whose last datum is
//! the number of word symbols plus one, which no register automaton
//! recognizes.
//!
//! `length` counts data symbols and `last` carries the final datum back to
//! the front. `parity` is 0 on suffixes starting with a datum and 1 on
//! those starting with a word symbol; it selects which step disjunct
//! applies, so that every datum but the last is forced to 0.

use pathprop::constraint::Filter;
use pathprop::syntax::parse_filters;

use crate::def::DataPathDef;

pub fn witness_def() -> DataPathDef {
    DataPathDef::parse(
        &["length", "last", "parity"],
        &["length", "parity"],
        &["p.length == 1, p.last == x, p.parity == 0"],
        &[
            "p.parity == 0, p'.parity == 1, x == 0, p.length == 1 + p'.length, \
             p.last == p'.last, p'.length > 0",
            "p.parity == 1, p'.parity == 0, p.length == p'.length, \
             p.last == p'.last, p'.length > 0",
        ],
    )
    .expect("witness definition is well formed")
}

/// `w.last == w.length`.
pub fn witness_phi() -> Vec<Filter> {
    parse_filters("w.last == w.length").expect("well formed")
}
