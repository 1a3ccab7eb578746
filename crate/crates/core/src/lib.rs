//! Conjunctive regular path queries over property graphs, extended with
//! path properties that are defined inductively by constraints and solved
//! incrementally during a backtracking search.

pub mod constraint;
pub mod engine;
pub mod fixtures;
pub mod graph;
pub mod graph_json;
pub mod oracle;
pub mod props;
pub mod query;
pub mod regex;
pub mod sample;
pub mod syntax;
pub mod value;

pub use constraint::{
    apply_substitution, Atom, Binding, ConstraintStore, Filter, Key, Pred, Subject, Substitution,
    Term, VarKind,
};
pub use engine::{Answer, Engine, EngineError, PathMode, SolveOptions, SolveOutcome};
pub use graph::{EdgeId, ElementId, GraphPath, NodeId, PropertyGraph};
pub use props::PropertyDef;
pub use query::{Clause, EdgePat, NodePat, Pattern, Query};
pub use regex::{decompose, is_universal_plus, remainder_equiv, Decomposition, Regex};
pub use value::{Rational, Value};
