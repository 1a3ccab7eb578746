//! Register data path automata, property definitions over data paths, and
//! the translation of the former into the latter.

pub mod automaton;
pub mod check;
pub mod def;
pub mod path;
pub mod sample;
pub mod translate;
pub mod witness;

pub use automaton::{a_eq, AutomatonError, Condition, DataTransition, Rdpa, StateKind, WordTransition};
pub use check::{check_translation, for_each_path, recognized_paths, Disagreement};
pub use def::{data_constr, recognized, Branches, DataPathDef, DefError};
pub use path::{DataPath, PathError, Symbol};
pub use translate::{translate, BOTTOM};
pub use witness::{witness_def, witness_phi};
