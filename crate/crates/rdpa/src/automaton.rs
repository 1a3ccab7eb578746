//! Register data path automata and their configuration semantics.
//!
//! Register indices are 1-based, as in `x_i`. An unassigned register holds
//! `None` and differs from every datum.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::path::{DataPath, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// Register `i` holds the datum just read.
    RegEq(usize),
    RegNe(usize),
    /// The datum just read is the constant.
    ValEq(u64),
    ValNe(u64),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn and(a: Condition, b: Condition) -> Condition {
        Condition::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Condition, b: Condition) -> Condition {
        Condition::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Condition) -> Condition {
        Condition::Not(Box::new(a))
    }

    /// A condition every datum satisfies, phrased with register 1 or, with
    /// no registers, with the constant 0.
    pub fn always(registers: usize) -> Condition {
        if registers > 0 {
            Condition::or(Condition::RegEq(1), Condition::RegNe(1))
        } else {
            Condition::or(Condition::ValEq(0), Condition::ValNe(0))
        }
    }

    pub fn holds(&self, d: u64, regs: &[Option<u64>]) -> bool {
        match self {
            Condition::RegEq(i) => regs[i - 1] == Some(d),
            Condition::RegNe(i) => regs[i - 1] != Some(d),
            Condition::ValEq(v) => d == *v,
            Condition::ValNe(v) => d != *v,
            Condition::And(a, b) => a.holds(d, regs) && b.holds(d, regs),
            Condition::Or(a, b) => a.holds(d, regs) || b.holds(d, regs),
            Condition::Not(a) => !a.holds(d, regs),
        }
    }

    pub fn registers(&self) -> BTreeSet<usize> {
        match self {
            Condition::RegEq(i) | Condition::RegNe(i) => BTreeSet::from([*i]),
            Condition::ValEq(_) | Condition::ValNe(_) => BTreeSet::new(),
            Condition::And(a, b) | Condition::Or(a, b) => &a.registers() | &b.registers(),
            Condition::Not(a) => a.registers(),
        }
    }

    /// Prefix notation: `["or", ["reg=", 1], ["val!=", 3]]`.
    pub fn to_json(&self) -> Json {
        match self {
            Condition::RegEq(i) => json!(["reg=", i]),
            Condition::RegNe(i) => json!(["reg!=", i]),
            Condition::ValEq(v) => json!(["val=", v]),
            Condition::ValNe(v) => json!(["val!=", v]),
            Condition::And(a, b) => json!(["and", a.to_json(), b.to_json()]),
            Condition::Or(a, b) => json!(["or", a.to_json(), b.to_json()]),
            Condition::Not(a) => json!(["not", a.to_json()]),
        }
    }

    pub fn from_json(j: &Json) -> Result<Condition, AutomatonError> {
        let bad = || AutomatonError::Json(format!("malformed condition {j}"));
        let items = j.as_array().ok_or_else(bad)?;
        let op = items.first().and_then(Json::as_str).ok_or_else(bad)?;
        let num = |k: usize| items.get(k).and_then(Json::as_u64).ok_or_else(bad);
        let sub = |k: usize| items.get(k).ok_or_else(bad).and_then(Condition::from_json);
        let arity = match op {
            "and" | "or" => 3,
            _ => 2,
        };
        if items.len() != arity {
            return Err(bad());
        }
        Ok(match op {
            "reg=" => Condition::RegEq(num(1)? as usize),
            "reg!=" => Condition::RegNe(num(1)? as usize),
            "val=" => Condition::ValEq(num(1)?),
            "val!=" => Condition::ValNe(num(1)?),
            "and" => Condition::and(sub(1)?, sub(2)?),
            "or" => Condition::or(sub(1)?, sub(2)?),
            "not" => Condition::not(sub(1)?),
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::RegEq(i) => write!(f, "x{i}="),
            Condition::RegNe(i) => write!(f, "x{i}≠"),
            Condition::ValEq(v) => write!(f, "{v}="),
            Condition::ValNe(v) => write!(f, "{v}≠"),
            Condition::And(a, b) => write!(f, "({a} ∧ {b})"),
            Condition::Or(a, b) => write!(f, "({a} ∨ {b})"),
            Condition::Not(a) => write!(f, "¬{a}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateKind {
    Data,
    Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordTransition {
    pub from: usize,
    pub symbol: String,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataTransition {
    pub from: usize,
    pub condition: Condition,
    /// Registers overwritten with the datum read.
    pub update: BTreeSet<usize>,
    pub to: usize,
}

/// States are indices into `states`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rdpa {
    pub states: Vec<(String, StateKind)>,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
    pub registers: usize,
    pub tau0: Vec<Option<u64>>,
    pub word_transitions: Vec<WordTransition>,
    pub data_transitions: Vec<DataTransition>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("state index {0} out of range")]
    NoState(usize),
    #[error("initial state `{0}` is not a data state")]
    InitialNotData(String),
    #[error("final state `{0}` is not a word state")]
    FinalNotWord(String),
    #[error("transition from `{from}` to `{to}` does not respect the state partition")]
    Partition { from: String, to: String },
    #[error("register {0} out of range")]
    Register(usize),
    #[error("initial assignment has {found} registers, expected {expected}")]
    Tau0 { expected: usize, found: usize },
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("malformed automaton document: {0}")]
    Json(String),
}

impl Rdpa {
    pub fn validate(&self) -> Result<(), AutomatonError> {
        let n = self.states.len();
        let kind = |s: usize| self.states.get(s).map(|x| x.1).ok_or(AutomatonError::NoState(s));
        let name = |s: usize| self.states[s].0.clone();
        let mut names = BTreeSet::new();
        for (s, _) in &self.states {
            if !names.insert(s) {
                return Err(AutomatonError::DuplicateState(s.clone()));
            }
        }
        if kind(self.initial)? != StateKind::Data {
            return Err(AutomatonError::InitialNotData(name(self.initial)));
        }
        for &f in &self.finals {
            if kind(f)? != StateKind::Word {
                return Err(AutomatonError::FinalNotWord(name(f)));
            }
        }
        if self.tau0.len() != self.registers {
            return Err(AutomatonError::Tau0 {
                expected: self.registers,
                found: self.tau0.len(),
            });
        }
        let partition = |from: usize, want_from: StateKind, to: usize| -> Result<(), AutomatonError> {
            if from >= n {
                return Err(AutomatonError::NoState(from));
            }
            if to >= n {
                return Err(AutomatonError::NoState(to));
            }
            if kind(from)? != want_from || kind(to)? == want_from {
                return Err(AutomatonError::Partition {
                    from: name(from),
                    to: name(to),
                });
            }
            Ok(())
        };
        for t in &self.word_transitions {
            partition(t.from, StateKind::Word, t.to)?;
        }
        for t in &self.data_transitions {
            partition(t.from, StateKind::Data, t.to)?;
            for &r in t.update.iter().chain(&t.condition.registers()) {
                if r == 0 || r > self.registers {
                    return Err(AutomatonError::Register(r));
                }
            }
        }
        Ok(())
    }

    /// Whether some run from the initial configuration reads all of `w`
    /// and ends in a final state.
    pub fn accepts(&self, w: &DataPath) -> bool {
        let mut configs: BTreeSet<(usize, Vec<Option<u64>>)> =
            BTreeSet::from([(self.initial, self.tau0.clone())]);
        for sym in w.symbols() {
            let mut next = BTreeSet::new();
            for (q, regs) in &configs {
                match sym {
                    Symbol::Word(e) => {
                        for t in &self.word_transitions {
                            if t.from == *q && t.symbol == *e {
                                next.insert((t.to, regs.clone()));
                            }
                        }
                    }
                    Symbol::Data(d) => {
                        for t in &self.data_transitions {
                            if t.from == *q && t.condition.holds(*d, regs) {
                                let mut r = regs.clone();
                                for &i in &t.update {
                                    r[i - 1] = Some(*d);
                                }
                                next.insert((t.to, r));
                            }
                        }
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            configs = next;
        }
        configs.iter().any(|(q, _)| self.finals.contains(q))
    }

    /// Word symbols used by the transitions.
    pub fn alphabet(&self) -> BTreeSet<String> {
        self.word_transitions.iter().map(|t| t.symbol.clone()).collect()
    }

    pub fn to_json(&self) -> Json {
        let name = |s: usize| self.states[s].0.clone();
        json!({
            "registers": self.registers,
            "initial": name(self.initial),
            "states": self.states.iter().enumerate().map(|(i, (n, k))| json!({
                "name": n,
                "kind": match k { StateKind::Data => "data", StateKind::Word => "word" },
                "final": self.finals.contains(&i),
            })).collect::<Vec<_>>(),
            "tau0": self.tau0,
            "word_transitions": self.word_transitions.iter().map(|t| json!({
                "from": name(t.from), "symbol": t.symbol, "to": name(t.to),
            })).collect::<Vec<_>>(),
            "data_transitions": self.data_transitions.iter().map(|t| json!({
                "from": name(t.from),
                "condition": t.condition.to_json(),
                "update": t.update,
                "to": name(t.to),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(j: &Json) -> Result<Rdpa, AutomatonError> {
        let bad = |what: &str| AutomatonError::Json(what.to_string());
        let obj = j.as_object().ok_or_else(|| bad("expected an object"))?;
        let field = |k: &str| obj.get(k).ok_or_else(|| bad(&format!("missing `{k}`")));
        let list = |k: &str| -> Result<Vec<Json>, AutomatonError> {
            Ok(obj.get(k).and_then(Json::as_array).cloned().unwrap_or_default())
        };
        let text = |j: &Json, k: &str| -> Result<String, AutomatonError> {
            j.get(k)
                .and_then(Json::as_str)
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("missing string `{k}`")))
        };
        let mut states = Vec::new();
        let mut finals = BTreeSet::new();
        for (i, s) in field("states")?.as_array().ok_or_else(|| bad("`states` must be a list"))?.iter().enumerate() {
            let kind = match text(s, "kind")?.as_str() {
                "data" => StateKind::Data,
                "word" => StateKind::Word,
                k => return Err(bad(&format!("unknown state kind `{k}`"))),
            };
            if s.get("final").and_then(Json::as_bool).unwrap_or(false) {
                finals.insert(i);
            }
            states.push((text(s, "name")?, kind));
        }
        let index = |n: &str| {
            states
                .iter()
                .position(|(s, _)| s == n)
                .ok_or_else(|| bad(&format!("unknown state `{n}`")))
        };
        let registers = field("registers")?.as_u64().ok_or_else(|| bad("`registers` must be a count"))? as usize;
        let tau0 = list("tau0")?
            .iter()
            .map(|v| match v {
                Json::Null => Ok(None),
                v => v.as_u64().map(Some).ok_or_else(|| bad("`tau0` holds naturals or null")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut word_transitions = Vec::new();
        for t in list("word_transitions")? {
            word_transitions.push(WordTransition {
                from: index(&text(&t, "from")?)?,
                symbol: text(&t, "symbol")?,
                to: index(&text(&t, "to")?)?,
            });
        }
        let mut data_transitions = Vec::new();
        for t in list("data_transitions")? {
            let update = t
                .get("update")
                .and_then(Json::as_array)
                .cloned()
                .unwrap_or_default()
                .iter()
                .map(|r| r.as_u64().map(|r| r as usize).ok_or_else(|| bad("`update` holds register indices")))
                .collect::<Result<_, _>>()?;
            data_transitions.push(DataTransition {
                from: index(&text(&t, "from")?)?,
                condition: Condition::from_json(t.get("condition").ok_or_else(|| bad("missing `condition`"))?)?,
                update,
                to: index(&text(&t, "to")?)?,
            });
        }
        let a = Rdpa {
            initial: index(&text(j, "initial")?)?,
            states,
            finals,
            registers,
            tau0,
            word_transitions,
            data_transitions,
        };
        a.validate()?;
        Ok(a)
    }
}

/// One register holding the first datum; accepts exactly the data paths
/// whose last datum equals the first.
pub fn a_eq(alphabet: &[&str]) -> Rdpa {
    let states = vec![
        ("q0".to_string(), StateKind::Data),
        ("w1".to_string(), StateKind::Word),
        ("q1".to_string(), StateKind::Data),
        ("wf".to_string(), StateKind::Word),
    ];
    let word_transitions = alphabet
        .iter()
        .map(|e| WordTransition {
            from: 1,
            symbol: e.to_string(),
            to: 2,
        })
        .collect();
    let data_transitions = vec![
        DataTransition {
            from: 0,
            condition: Condition::always(1),
            update: BTreeSet::from([1]),
            to: 1,
        },
        DataTransition {
            from: 2,
            condition: Condition::always(1),
            update: BTreeSet::new(),
            to: 1,
        },
        DataTransition {
            from: 2,
            condition: Condition::RegEq(1),
            update: BTreeSet::new(),
            to: 3,
        },
    ];
    Rdpa {
        states,
        initial: 0,
        finals: BTreeSet::from([3]),
        registers: 1,
        tau0: vec![None],
        word_transitions,
        data_transitions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_eq_traces() {
        let a = a_eq(&["a", "b"]);
        a.validate().unwrap();
        assert!(a.accepts(&"5·a·5".parse().unwrap()));
        assert!(!a.accepts(&"5·a·6".parse().unwrap()));
        assert!(a.accepts(&"5·a·1·b·5".parse().unwrap()));
        assert!(!a.accepts(&"5·c·5".parse().unwrap()));
    }

    #[test]
    fn json_round_trip() {
        let a = a_eq(&["a"]);
        let back = Rdpa::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn partition_is_checked() {
        let mut a = a_eq(&["a"]);
        a.data_transitions[0].to = 2;
        assert!(matches!(a.validate(), Err(AutomatonError::Partition { .. })));
        let mut a = a_eq(&["a"]);
        a.data_transitions[0].update.insert(2);
        assert_eq!(a.validate(), Err(AutomatonError::Register(2)));
        let mut a = a_eq(&["a"]);
        a.finals.insert(0);
        assert!(matches!(a.validate(), Err(AutomatonError::FinalNotWord(_))));
    }

    #[test]
    fn unassigned_registers_differ_from_every_datum() {
        assert!(Condition::RegNe(1).holds(0, &[None]));
        assert!(!Condition::RegEq(1).holds(0, &[None]));
    }
}
