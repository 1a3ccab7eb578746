//! Data paths: alternating data and word symbols, starting and ending with
//! data.

use std::fmt;
use std::str::FromStr;

use pathprop::Value;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Data(u64),
    Word(String),
}

impl Symbol {
    pub fn word(s: &str) -> Symbol {
        Symbol::Word(s.to_string())
    }

    pub fn is_data(&self) -> bool {
        matches!(self, Symbol::Data(_))
    }

    /// The value a constraint sees for this symbol.
    pub fn value(&self) -> Value {
        match self {
            Symbol::Data(d) => Value::Int(*d as i64),
            Symbol::Word(w) => Value::Text(w.clone()),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Data(d) => write!(f, "{d}"),
            Symbol::Word(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("a data path needs at least one word symbol between two data symbols")]
    TooShort,
    #[error("position {0} should hold a data symbol")]
    ExpectedData(usize),
    #[error("position {0} should hold a word symbol")]
    ExpectedWord(usize),
    #[error("empty symbol at position {0}")]
    Empty(usize),
}

/// `d0 e1 d2 ... e(n-1) dn` with at least one word symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DataPath(Vec<Symbol>);

impl DataPath {
    pub fn new(symbols: Vec<Symbol>) -> Result<DataPath, PathError> {
        if symbols.len() < 3 {
            return Err(PathError::TooShort);
        }
        for (i, s) in symbols.iter().enumerate() {
            match (i % 2 == 0, s) {
                (true, Symbol::Word(_)) => return Err(PathError::ExpectedData(i)),
                (false, Symbol::Data(_)) => return Err(PathError::ExpectedWord(i)),
                (false, Symbol::Word(w)) if w.is_empty() => return Err(PathError::Empty(i)),
                _ => {}
            }
        }
        if symbols.len().is_multiple_of(2) {
            return Err(PathError::ExpectedData(symbols.len()));
        }
        Ok(DataPath(symbols))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn word_count(&self) -> usize {
        self.0.len() / 2
    }

    /// Every data path with `3..=max_positions` positions over the given
    /// word alphabet and data values.
    pub fn all(alphabet: &[&str], data: &[u64], max_positions: usize) -> Vec<DataPath> {
        let mut out = Vec::new();
        let mut layer: Vec<Vec<Symbol>> = data.iter().map(|d| vec![Symbol::Data(*d)]).collect();
        while layer[0].len() + 2 <= max_positions {
            let mut next = Vec::new();
            for p in &layer {
                for e in alphabet {
                    for d in data {
                        let mut q = p.clone();
                        q.push(Symbol::word(e));
                        q.push(Symbol::Data(*d));
                        next.push(q);
                    }
                }
            }
            out.extend(next.iter().cloned().map(DataPath));
            layer = next;
            if layer.is_empty() {
                break;
            }
        }
        out
    }
}

impl std::ops::Deref for DataPath {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl fmt::Display for DataPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Parses `5·a·5`, `5 a 5` or `5.a.5`.
impl FromStr for DataPath {
    type Err = PathError;

    fn from_str(s: &str) -> Result<DataPath, PathError> {
        let symbols = s
            .split(|c: char| c == '·' || c == '.' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<u64>() {
                Ok(d) => Symbol::Data(d),
                Err(_) => Symbol::word(t),
            })
            .collect();
        DataPath::new(symbols)
    }
}
