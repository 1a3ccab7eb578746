//! Regular expressions over edge labels and their Brzozowski derivatives.
//!
//! The language of an expression never contains the empty word: `L(α)` is
//! the standard language minus ε. `Empty` and `Epsilon` only arise from
//! taking derivatives; the concrete syntax cannot produce them.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regex {
    Empty,
    Epsilon,
    Symbol(String),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Union(Box<Regex>, Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegexError {
    #[error("regular expression denotes no nonempty word")]
    Uninhabited,
    #[error("regex syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("derivative automaton exceeded {0} states")]
    TooLarge(usize),
}

const STATE_LIMIT: usize = 20_000;

/// The disjunctive decomposition of a language:
/// `L(α) = ⋃_{a∈s0} {a} ∪ ⋃_{b∈s1} b·L(rem[b])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub s0: BTreeSet<String>,
    pub s1: BTreeSet<String>,
    pub rem: BTreeMap<String, Regex>,
}

impl Regex {
    pub fn sym(s: &str) -> Regex {
        Regex::Symbol(s.to_string())
    }

    /// Normalizing union: flattened, sorted, deduplicated, `Empty` dropped.
    pub fn union(a: Regex, b: Regex) -> Regex {
        let mut alts = BTreeSet::new();
        a.collect_alts(&mut alts);
        b.collect_alts(&mut alts);
        alts.remove(&Regex::Empty);
        let mut it = alts.into_iter().rev();
        let Some(mut acc) = it.next() else {
            return Regex::Empty;
        };
        for r in it {
            acc = Regex::Union(Box::new(r), Box::new(acc));
        }
        acc
    }

    fn collect_alts(self, out: &mut BTreeSet<Regex>) {
        match self {
            Regex::Union(a, b) => {
                a.collect_alts(out);
                b.collect_alts(out);
            }
            r => {
                out.insert(r);
            }
        }
    }

    /// Normalizing concatenation (right-associated, units absorbed).
    pub fn concat(a: Regex, b: Regex) -> Regex {
        match (a, b) {
            (Regex::Empty, _) | (_, Regex::Empty) => Regex::Empty,
            (Regex::Epsilon, r) | (r, Regex::Epsilon) => r,
            (Regex::Concat(x, y), r) => Regex::concat(*x, Regex::concat(*y, r)),
            (a, b) => Regex::Concat(Box::new(a), Box::new(b)),
        }
    }

    pub fn star(r: Regex) -> Regex {
        match r {
            Regex::Empty | Regex::Epsilon => Regex::Epsilon,
            Regex::Star(x) | Regex::Plus(x) => Regex::Star(x),
            r => Regex::Star(Box::new(r)),
        }
    }

    pub fn plus(r: Regex) -> Regex {
        match r {
            Regex::Empty => Regex::Empty,
            Regex::Epsilon => Regex::Epsilon,
            s @ Regex::Star(_) => s,
            p @ Regex::Plus(_) => p,
            r => Regex::Plus(Box::new(r)),
        }
    }

    /// Rebuilds the expression bottom-up with the normalizing constructors.
    pub fn normalize(&self) -> Regex {
        match self {
            Regex::Empty | Regex::Epsilon | Regex::Symbol(_) => self.clone(),
            Regex::Star(r) => Regex::star(r.normalize()),
            Regex::Plus(r) => Regex::plus(r.normalize()),
            Regex::Union(a, b) => Regex::union(a.normalize(), b.normalize()),
            Regex::Concat(a, b) => Regex::concat(a.normalize(), b.normalize()),
        }
    }

    /// Whether the standard language contains ε.
    pub fn nullable(&self) -> bool {
        match self {
            Regex::Empty | Regex::Symbol(_) => false,
            Regex::Epsilon | Regex::Star(_) => true,
            Regex::Plus(r) => r.nullable(),
            Regex::Union(a, b) => a.nullable() || b.nullable(),
            Regex::Concat(a, b) => a.nullable() && b.nullable(),
        }
    }

    /// Whether the standard language is nonempty.
    fn inhabited(&self) -> bool {
        match self {
            Regex::Empty => false,
            Regex::Epsilon | Regex::Symbol(_) | Regex::Star(_) => true,
            Regex::Plus(r) => r.inhabited(),
            Regex::Union(a, b) => a.inhabited() || b.inhabited(),
            Regex::Concat(a, b) => a.inhabited() && b.inhabited(),
        }
    }

    /// Whether the language contains a nonempty word.
    pub fn productive(&self) -> bool {
        match self {
            Regex::Empty | Regex::Epsilon => false,
            Regex::Symbol(_) => true,
            Regex::Star(r) | Regex::Plus(r) => r.productive(),
            Regex::Union(a, b) => a.productive() || b.productive(),
            Regex::Concat(a, b) => {
                (a.productive() && b.inhabited()) || (a.inhabited() && b.productive())
            }
        }
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Regex::Empty | Regex::Epsilon => {}
            Regex::Symbol(s) => {
                out.insert(s.clone());
            }
            Regex::Star(r) | Regex::Plus(r) => r.collect_symbols(out),
            Regex::Union(a, b) | Regex::Concat(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// Simplified derivative with respect to `a`.
    pub fn derive(&self, a: &str) -> Regex {
        match self {
            Regex::Empty | Regex::Epsilon => Regex::Empty,
            Regex::Symbol(s) => {
                if s == a {
                    Regex::Epsilon
                } else {
                    Regex::Empty
                }
            }
            Regex::Union(x, y) => Regex::union(x.derive(a), y.derive(a)),
            Regex::Concat(x, y) => {
                let left = Regex::concat(x.derive(a), (**y).clone());
                if x.nullable() {
                    Regex::union(left, y.derive(a))
                } else {
                    left
                }
            }
            Regex::Star(r) | Regex::Plus(r) => {
                Regex::concat(r.derive(a), Regex::star((**r).clone()))
            }
        }
    }

    /// Textbook derivative with no simplification at all.
    pub fn derive_raw(&self, a: &str) -> Regex {
        match self {
            Regex::Empty | Regex::Epsilon => Regex::Empty,
            Regex::Symbol(s) => {
                if s == a {
                    Regex::Epsilon
                } else {
                    Regex::Empty
                }
            }
            Regex::Union(x, y) => {
                Regex::Union(Box::new(x.derive_raw(a)), Box::new(y.derive_raw(a)))
            }
            Regex::Concat(x, y) => {
                let left = Regex::Concat(Box::new(x.derive_raw(a)), y.clone());
                if x.nullable() {
                    Regex::Union(Box::new(left), Box::new(y.derive_raw(a)))
                } else {
                    left
                }
            }
            Regex::Star(r) | Regex::Plus(r) => {
                Regex::Concat(Box::new(r.derive_raw(a)), Box::new(Regex::Star(r.clone())))
            }
        }
    }

    /// Membership of a nonempty word.
    pub fn matches<S: AsRef<str>>(&self, word: &[S]) -> bool {
        if word.is_empty() {
            return false;
        }
        let mut r = self.normalize();
        for a in word {
            r = r.derive(a.as_ref());
            if r == Regex::Empty {
                return false;
            }
        }
        r.nullable()
    }

    /// Membership for a sequence of label sets: some choice of one label per
    /// position spells a word of the language.
    pub fn matches_label_sets(&self, word: &[&BTreeSet<String>]) -> bool {
        if word.is_empty() {
            return false;
        }
        let mut states: BTreeSet<Regex> = BTreeSet::from([self.normalize()]);
        for labels in word {
            let mut next = BTreeSet::new();
            for r in &states {
                for a in labels.iter() {
                    let d = r.derive(a);
                    if d != Regex::Empty {
                        next.insert(d);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            states = next;
        }
        states.iter().any(Regex::nullable)
    }

    /// Prints in the concrete syntax accepted by [`Regex::parse`].
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        // 0: union context, 1: concat context, 2: postfix operand
        match self {
            Regex::Empty => f.write_str("∅"),
            Regex::Epsilon => f.write_str("ε"),
            Regex::Symbol(s) => f.write_str(s),
            Regex::Star(r) => {
                r.fmt_prec(f, 2)?;
                f.write_str("*")
            }
            Regex::Plus(r) => {
                r.fmt_prec(f, 2)?;
                f.write_str("+")
            }
            Regex::Union(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str("|")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Regex::Concat(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 2)?;
                f.write_str(".")?;
                b.fmt_prec(f, 1)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }

    /// Parses `|` (union), `.` (concatenation), postfix `*` and `+`, and
    /// parentheses. Union and concatenation associate to the right.
    pub fn parse(text: &str) -> Result<Regex, RegexError> {
        let mut p = Parser {
            chars: text.char_indices().collect(),
            pos: 0,
            len: text.len(),
        };
        let r = p.union()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(r)
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|c| c.0).unwrap_or(self.len)
    }

    fn err(&self, message: &str) -> RegexError {
        RegexError::Syntax {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.1.is_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn union(&mut self) -> Result<Regex, RegexError> {
        let a = self.concat()?;
        if self.peek() == Some('|') {
            self.pos += 1;
            let b = self.union()?;
            return Ok(Regex::Union(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn concat(&mut self) -> Result<Regex, RegexError> {
        let a = self.postfix()?;
        if self.peek() == Some('.') {
            self.pos += 1;
            let b = self.concat()?;
            return Ok(Regex::Concat(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn postfix(&mut self) -> Result<Regex, RegexError> {
        let mut r = self.atom()?;
        loop {
            match self.peek() {
                Some('*') => r = Regex::Star(Box::new(r)),
                Some('+') => r = Regex::Plus(Box::new(r)),
                _ => return Ok(r),
            }
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> Result<Regex, RegexError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let r = self.union()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(r)
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.1.is_alphanumeric() || c.1 == '_')
                {
                    self.pos += 1;
                }
                Ok(Regex::Symbol(
                    self.chars[start..self.pos].iter().map(|c| c.1).collect(),
                ))
            }
            Some(_) => Err(self.err("expected a label or `(`")),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

/// Computes the disjunctive decomposition of `alpha`.
pub fn decompose(alpha: &Regex, alphabet: &BTreeSet<String>) -> Result<Decomposition, RegexError> {
    decompose_with(alpha, alphabet, true)
}

/// Decomposition built from unsimplified derivatives; kept as an
/// independent cross-check of [`decompose`].
pub fn decompose_raw(
    alpha: &Regex,
    alphabet: &BTreeSet<String>,
) -> Result<Decomposition, RegexError> {
    decompose_with(alpha, alphabet, false)
}

fn decompose_with(
    alpha: &Regex,
    alphabet: &BTreeSet<String>,
    simplify: bool,
) -> Result<Decomposition, RegexError> {
    if !alpha.productive() {
        return Err(RegexError::Uninhabited);
    }
    let mut syms = alpha.symbols();
    syms.extend(alphabet.iter().cloned());
    let base = if simplify {
        alpha.normalize()
    } else {
        alpha.clone()
    };
    let mut d = Decomposition {
        s0: BTreeSet::new(),
        s1: BTreeSet::new(),
        rem: BTreeMap::new(),
    };
    for a in syms {
        let der = if simplify {
            base.derive(&a)
        } else {
            base.derive_raw(&a)
        };
        if der.nullable() {
            d.s0.insert(a.clone());
        }
        if der.productive() {
            d.s1.insert(a.clone());
            d.rem.insert(a, der);
        }
    }
    Ok(d)
}

/// Equality of the ε-free languages of `a` and `b`.
pub fn remainder_equiv(a: &Regex, b: &Regex) -> bool {
    let mut syms = a.symbols();
    syms.extend(b.symbols());
    equiv_over(a, b, &syms).unwrap_or(false)
}

/// Whether `L(alpha)` is every nonempty word over `alphabet ∪ symbols(alpha)`.
pub fn is_universal_plus(alpha: &Regex, alphabet: &BTreeSet<String>) -> bool {
    let mut syms = alpha.symbols();
    syms.extend(alphabet.iter().cloned());
    let Some(any) = syms.iter().map(|s| Regex::sym(s)).reduce(Regex::union) else {
        return false;
    };
    equiv_over(alpha, &Regex::plus(any), &syms).unwrap_or(false)
}

fn equiv_over(a: &Regex, b: &Regex, syms: &BTreeSet<String>) -> Result<bool, RegexError> {
    let start = (a.normalize(), b.normalize());
    let mut seen: HashSet<(Regex, Regex)> = HashSet::new();
    let mut queue = VecDeque::new();
    // The root pair is exempt from the nullability comparison: ε is never
    // part of the language.
    for s in syms {
        queue.push_back((start.0.derive(s), start.1.derive(s)));
    }
    while let Some(pair) = queue.pop_front() {
        if !seen.insert(pair.clone()) {
            continue;
        }
        if seen.len() > STATE_LIMIT {
            return Err(RegexError::TooLarge(STATE_LIMIT));
        }
        if pair.0.nullable() != pair.1.nullable() {
            return Ok(false);
        }
        if pair.0 == Regex::Empty && pair.1 == Regex::Empty {
            continue;
        }
        for s in syms {
            queue.push_back((pair.0.derive(s), pair.1.derive(s)));
        }
    }
    Ok(true)
}
