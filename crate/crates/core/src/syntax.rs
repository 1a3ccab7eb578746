//! Text formats for queries and property definitions, with printers whose
//! output parses back to the same tree.
//!
//! Query files:
//!
//! ```text
//! defs "flights.defs";                       # optional
//! match (x1:TrainSt) where x1.loc == "Barcelona"
//! match (x1:TrainSt) -[y:byTrain]-> (x2:Airport)
//! match (x2:Airport) =[p:Flight+]=> (x3:Airport) where p.cost < 1000, p.length <= 3
//! ```
//!
//! Definition files:
//!
//! ```text
//! properties length: int, cost, start on p;
//! case edge: p.length == 1, p.cost == y.price, p.start == y.dep;
//! case step: p.length == 1 + p'.length, p'.start > y.arr + 90;
//! ```
//!
//! Filters are separated by `,` or `and`, negated with `not`, and grouped
//! with parentheses. Literals are integers, fractions `a/b`, clock times
//! `H:MM` (minutes since midnight), quoted strings, `true` and `false`.
//! Comments run from `#` or `//` to the end of the line.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::constraint::{ArithOp, Atom, Filter, Pred, Subject, Term};
use crate::props::{PropError, PropertyDef};
use crate::query::{Clause, EdgePat, NodePat, Pattern, Query, QueryError};
use crate::regex::{Regex, RegexError};
use crate::value::{quote, Rational, Value};

/// Reference shown with usage errors.
pub const GRAMMAR: &str = "\
query   := ['defs' STRING ';'] clause+
clause  := 'match' pattern ['where' filters] [';']
pattern := node | node '-[' VAR [':' LABEL]* ']->' node | node '=[' VAR [':' REGEX] ']=>' node
node    := '(' VAR (':' LABEL)* ')'
regex   := symbol | regex '|' regex | regex '.' regex | regex '*' | regex '+' | '(' regex ')'
filters := filter ((',' | 'and') filter)*
filter  := 'not' filter | '(' filters ')' | term PRED term | 'true' | 'false'
term    := term ('+' | '-' | '*') term | '-' term | VAR | VAR '.' KEY | literal | '(' term ')'
literal := INT | INT '/' INT | H ':' MM | STRING | 'true' | 'false'
PRED    := '==' | '!=' | '<' | '<=' | '>' | '>='
defs    := 'properties' prop (',' prop)* 'on' VAR ';' 'case' 'edge' ':' [filters] ';' 'case' 'step' ':' [filters] ';'
prop    := KEY [':' 'int']
reserved variables in definitions: x x' x'' y and the path variable with its primed copy";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: {source}")]
    Query {
        line: usize,
        col: usize,
        source: QueryError,
    },
    #[error("{line}:{col}: {source}")]
    Def {
        line: usize,
        col: usize,
        source: PropError,
    },
    #[error("{line}:{col}: {source}")]
    Regex {
        line: usize,
        col: usize,
        source: RegexError,
    },
}

impl SyntaxError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            SyntaxError::Parse { line, col, .. }
            | SyntaxError::Query { line, col, .. }
            | SyntaxError::Def { line, col, .. }
            | SyntaxError::Regex { line, col, .. } => (*line, *col),
        }
    }
}

/// A parsed query and the definition file it names, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryDocument {
    pub defs: Option<String>,
    pub query: Query,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Time(u32),
    Str(String),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: &[(&str, &str)] = &[
    ("->", "->"),
    ("=>", "=>"),
    ("==", "=="),
    ("!=", "!="),
    ("<>", "!="),
    ("<=", "<="),
    (">=", ">="),
    ("≠", "!="),
    ("≤", "<="),
    ("≥", ">="),
    ("−", "-"),
    ("×", "*"),
    ("(", "("),
    (")", ")"),
    ("[", "["),
    ("]", "]"),
    (",", ","),
    (";", ";"),
    (".", "."),
    (":", ":"),
    ("|", "|"),
    ("*", "*"),
    ("+", "+"),
    ("-", "-"),
    ("/", "/"),
    ("<", "<"),
    (">", ">"),
    ("=", "="),
];

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn parse_err(src: &str, offset: usize, message: impl Into<String>) -> SyntaxError {
    let (line, col) = position(src, offset);
    SyntaxError::Parse {
        line,
        col,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let mut toks = Vec::new();
    let mut i = 0;
    let bytes = src.as_bytes();
    while i < src.len() {
        let rest = &src[i..];
        let c = rest.chars().next().expect("nonempty");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' || rest.starts_with("//") {
            i += rest.find('\n').unwrap_or(rest.len());
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            for ch in rest.chars() {
                if is_ident_char(ch) {
                    j += ch.len_utf8();
                } else {
                    break;
                }
            }
            while j < src.len() && bytes[j] == b'\'' {
                j += 1;
            }
            toks.push((Tok::Ident(src[i..j].to_string()), i));
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
            let after = &rest[digits..];
            let ab = after.as_bytes();
            if ab.len() >= 3 && ab[0] == b':' && ab[1].is_ascii_digit() && ab[2].is_ascii_digit() {
                let h: u32 = rest[..digits]
                    .parse()
                    .map_err(|_| parse_err(src, i, "hour out of range"))?;
                let m: u32 = after[1..3].parse().expect("two digits");
                if m >= 60 {
                    return Err(parse_err(src, i, "minutes must be below 60"));
                }
                let t = h.checked_mul(60).and_then(|x| x.checked_add(m));
                let t = t.ok_or_else(|| parse_err(src, i, "time out of range"))?;
                toks.push((Tok::Time(t), i));
                i += digits + 3;
            } else {
                let n: i64 = rest[..digits]
                    .parse()
                    .map_err(|_| parse_err(src, i, "integer literal out of range"))?;
                toks.push((Tok::Int(n), i));
                i += digits;
            }
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            let mut chars = rest.char_indices().skip(1);
            let mut end = None;
            while let Some((k, ch)) = chars.next() {
                match ch {
                    '"' => {
                        end = Some(k + 1);
                        break;
                    }
                    '\\' => match chars.next() {
                        Some((_, 'n')) => s.push('\n'),
                        Some((_, 't')) => s.push('\t'),
                        Some((_, e @ ('"' | '\\'))) => s.push(e),
                        _ => return Err(parse_err(src, i + k, "bad escape in string")),
                    },
                    ch => s.push(ch),
                }
            }
            let end = end.ok_or_else(|| parse_err(src, i, "unterminated string"))?;
            toks.push((Tok::Str(s), i));
            i += end;
            continue;
        }
        match SYMBOLS.iter().find(|(text, _)| rest.starts_with(text)) {
            Some((text, sym)) => {
                toks.push((Tok::Sym(sym), i));
                i += text.len();
            }
            None => return Err(parse_err(src, i, format!("unexpected character `{c}`"))),
        }
    }
    toks.push((Tok::Eof, src.len()));
    Ok(toks)
}

const KEYWORDS: &[&str] = &["match", "where", "and", "not", "true", "false", "defs"];

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, SyntaxError> {
        Ok(Parser {
            src,
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        parse_err(self.src, self.offset(), message)
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Time(t) => format!("`{}:{:02}`", t / 60, t % 60),
            Tok::Str(s) => quote(s),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.err(format!(
                "expected `{s}`, found {}",
                Self::describe(self.peek())
            )))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!(
                "expected `{kw}`, found {}",
                Self::describe(self.peek())
            )))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.err(format!("expected {what}, found {}", Self::describe(&t)))),
        }
    }

    fn labels(&mut self) -> Result<BTreeSet<String>, SyntaxError> {
        let mut out = BTreeSet::new();
        while self.eat_sym(":") {
            out.insert(self.ident("a label")?);
        }
        Ok(out)
    }

    fn node(&mut self) -> Result<NodePat, SyntaxError> {
        self.expect_sym("(")?;
        let var = self.ident("a node variable")?;
        let labels = self.labels()?;
        self.expect_sym(")")?;
        Ok(NodePat { var, labels })
    }

    fn pattern(&mut self) -> Result<Pattern, SyntaxError> {
        let src = self.node()?;
        if self.eat_sym("-") {
            self.expect_sym("[")?;
            let var = self.ident("an edge variable")?;
            let labels = self.labels()?;
            self.expect_sym("]")?;
            self.expect_sym("->")?;
            let tgt = self.node()?;
            return Ok(Pattern::Edge {
                src,
                edge: EdgePat { var, labels },
                tgt,
            });
        }
        if self.eat_sym("=") {
            self.expect_sym("[")?;
            let path = self.ident("a path variable")?;
            let regex = if self.eat_sym(":") {
                let start = self.offset();
                while !self.is_sym("]") {
                    if matches!(self.bump(), Tok::Eof) {
                        return Err(self.err("unterminated path pattern"));
                    }
                }
                let text = &self.src[start..self.offset()];
                let r = Regex::parse(text).map_err(|e| {
                    let at = match &e {
                        RegexError::Syntax { offset, .. } => start + offset,
                        _ => start,
                    };
                    let (line, col) = position(self.src, at);
                    SyntaxError::Regex {
                        line,
                        col,
                        source: e,
                    }
                })?;
                Some(r)
            } else {
                None
            };
            self.expect_sym("]")?;
            self.expect_sym("=>")?;
            let tgt = self.node()?;
            return Ok(Pattern::Path {
                src,
                path,
                regex,
                tgt,
            });
        }
        Ok(Pattern::Node(src))
    }

    fn at_filter_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof | Tok::Sym(";") | Tok::Sym(")")) || self.is_kw("match")
    }

    /// A comma or `and` separated list.
    fn filters(&mut self) -> Result<Vec<Filter>, SyntaxError> {
        let mut out = vec![self.filter()?];
        while self.eat_sym(",") || self.eat_kw("and") {
            out.push(self.filter()?);
        }
        Ok(out)
    }

    fn filter(&mut self) -> Result<Filter, SyntaxError> {
        if self.eat_kw("not") {
            let inner = self.filter()?;
            return Ok(Filter::not(inner));
        }
        let save = self.pos;
        match self.atom() {
            Ok(a) => Ok(a),
            Err(e) => {
                let atom_err = (self.pos, e);
                self.pos = save;
                if self.eat_sym("(") {
                    if let Ok(mut fs) = self.filters() {
                        if self.eat_sym(")") {
                            return Ok(if fs.len() == 1 {
                                fs.pop().expect("one")
                            } else {
                                Filter::And(fs)
                            });
                        }
                    }
                    self.pos = save;
                }
                if self.eat_kw("true") {
                    return Ok(Filter::truth());
                }
                if self.eat_kw("false") {
                    return Ok(Filter::falsity());
                }
                self.pos = atom_err.0;
                Err(atom_err.1)
            }
        }
    }

    fn atom(&mut self) -> Result<Filter, SyntaxError> {
        let lhs = self.term()?;
        let pred = match self.peek() {
            Tok::Sym("==") => Pred::Eq,
            Tok::Sym("!=") => Pred::Ne,
            Tok::Sym("<") => Pred::Lt,
            Tok::Sym("<=") => Pred::Le,
            Tok::Sym(">") => Pred::Gt,
            Tok::Sym(">=") => Pred::Ge,
            t => {
                return Err(self.err(format!(
                    "expected a comparison, found {}",
                    Self::describe(t)
                )))
            }
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Filter::Atom(Atom::new(lhs, pred, rhs)))
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let mut t = self.product()?;
        loop {
            let op = if self.eat_sym("+") {
                ArithOp::Add
            } else if self.eat_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(t);
            };
            t = Term::op(op, t, self.product()?);
        }
    }

    fn product(&mut self) -> Result<Term, SyntaxError> {
        let mut t = self.unary()?;
        while self.eat_sym("*") {
            t = Term::op(ArithOp::Mul, t, self.unary()?);
        }
        Ok(t)
    }

    fn unary(&mut self) -> Result<Term, SyntaxError> {
        if self.eat_sym("-") {
            return Ok(match self.unary()? {
                Term::Lit(Value::Int(i)) => Term::Lit(Value::Int(-i)),
                Term::Lit(Value::Rational(r)) => Term::Lit(Value::Rational(-r)),
                t => Term::op(ArithOp::Sub, Term::int(0), t),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if self.is_sym("/") {
                    if let Tok::Int(d) = self.peek_at(1).clone() {
                        self.bump();
                        self.bump();
                        if d == 0 {
                            return Err(self.err("zero denominator"));
                        }
                        let r = Rational::new(n as i128, d as i128);
                        return Ok(Term::Lit(Value::from_number(r)));
                    }
                }
                Ok(Term::Lit(Value::Int(n)))
            }
            Tok::Time(t) => {
                self.bump();
                Ok(Term::Lit(Value::Time(t)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::Lit(Value::Text(s)))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Term::Lit(Value::Bool(s == "true")))
            }
            Tok::Ident(_) => {
                let v = self.ident("a variable")?;
                if self.eat_sym(".") {
                    let k = self.ident("a property key")?;
                    Ok(Term::Prop(Subject::Var(v), k))
                } else {
                    Ok(Term::Var(v))
                }
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            t => Err(self.err(format!("expected a term, found {}", Self::describe(&t)))),
        }
    }
}

pub fn parse_query(text: &str) -> Result<QueryDocument, SyntaxError> {
    let mut p = Parser::new(text)?;
    let mut defs = None;
    if p.eat_kw("defs") {
        match p.bump() {
            Tok::Str(s) => defs = Some(s),
            t => {
                return Err(p.err(format!(
                    "expected a file name string, found {}",
                    Parser::describe(&t)
                )))
            }
        }
        p.expect_sym(";")?;
    }
    let mut clauses = Vec::new();
    let mut starts = Vec::new();
    while !matches!(p.peek(), Tok::Eof) {
        starts.push(p.offset());
        p.expect_kw("match")?;
        let pattern = p.pattern()?;
        let filter = if p.eat_kw("where") {
            if p.at_filter_end() {
                return Err(p.err("expected a filter after `where`"));
            }
            p.filters()?
        } else {
            Vec::new()
        };
        p.eat_sym(";");
        clauses.push(Clause { pattern, filter });
    }
    if clauses.is_empty() {
        let (line, col) = position(text, text.len());
        return Err(SyntaxError::Query {
            line,
            col,
            source: QueryError::Empty,
        });
    }
    let query = Query::new(clauses);
    if let Err(source) = query.validate() {
        let at = (1..=query.clauses.len())
            .find(|&k| Query::new(query.clauses[..k].to_vec()).validate().is_err())
            .map_or(0, |k| starts[k - 1]);
        let (line, col) = position(text, at);
        return Err(SyntaxError::Query { line, col, source });
    }
    Ok(QueryDocument { defs, query })
}

/// A comma or `and` separated filter list, as found after `where`.
pub fn parse_filters(text: &str) -> Result<Vec<Filter>, SyntaxError> {
    let mut p = Parser::new(text)?;
    if matches!(p.peek(), Tok::Eof) {
        return Ok(Vec::new());
    }
    let fs = p.filters()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.err(format!(
            "expected `,` or end of input, found {}",
            Parser::describe(p.peek())
        )));
    }
    Ok(fs)
}

pub fn parse_defs(text: &str) -> Result<PropertyDef, SyntaxError> {
    let mut p = Parser::new(text)?;
    let mut def = PropertyDef::empty();
    p.expect_kw("properties")?;
    loop {
        let name = p.ident("a property name")?;
        if p.eat_sym(":") {
            p.expect_kw("int")?;
            def.integer_properties.insert(name.clone());
        }
        def.properties.insert(name);
        if !p.eat_sym(",") {
            break;
        }
    }
    p.expect_kw("on")?;
    def.path_var = p.ident("the path variable")?;
    if def.path_var.ends_with('\'') {
        return Err(p.err("the path variable cannot be primed"));
    }
    p.expect_sym(";")?;
    let mut seen = BTreeSet::new();
    while p.eat_kw("case") {
        let which_at = p.offset();
        let which = p.ident("`edge` or `step`")?;
        if which != "edge" && which != "step" {
            return Err(parse_err(text, which_at, format!("unknown case `{which}`")));
        }
        if !seen.insert(which.clone()) {
            return Err(parse_err(
                text,
                which_at,
                format!("case `{which}` given twice"),
            ));
        }
        p.expect_sym(":")?;
        let mut body = Vec::new();
        if !p.is_sym(";") {
            loop {
                let at = p.offset();
                let f = p.filter()?;
                let mut probe = def.clone();
                probe.edge_case = vec![f.clone()];
                probe.step_case.clear();
                if let Err(source) = probe.validate() {
                    let (line, col) = position(text, at);
                    return Err(SyntaxError::Def { line, col, source });
                }
                body.push(f);
                if !(p.eat_sym(",") || p.eat_kw("and")) {
                    break;
                }
            }
        }
        p.expect_sym(";")?;
        if which == "edge" {
            def.edge_case = body;
        } else {
            def.step_case = body;
        }
    }
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.err(format!(
            "expected `case` or end of input, found {}",
            Parser::describe(p.peek())
        )));
    }
    Ok(def)
}

fn write_labels(out: &mut String, labels: &BTreeSet<String>) {
    for l in labels {
        out.push(':');
        out.push_str(l);
    }
}

fn write_node(out: &mut String, n: &NodePat) {
    out.push('(');
    out.push_str(&n.var);
    write_labels(out, &n.labels);
    out.push(')');
}

/// One filter of a comma separated list; conjunctions keep their parentheses.
fn list_item(f: &Filter) -> String {
    match f {
        Filter::And(fs) if !fs.is_empty() => format!("({f})"),
        _ => f.to_string(),
    }
}

fn write_filters(out: &mut String, fs: &[Filter]) {
    let items: Vec<String> = fs.iter().map(list_item).collect();
    out.push_str(&items.join(", "));
}

pub fn print_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    match p {
        Pattern::Node(n) => write_node(&mut out, n),
        Pattern::Edge { src, edge, tgt } => {
            write_node(&mut out, src);
            out.push_str(" -[");
            out.push_str(&edge.var);
            write_labels(&mut out, &edge.labels);
            out.push_str("]-> ");
            write_node(&mut out, tgt);
        }
        Pattern::Path {
            src,
            path,
            regex,
            tgt,
        } => {
            write_node(&mut out, src);
            out.push_str(" =[");
            out.push_str(path);
            if let Some(r) = regex {
                let _ = write!(out, ":{r}");
            }
            out.push_str("]=> ");
            write_node(&mut out, tgt);
        }
    }
    out
}

pub fn print_query(doc: &QueryDocument) -> String {
    let mut out = String::new();
    if let Some(d) = &doc.defs {
        let _ = writeln!(out, "defs {};", quote(d));
    }
    for c in &doc.query.clauses {
        out.push_str("match ");
        out.push_str(&print_pattern(&c.pattern));
        if !c.filter.is_empty() {
            out.push_str(" where ");
            write_filters(&mut out, &c.filter);
        }
        out.push('\n');
    }
    out
}

pub fn print_defs(def: &PropertyDef) -> String {
    let mut out = String::from("properties ");
    let props: Vec<String> = def
        .properties
        .iter()
        .map(|p| {
            if def.integer_properties.contains(p) {
                format!("{p}: int")
            } else {
                p.clone()
            }
        })
        .collect();
    out.push_str(&props.join(", "));
    let _ = writeln!(out, " on {};", def.path_var);
    for (name, body) in [("edge", &def.edge_case), ("step", &def.step_case)] {
        let _ = write!(out, "case {name}: ");
        write_filters(&mut out, body);
        out.push_str(";\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::Pattern;

    const RUNNING: &str = r#"
        match (x1:TrainSt) where x1.loc == "Barcelona"
        match (x1:TrainSt) -[y:byTrain]-> (x2:Airport) where x2.loc == "Barcelona"
        match (x2:Airport) =[p:Flight+]=> (x3:Airport)
            where x3.loc == "Los Angeles", p.cost < 1000, p.length <= 3
    "#;

    #[test]
    fn three_clause_query() {
        let doc = parse_query(RUNNING).unwrap();
        let kinds: Vec<_> = doc
            .query
            .clauses
            .iter()
            .map(|c| match c.pattern {
                Pattern::Node(_) => 'n',
                Pattern::Edge { .. } => 'e',
                Pattern::Path { .. } => 'p',
            })
            .collect();
        assert_eq!(kinds, vec!['n', 'e', 'p']);
        assert_eq!(doc.query.clauses[2].filter.len(), 3);
        assert_eq!(parse_query(&print_query(&doc)).unwrap(), doc);
    }

    #[test]
    fn bare_node_and_plus_regex() {
        let doc = parse_query("match (x)").unwrap();
        let c = &doc.query.clauses[0];
        assert_eq!(c.pattern, Pattern::Node(NodePat::new("x", &[])));
        assert!(c.filter.is_empty());
        let doc = parse_query("match (a) =[p:Flight+]=> (b)").unwrap();
        match &doc.query.clauses[0].pattern {
            Pattern::Path { regex: Some(r), .. } => {
                assert_eq!(*r, Regex::Plus(Box::new(Regex::Symbol("Flight".into()))))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn literals() {
        let doc = parse_query(
            "match (x) where x.a == 9:05, x.b == -3/4, x.c != \"q\\\"\", not (x.d > 1, x.e < 2)",
        )
        .unwrap();
        let f = &doc.query.clauses[0].filter;
        assert_eq!(f.len(), 4);
        assert_eq!(f[0].to_string(), "x.a == 9:05");
        assert_eq!(f[1].to_string(), "x.b == -3/4");
        assert_eq!(parse_query(&print_query(&doc)).unwrap(), doc);
    }

    #[test]
    fn positioned_errors() {
        let e = parse_query("match (x)\nmatch (x) -[x]-> (y)").unwrap_err();
        assert!(matches!(
            e,
            SyntaxError::Query {
                line: 2,
                col: 1,
                source: QueryError::ConflictingKind { .. }
            }
        ));
        let e = parse_query("match (x) where x.a ==").unwrap_err();
        assert_eq!(e.position(), (1, 23));
        let e = parse_query("match (a) =[p:(F]=> (b)").unwrap_err();
        assert!(matches!(e, SyntaxError::Regex { .. }));
    }

    #[test]
    fn defs_round_trip_and_errors() {
        let text = "properties length: int, cost, start on p;\n\
            case edge: p.length == 1, p.cost == y.price, p.start == y.dep;\n\
            case step: p.length == 1 + p'.length, p.cost == y.price + p'.cost, p.start == y.dep,\n\
            p'.length > 0, p'.cost > 0, p'.start > y.arr + 90;";
        let def = parse_defs(text).unwrap();
        assert_eq!(def.edge_case.len(), 3);
        assert_eq!(def.step_case.len(), 6);
        assert!(def.integer_properties.contains("length"));
        assert_eq!(parse_defs(&print_defs(&def)).unwrap(), def);

        let empty = parse_defs("properties a on p; case edge: ; case step: ;").unwrap();
        assert!(empty.edge_case.is_empty() && empty.step_case.is_empty());

        let e = parse_defs("properties a on p;\ncase edge: z.a == 1;").unwrap_err();
        assert!(matches!(
            e,
            SyntaxError::Def { line: 2, col: 12, source: PropError::UnknownVariable(ref v) } if v == "z"
        ));
        let e = parse_defs("properties a on p; case edge: p.b == 1;").unwrap_err();
        assert!(matches!(
            e,
            SyntaxError::Def {
                source: PropError::UndeclaredProperty(_),
                ..
            }
        ));
    }
}
