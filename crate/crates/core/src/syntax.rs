//! Text syntax for terms, goals, priority goals and programs.
//!
//! Variables start with an uppercase letter or `_`, or are a letter from
//! `u` to `z` optionally followed by digits (`x`, `z1`, `v12`). Every other
//! identifier in term position is a constant or functor.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::engine::LineageTag;
use crate::priority::{Priority, PriorityAtom, PriorityGoal};
use crate::term::{Atom, Clause, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("predicate {predicate} used with arity {found}, expected {expected}")]
pub struct ArityError {
    pub predicate: String,
    pub expected: usize,
    pub found: usize,
}

pub fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_uppercase() || c == '_' => true,
        Some('u'..='z') => chars.all(|c| c.is_ascii_digit() || c == '_'),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Bar,
    LBrace,
    RBrace,
    Dot,
    Arrow,
    /// Raw text between `[` and `]`.
    Tag(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`<-`"),
            Tok::Tag(s) => write!(f, "`[{s}]`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, column, message: message.into() }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '%' {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                } else {
                    break;
                }
            }
            let (line, column) = (self.line, self.column);
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, line, column));
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '|' => Tok::Bar,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '.' => Tok::Dot,
                '<' | ':' => {
                    if self.bump() != Some('-') {
                        return Err(self.error(line, column, format!("expected `{c}-`")));
                    }
                    Tok::Arrow
                }
                '[' => {
                    let mut text = String::new();
                    loop {
                        match self.bump() {
                            Some(']') => break,
                            Some(c) => text.push(c),
                            None => return Err(self.error(line, column, "unterminated `[`")),
                        }
                    }
                    Tok::Tag(text)
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let mut s = String::from(c);
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            s.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(s)
                }
                other => return Err(self.error(line, column, format!("unexpected character `{other}`"))),
            };
            out.push((tok, line, column));
        }
    }
}

type TaggedAtom = (Atom, Option<Priority>);

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let toks = Lexer { chars: text.chars().peekable(), line: 1, column: 1 }.tokens()?;
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, message: message.into() }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.term()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "`,` or `)`")?;
        }
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = self.ident("a term")?;
        if *self.peek() == Tok::LParen {
            return Ok(Term::App(Arc::from(name.as_str()), self.args()?));
        }
        Ok(if is_variable_name(&name) { Term::var(&name) } else { Term::constant(&name) })
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let (line, column) = self.here();
        let name = self.ident("an atom")?;
        if is_variable_name(&name) && name.starts_with(|c: char| c.is_ascii_uppercase() || c == '_') {
            return Err(ParseError { line, column, message: format!("`{name}` is not a predicate name") });
        }
        let args = self.args()?;
        Ok(Atom { predicate: Arc::from(name.as_str()), args })
    }

    /// Atoms separated by `,` or `|`, with optional `{ }` grouping and
    /// optional `[priority]` tags. Returns the atoms, their tags, and the
    /// index of the first `|`.
    fn goal_items(&mut self, stop: &[Tok]) -> Result<(Vec<TaggedAtom>, Option<usize>), ParseError> {
        let mut items = Vec::new();
        let mut bar = None;
        let mut depth = 0usize;
        loop {
            while self.eat(&Tok::LBrace) {
                depth += 1;
            }
            if items.is_empty() && depth == 0 && stop.contains(self.peek()) {
                return Ok((items, bar));
            }
            // Empty stack part: `h <- | b.`
            if items.is_empty() && bar.is_none() && self.eat(&Tok::Bar) {
                bar = Some(0);
                continue;
            }
            let atom = self.atom()?;
            let tag = match self.peek().clone() {
                Tok::Tag(text) => {
                    let p = text.parse::<Priority>().map_err(|e| self.error(e.to_string()))?;
                    self.next();
                    Some(p)
                }
                _ => None,
            };
            items.push((atom, tag));
            while depth > 0 && self.eat(&Tok::RBrace) {
                depth -= 1;
            }
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::Bar => {
                    bar.get_or_insert(items.len());
                    self.next();
                }
                _ => break,
            }
        }
        if depth > 0 {
            return Err(self.unexpected("`}`"));
        }
        Ok((items, bar))
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let head = self.atom()?;
        if self.eat(&Tok::Dot) {
            return Ok(Clause::fact(head));
        }
        self.expect(Tok::Arrow, "`<-` or `.`")?;
        let (items, bar) = self.goal_items(&[Tok::Dot])?;
        if items.iter().any(|(_, t)| t.is_some()) {
            return Err(self.error("priority tags are not allowed in clause bodies"));
        }
        self.expect(Tok::Dot, "`,`, `|` or `.`")?;
        let body: Vec<Atom> = items.into_iter().map(|(a, _)| a).collect();
        let split = bar.unwrap_or(body.len());
        Ok(Clause::new(head, body[..split].to_vec(), body[split..].to_vec()))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text)?;
    let a = p.atom()?;
    p.finish()?;
    Ok(a)
}

/// A goal as a list; `,` and `|` both separate atoms. The empty string is the empty goal.
pub fn parse_goal(text: &str) -> Result<Vec<Atom>, ParseError> {
    let mut p = Parser::new(text)?;
    let (items, _) = p.goal_items(&[Tok::Eof])?;
    p.finish()?;
    if items.iter().any(|(_, t)| t.is_some()) {
        return Err(ParseError { line: 1, column: 1, message: "priority tags are not allowed in a list goal".into() });
    }
    Ok(items.into_iter().map(|(a, _)| a).collect())
}

/// A priority goal. Either every atom carries a `[priority]` tag or none
/// does, in which case priorities are `1..=k` in textual order.
pub fn parse_priority_goal(text: &str) -> Result<PriorityGoal, ParseError> {
    let mut p = Parser::new(text)?;
    let (items, _) = p.goal_items(&[Tok::Eof])?;
    p.finish()?;
    let tagged = items.iter().filter(|(_, t)| t.is_some()).count();
    let err = |message: String| ParseError { line: 1, column: 1, message };
    if tagged == 0 {
        let atoms: Vec<Atom> = items.into_iter().map(|(a, _)| a).collect();
        return Ok(PriorityGoal::from_list(&atoms));
    }
    if tagged != items.len() {
        return Err(err("either all atoms or none carry a priority tag".into()));
    }
    let atoms = items
        .into_iter()
        .enumerate()
        .map(|(i, (a, t))| PriorityAtom::new(a, t.expect("checked"), LineageTag::initial(i)))
        .collect();
    PriorityGoal::new(atoms).map_err(|e| err(e.to_string()))
}

pub fn parse_clause(text: &str) -> Result<Clause, ParseError> {
    let mut p = Parser::new(text)?;
    let c = p.clause()?;
    p.finish()?;
    Ok(c)
}

/// Clauses terminated by `.`; `%` starts a comment. Bodies split at the
/// first `|` into a stack part and a queue part; later bars separate atoms
/// like commas.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut clauses = Vec::new();
    let mut arities: BTreeMap<Arc<str>, usize> = BTreeMap::new();
    while *p.peek() != Tok::Eof {
        let (line, column) = p.here();
        let c = p.clause()?;
        for a in std::iter::once(&c.head).chain(&c.stack_body).chain(&c.queue_body) {
            let expected = *arities.entry(a.predicate.clone()).or_insert(a.arity());
            if expected != a.arity() {
                let e = ArityError { predicate: a.predicate.to_string(), expected, found: a.arity() };
                return Err(ParseError { line, column, message: e.to_string() });
            }
        }
        clauses.push(c);
    }
    Ok(Program { clauses })
}

/// An ordered list of clauses, named `c1, c2, ...` by position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, ArityError> {
        let p = Program { clauses };
        p.check_atoms(p.clauses.iter().flat_map(|c| std::iter::once(&c.head).chain(&c.stack_body).chain(&c.queue_body)))?;
        Ok(p)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    pub fn clause_name(index: usize) -> String {
        format!("c{}", index + 1)
    }

    /// Resolves `c3` or `3` to a zero-based clause index.
    pub fn clause_index(&self, name: &str) -> Option<usize> {
        let n: usize = name.strip_prefix('c').unwrap_or(name).parse().ok()?;
        (1..=self.clauses.len()).contains(&n).then(|| n - 1)
    }

    pub fn has_function_symbols(&self) -> bool {
        self.clauses.iter().any(|c| {
            c.head.has_function_symbol() || c.stack_body.iter().chain(&c.queue_body).any(Atom::has_function_symbol)
        })
    }

    /// Every clause with its body re-split at `at(index, clause)`.
    pub fn resplit(&self, at: impl Fn(usize, &Clause) -> usize) -> Program {
        Program { clauses: self.clauses.iter().enumerate().map(|(i, c)| c.with_split(at(i, c))).collect() }
    }

    /// Checks arities of `atoms` against the program and each other.
    pub fn check_atoms<'a>(&'a self, atoms: impl IntoIterator<Item = &'a Atom>) -> Result<(), ArityError> {
        let mut arities: BTreeMap<&str, usize> = BTreeMap::new();
        let all = self.clauses.iter().flat_map(|c| std::iter::once(&c.head).chain(&c.stack_body).chain(&c.queue_body));
        for a in all.chain(atoms) {
            let expected = *arities.entry(&a.predicate).or_insert(a.arity());
            if expected != a.arity() {
                return Err(ArityError { predicate: a.predicate.to_string(), expected, found: a.arity() });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
