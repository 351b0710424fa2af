//! First-order syntax: terms, atoms, clauses, substitutions and the
//! operations the resolution engine is built on (unification, renaming
//! apart, variance and subsumption as lists).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// A variable name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The `N` of a fresh variable `v<N>`, if the name has that shape.
    pub fn fresh_index(&self) -> Option<u64> {
        self.0.strip_prefix('v').and_then(|d| d.parse().ok())
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Variables and compound terms. Constants are 0-ary compounds.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(Arc<str>, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::App(Arc::from(name), Vec::new())
    }

    pub fn app(functor: &str, args: Vec<Term>) -> Self {
        Term::App(Arc::from(functor), args)
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn has_function_symbol(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => !args.is_empty(),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn collect_vars_ordered(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars_ordered(out)),
        }
    }

    pub fn apply(&self, s: &Substitution) -> Term {
        match self {
            Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(s)).collect()),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                f.write_str(name)?;
                write_args(f, args)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Arc<str>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom { predicate: Arc::from(predicate), args }
    }

    pub fn prop(predicate: &str) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn has_function_symbol(&self) -> bool {
        self.args.iter().any(Term::has_function_symbol)
    }

    pub fn apply(&self, s: &Substitution) -> Atom {
        Atom { predicate: self.predicate.clone(), args: self.args.iter().map(|a| a.apply(s)).collect() }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        write_args(f, &self.args)
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl Serialize for Clause {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub fn vars_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for a in atoms {
        a.collect_vars(&mut out);
    }
    out
}

pub fn apply_all(atoms: &[Atom], s: &Substitution) -> Vec<Atom> {
    atoms.iter().map(|a| a.apply(s)).collect()
}

/// A definite clause `head <- stack_body | queue_body`.
///
/// The split only matters to stack-queue scheduling; list mode and the
/// other rules see `body()`, the concatenation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Atom,
    pub stack_body: Vec<Atom>,
    pub queue_body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, stack_body: Vec<Atom>, queue_body: Vec<Atom>) -> Self {
        Clause { head, stack_body, queue_body }
    }

    pub fn fact(head: Atom) -> Self {
        Clause::new(head, Vec::new(), Vec::new())
    }

    pub fn body(&self) -> Vec<Atom> {
        self.stack_body.iter().chain(self.queue_body.iter()).cloned().collect()
    }

    pub fn body_len(&self) -> usize {
        self.stack_body.len() + self.queue_body.len()
    }

    pub fn split(&self) -> usize {
        self.stack_body.len()
    }

    /// The same clause with its body re-split at `at` (clamped to the body length).
    pub fn with_split(&self, at: usize) -> Clause {
        let body = self.body();
        let at = at.min(body.len());
        Clause::new(self.head.clone(), body[..at].to_vec(), body[at..].to_vec())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.head.vars();
        for a in self.stack_body.iter().chain(&self.queue_body) {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn apply(&self, s: &Substitution) -> Clause {
        Clause::new(self.head.apply(s), apply_all(&self.stack_body, s), apply_all(&self.queue_body, s))
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <-", self.head)?;
        let list = |f: &mut fmt::Formatter<'_>, atoms: &[Atom]| -> fmt::Result {
            for (i, a) in atoms.iter().enumerate() {
                f.write_str(if i == 0 { " " } else { ", " })?;
                write!(f, "{a}")?;
            }
            Ok(())
        };
        list(f, &self.stack_body)?;
        if !self.queue_body.is_empty() {
            f.write_str(" |")?;
            list(f, &self.queue_body)?;
        }
        f.write_str(".")
    }
}

/// A finite map from variables to terms. Trivial bindings `x/x` are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(v, t);
        }
        s
    }

    /// Inserts `v/t`, dropping it when `t` is `v` itself.
    pub fn bind(&mut self, v: Var, t: Term) {
        if t.as_var() == Some(&v) {
            self.bindings.remove(&v);
        } else {
            self.bindings.insert(v, t);
        }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.bindings.keys().cloned().collect()
    }

    pub fn range_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.bindings.values().for_each(|t| t.collect_vars(&mut out));
        out
    }

    /// Variables of the domain and of the range.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.domain();
        out.extend(self.range_vars());
        out
    }

    pub fn is_identity_on<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> bool {
        vars.into_iter().all(|v| !self.bindings.contains_key(v))
    }

    pub fn is_idempotent(&self) -> bool {
        self.domain().is_disjoint(&self.range_vars())
    }

    /// Composition `self` then `other`: `E(self.compose(other)) = (E self) other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.bindings {
            out.bind(v.clone(), t.apply(other));
        }
        for (v, t) in &other.bindings {
            if !self.bindings.contains_key(v) {
                out.bind(v.clone(), t.clone());
            }
        }
        out
    }

    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Substitution {
        Substitution {
            bindings: self.bindings.iter().filter(|(v, _)| vars.contains(*v)).map(|(v, t)| (v.clone(), t.clone())).collect(),
        }
    }

    /// True when every binding maps a variable to a variable and no two
    /// variables share an image.
    pub fn is_renaming(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.bindings.values().all(|t| matches!(t, Term::Var(v) if seen.insert(v.clone())))
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}/{t}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Substitution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_map(self.bindings.iter().map(|(v, t)| (v.name().to_string(), t.to_string())))
    }
}

/// An injective variable-to-variable substitution.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Renaming(Substitution);

impl Renaming {
    pub fn identity() -> Self {
        Renaming(Substitution::new())
    }

    /// Builds a renaming from pairs, rejecting non-injective maps.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Var)>) -> Option<Self> {
        let mut map: BTreeMap<Var, Var> = BTreeMap::new();
        let mut images = BTreeSet::new();
        for (from, to) in pairs {
            if let Some(existing) = map.get(&from) {
                if *existing != to {
                    return None;
                }
                continue;
            }
            if !images.insert(to.clone()) {
                return None;
            }
            map.insert(from, to);
        }
        Some(Renaming(Substitution::from_pairs(map.into_iter().map(|(f, t)| (f, Term::Var(t))))))
    }

    pub fn as_substitution(&self) -> &Substitution {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: &Var) -> Option<&Var> {
        self.0.get(v).and_then(Term::as_var)
    }

    pub fn inverse(&self) -> Renaming {
        Renaming(Substitution::from_pairs(
            self.0.iter().map(|(v, t)| (t.as_var().expect("renaming binds variables").clone(), Term::Var(v.clone()))),
        ))
    }
}

impl fmt::Debug for Renaming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Display for Renaming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Serialize for Renaming {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

/// Unification options. The occurs check is on unless explicitly disabled.
#[derive(Clone, Copy, Debug)]
pub struct UnifyOptions {
    pub occurs_check: bool,
}

impl Default for UnifyOptions {
    fn default() -> Self {
        UnifyOptions { occurs_check: true }
    }
}

/// Most general unifier of two atoms, in solved (idempotent) form.
///
/// Variable-variable equations eliminate the variable coming from `b`, so
/// `mgu(goal_atom, renamed_head)` keeps the goal's variable names.
pub fn mgu(a: &Atom, b: &Atom) -> Option<Substitution> {
    mgu_with(a, b, UnifyOptions::default())
}

pub fn mgu_with(a: &Atom, b: &Atom, opts: UnifyOptions) -> Option<Substitution> {
    if a.predicate != b.predicate || a.arity() != b.arity() {
        return None;
    }
    let mut eqs: Vec<(Term, Term)> = a.args.iter().cloned().zip(b.args.iter().cloned()).rev().collect();
    let mut solved = Substitution::new();
    while let Some((s, t)) = eqs.pop() {
        let s = s.apply(&solved);
        let t = t.apply(&solved);
        if s == t {
            continue;
        }
        let (v, value) = match (&s, &t) {
            (_, Term::Var(tv)) => (tv.clone(), s.clone()),
            (Term::Var(sv), _) => (sv.clone(), t.clone()),
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return None;
                }
                for pair in fa.iter().cloned().zip(ga.iter().cloned()).rev() {
                    eqs.push(pair);
                }
                continue;
            }
        };
        if opts.occurs_check && value.occurs(&v) {
            return None;
        }
        let elim = Substitution::from_pairs([(v.clone(), value.clone())]);
        let mut next = Substitution::new();
        for (w, u) in solved.iter() {
            next.bind(w.clone(), u.apply(&elim));
        }
        next.bind(v, value);
        solved = next;
    }
    Some(solved)
}

/// Variable bindings accumulated by one-way matching. Unlike
/// [`Substitution`] it records identity bindings, so `x` matched against
/// `x` and later against `a` is rejected.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matcher {
    map: BTreeMap<Var, Term>,
}

impl Matcher {
    pub fn new() -> Self {
        Self::default()
    }

    /// Seeds the matcher with `x/x` for every variable in `fixed`.
    pub fn fixing<'a>(fixed: impl IntoIterator<Item = &'a Var>) -> Self {
        Matcher { map: fixed.into_iter().map(|v| (v.clone(), Term::Var(v.clone()))).collect() }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn substitution(&self) -> Substitution {
        Substitution::from_pairs(self.map.iter().map(|(v, t)| (v.clone(), t.clone())))
    }

    /// All recorded bindings, identity bindings included.
    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    /// Extends the bindings so that `pattern` maps onto `target`, binding
    /// only variables accepted by `bindable`. On failure `self` is unchanged.
    pub fn match_atom(&mut self, pattern: &Atom, target: &Atom, bindable: &dyn Fn(&Var) -> bool) -> bool {
        if pattern.predicate != target.predicate || pattern.arity() != target.arity() {
            return false;
        }
        let mut trial = self.clone();
        if pattern.args.iter().zip(&target.args).all(|(p, t)| trial.match_term(p, t, bindable)) {
            *self = trial;
            true
        } else {
            false
        }
    }

    fn match_term(&mut self, pattern: &Term, target: &Term, bindable: &dyn Fn(&Var) -> bool) -> bool {
        match pattern {
            Term::Var(v) => match self.map.get(v) {
                Some(bound) => bound == target,
                None => {
                    if target.as_var() != Some(v) && !bindable(v) {
                        return false;
                    }
                    self.map.insert(v.clone(), target.clone());
                    true
                }
            },
            Term::App(f, args) => match target {
                Term::App(g, targs) if f == g && args.len() == targs.len() => {
                    args.iter().zip(targs).all(|(p, t)| self.match_term(p, t, bindable))
                }
                _ => false,
            },
        }
    }
}

/// One-way matching of `pattern` onto `target` from scratch.
pub fn match_atom(pattern: &Atom, target: &Atom) -> Option<Substitution> {
    let mut m = Matcher::new();
    m.match_atom(pattern, target, &|_| true).then(|| m.substitution())
}

/// Per-derivation source of fresh variables `v<N>`. The counter only grows.
#[derive(Clone, Debug, Default)]
pub struct FreshVars {
    next: u64,
}

impl FreshVars {
    pub fn new() -> Self {
        FreshVars { next: 1 }
    }

    /// A counter positioned after every `v<N>` already used by `vars`.
    pub fn after<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Self {
        let max = vars.into_iter().filter_map(Var::fresh_index).max().unwrap_or(0);
        FreshVars { next: max + 1 }
    }

    pub fn peek(&self) -> u64 {
        self.next
    }

    pub fn bump_past<'a>(&mut self, vars: impl IntoIterator<Item = &'a Var>) {
        if let Some(max) = vars.into_iter().filter_map(Var::fresh_index).max() {
            self.next = self.next.max(max + 1);
        }
    }

    pub fn fresh(&mut self, avoid: &BTreeSet<Var>) -> Var {
        loop {
            let v = Var::new(&format!("v{}", self.next));
            self.next += 1;
            if !avoid.contains(&v) {
                return v;
            }
        }
    }
}

/// Renames the clause with fresh variables disjoint from `avoid`.
pub fn rename_apart(c: &Clause, avoid: &BTreeSet<Var>, fresh: &mut FreshVars) -> (Clause, Renaming) {
    let mut pairs = Vec::new();
    for v in ordered_clause_vars(c) {
        pairs.push((v, fresh.fresh(avoid)));
    }
    let renaming = Renaming::from_pairs(pairs).expect("fresh names are distinct");
    (c.apply(renaming.as_substitution()), renaming)
}

fn ordered_clause_vars(c: &Clause) -> Vec<Var> {
    let mut out = Vec::new();
    c.head.args.iter().for_each(|t| t.collect_vars_ordered(&mut out));
    for a in c.stack_body.iter().chain(&c.queue_body) {
        a.args.iter().for_each(|t| t.collect_vars_ordered(&mut out));
    }
    out
}

/// Variables of a goal in order of first occurrence.
pub fn ordered_vars(atoms: &[Atom]) -> Vec<Var> {
    let mut out = Vec::new();
    for a in atoms {
        a.args.iter().for_each(|t| t.collect_vars_ordered(&mut out));
    }
    out
}

/// Renames variables to `_0, _1, ...` in order of first occurrence.
pub fn canonical_form(atoms: &[Atom]) -> Vec<Atom> {
    let numbering = Substitution::from_pairs(
        ordered_vars(atoms).into_iter().enumerate().map(|(i, v)| (v, Term::var(&format!("_{i}")))),
    );
    apply_all(atoms, &numbering)
}

/// A renaming `tau` with `F tau = G` as lists, if one exists.
pub fn variant_of(f: &[Atom], g: &[Atom]) -> Option<Renaming> {
    if f.len() != g.len() || canonical_form(f) != canonical_form(g) {
        return None;
    }
    Renaming::from_pairs(ordered_vars(f).into_iter().zip(ordered_vars(g)))
}

/// A substitution `lambda` with `G lambda` an order-preserving sublist of `F`.
pub fn subsumes_as_list(g: &[Atom], f: &[Atom]) -> Option<Substitution> {
    subsumes_as_list_positions(g, f).map(|(s, _)| s)
}

/// As [`subsumes_as_list`], also returning the chosen positions in `F`.
pub fn subsumes_as_list_positions(g: &[Atom], f: &[Atom]) -> Option<(Substitution, Vec<usize>)> {
    fn go(g: &[Atom], f: &[Atom], from: usize, s: &Matcher, picked: &mut Vec<usize>) -> Option<Substitution> {
        let Some((first, rest)) = g.split_first() else {
            return Some(s.substitution());
        };
        let remaining = rest.len();
        for pos in from..f.len().saturating_sub(remaining) {
            let mut ext = s.clone();
            if ext.match_atom(first, &f[pos], &|_| true) {
                picked.push(pos);
                if let Some(done) = go(rest, f, pos + 1, &ext, picked) {
                    return Some(done);
                }
                picked.pop();
            }
        }
        None
    }
    let mut picked = Vec::new();
    go(g, f, 0, &Matcher::new(), &mut picked).map(|s| (s, picked))
}

/// Index of variables by the atoms (positions) that contain them.
pub(crate) fn occurrences(atoms: &[Atom]) -> HashMap<Var, Vec<usize>> {
    let mut out: HashMap<Var, Vec<usize>> = HashMap::new();
    for (i, a) in atoms.iter().enumerate() {
        for v in a.vars() {
            out.entry(v).or_default().push(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_atom, parse_goal};

    fn a(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    fn g(s: &str) -> Vec<Atom> {
        parse_goal(s).unwrap()
    }

    #[test]
    fn mgu_single_binding() {
        let s = mgu(&a("p(x)"), &a("p(a)")).unwrap();
        assert_eq!(s.to_string(), "{x/a}");
    }

    #[test]
    fn mgu_predicate_clash() {
        assert!(mgu(&a("p(x)"), &a("q(x)")).is_none());
        assert!(mgu(&a("p(x)"), &a("p(x,y)")).is_none());
    }

    #[test]
    fn mgu_chained_solved_form() {
        // x = y, y = a  =>  {x/a, y/a}
        let s = mgu(&a("p(x,y)"), &a("p(y,a)")).unwrap();
        assert_eq!(s.to_string(), "{x/a, y/a}");
        assert!(s.is_idempotent());
    }

    #[test]
    fn mgu_occurs_check() {
        assert!(mgu(&a("p(x)"), &a("p(f(x))")).is_none());
        let loose = mgu_with(&a("p(x)"), &a("p(f(x))"), UnifyOptions { occurs_check: false });
        assert!(loose.is_some());
    }

    #[test]
    fn mgu_keeps_goal_variable_names() {
        let s = mgu(&a("p(x,x)"), &a("p(v1,v2)")).unwrap();
        assert_eq!(s.to_string(), "{v1/x, v2/x}");
    }

    #[test]
    fn apply_is_simultaneous() {
        let s = Substitution::from_pairs([(Var::new("x"), Term::app("f", vec![Term::var("y")]))]);
        assert_eq!(a("p(x,y)").apply(&s).to_string(), "p(f(y),y)");
        assert_eq!(a("p(x)").apply(&Substitution::new()).to_string(), "p(x)");
        let s = Substitution::from_pairs([(Var::new("x"), Term::constant("a"))]);
        assert_eq!(a("p(x)").apply(&s).to_string(), "p(a)");
    }

    #[test]
    fn rename_apart_uses_fresh_names() {
        let c = crate::syntax::parse_clause("p(x) <- q(x).").unwrap();
        let avoid: BTreeSet<Var> = [Var::new("x")].into();
        let mut fresh = FreshVars::new();
        let (r, xi) = rename_apart(&c, &avoid, &mut fresh);
        assert_eq!(r.to_string(), "p(v1) <- q(v1).");
        assert_eq!(xi.to_string(), "{x/v1}");
        let (r2, _) = rename_apart(&c, &avoid, &mut fresh);
        assert_eq!(r2.to_string(), "p(v2) <- q(v2).");
    }

    #[test]
    fn rename_apart_ground_clause_unchanged() {
        let c = crate::syntax::parse_clause("p(a) <- q(b).").unwrap();
        let (r, xi) = rename_apart(&c, &BTreeSet::new(), &mut FreshVars::new());
        assert_eq!(r, c);
        assert!(xi.is_empty());
    }

    #[test]
    fn rename_apart_skips_avoided_fresh_names() {
        let c = crate::syntax::parse_clause("p(x).").unwrap();
        let avoid: BTreeSet<Var> = [Var::new("v1"), Var::new("v2")].into();
        let (r, _) = rename_apart(&c, &avoid, &mut FreshVars::new());
        assert_eq!(r.to_string(), "p(v3) <-.");
    }

    #[test]
    fn variant_examples() {
        assert_eq!(variant_of(&g("p(x),q(x)"), &g("p(y),q(y)")).unwrap().to_string(), "{x/y}");
        assert!(variant_of(&g("p(x),q(x)"), &g("p(y),q(z)")).is_none());
        assert!(variant_of(&[], &[]).unwrap().is_empty());
        assert!(variant_of(&g("p(x)"), &g("p(x),p(x)")).is_none());
    }

    #[test]
    fn subsumption_examples() {
        assert_eq!(subsumes_as_list(&g("p(x)"), &g("q(a),p(b)")).unwrap().to_string(), "{x/b}");
        assert_eq!(subsumes_as_list(&g("p(x),q(x)"), &g("p(a),r(a),q(a)")).unwrap().to_string(), "{x/a}");
        assert!(subsumes_as_list(&g("p(a)"), &g("p(b)")).is_none());
        // order matters
        assert!(subsumes_as_list(&g("q(x),p(x)"), &g("p(a),q(a)")).is_none());
        // backtracking over the first choice
        assert_eq!(subsumes_as_list(&g("p(x),q(x)"), &g("p(a),p(b),q(b)")).unwrap().to_string(), "{x/b}");
    }

    #[test]
    fn compose_matches_sequential_application() {
        let t = a("p(x,y,z)");
        let s1 = Substitution::from_pairs([(Var::new("x"), Term::var("y"))]);
        let s2 = Substitution::from_pairs([(Var::new("y"), Term::constant("a")), (Var::new("z"), Term::var("x"))]);
        assert_eq!(t.apply(&s1).apply(&s2), t.apply(&s1.compose(&s2)));
    }

    #[test]
    fn renaming_inverse_roundtrip() {
        let r = variant_of(&g("p(x,y)"), &g("p(u,w)")).unwrap();
        let back = g("p(x,y)");
        let there = apply_all(&back, r.as_substitution());
        assert_eq!(apply_all(&there, r.inverse().as_substitution()), back);
    }
}
