//! Priority atoms and goals over exact rationals, merging, concatenation
//! and shiftings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::engine::LineageTag;
use crate::term::{variant_of, Atom, Renaming, Substitution, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PriorityError {
    #[error("priority {0} occurs in both goals")]
    Clash(Priority),
    #[error("concatenation requires every priority of the left goal below every priority of the right goal")]
    OrderViolation,
    #[error("priority {0} is outside the support of the shifting")]
    OutsideSupport(Priority),
    #[error("shifting is not strictly increasing")]
    NotIncreasing,
    #[error("invalid priority literal `{0}`")]
    BadLiteral(String),
}

/// An exact rational priority. Smaller is scheduled earlier.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Priority(BigRational);

impl Priority {
    pub fn int(n: i64) -> Self {
        Priority(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Priority(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn from_value(v: BigRational) -> Self {
        Priority(v)
    }

    pub fn midpoint(&self, other: &Priority) -> Priority {
        Priority((&self.0 + &other.0) / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn plus_one(&self) -> Priority {
        Priority(&self.0 + BigRational::one())
    }

    pub fn minus_one(&self) -> Priority {
        Priority(&self.0 - BigRational::one())
    }
}

impl From<i64> for Priority {
    fn from(n: i64) -> Self {
        Priority::int(n)
    }
}

impl FromStr for Priority {
    type Err = PriorityError;

    /// Accepts `n`, `n/d` and exact decimals such as `12.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PriorityError::BadLiteral(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Priority(BigRational::new(n, d)));
        }
        if let Some((int, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let whole: BigInt = if int == "-" || int.is_empty() { BigInt::zero() } else { int.parse().map_err(|_| bad())? };
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let f: BigInt = frac.parse().map_err(|_| bad())?;
            let magnitude = whole.abs() * &scale + f;
            let n = if negative { -magnitude } else { magnitude };
            return Ok(Priority(BigRational::new(n, scale)));
        }
        let n: BigInt = t.parse().map_err(|_| bad())?;
        Ok(Priority(BigRational::from_integer(n)))
    }
}

impl fmt::Display for Priority {
    /// Integers print bare, finite decimals as decimals, anything else as `n/d`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.0;
        if r.is_integer() {
            return write!(f, "{}", r.numer());
        }
        let mut d = r.denom().clone();
        let (two, five) = (BigInt::from(2), BigInt::from(5));
        let mut digits = 0u32;
        let (mut twos, mut fives) = (0u32, 0u32);
        while d.is_even() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if d.is_one() {
            digits = twos.max(fives);
        }
        if digits == 0 || digits > 12 {
            return write!(f, "{}/{}", r.numer(), r.denom());
        }
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = (r * BigRational::from_integer(scale.clone())).to_integer();
        let sign = if scaled.is_negative() { "-" } else { "" };
        let (whole, frac) = scaled.abs().div_rem(&scale);
        write!(f, "{sign}{whole}.{:0>width$}", frac.to_string(), width = digits as usize)
    }
}

impl fmt::Debug for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Priority {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A strictly intermediate priority: the midpoint for two finite bounds,
/// `bound ± 1` when one side is open, zero when both are.
pub fn fresh_between(low: Option<&Priority>, high: Option<&Priority>) -> Priority {
    match (low, high) {
        (Some(l), Some(h)) => {
            debug_assert!(l < h, "fresh_between needs low < high");
            l.midpoint(h)
        }
        (None, Some(h)) => h.minus_one(),
        (Some(l), None) => l.plus_one(),
        (None, None) => Priority::int(0),
    }
}

/// `count` ascending priorities strictly inside `(low, high)`.
///
/// An open lower bound fills downwards from `high`, so the values nearest
/// the bound are `high - 1, high - 2, ...`; otherwise values are produced
/// upwards from `low`.
pub fn fresh_run(low: Option<&Priority>, high: Option<&Priority>, count: usize) -> Vec<Priority> {
    let mut out = Vec::with_capacity(count);
    match (low, high) {
        (None, None) => (1..=count as i64).for_each(|i| out.push(Priority::int(i))),
        (None, Some(_)) => {
            let mut hi = high.cloned();
            for _ in 0..count {
                let p = fresh_between(None, hi.as_ref());
                hi = Some(p.clone());
                out.push(p);
            }
            out.reverse();
        }
        (Some(_), _) => {
            let mut lo = low.cloned();
            for _ in 0..count {
                let p = fresh_between(lo.as_ref(), high);
                lo = Some(p.clone());
                out.push(p);
            }
        }
    }
    out
}

/// An atom tagged with a priority and with its lineage in a derivation.
///
/// Equality compares the atom and the priority only; the lineage is
/// bookkeeping.
#[derive(Clone)]
pub struct PriorityAtom {
    pub atom: Atom,
    pub priority: Priority,
    pub lineage: LineageTag,
}

impl PriorityAtom {
    pub fn new(atom: Atom, priority: Priority, lineage: LineageTag) -> Self {
        PriorityAtom { atom, priority, lineage }
    }
}

impl PartialEq for PriorityAtom {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority && self.atom == other.atom
    }
}

impl Eq for PriorityAtom {}

impl fmt::Display for PriorityAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.atom, self.priority)
    }
}

impl fmt::Debug for PriorityAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]<{}>", self.atom, self.priority, self.lineage)
    }
}

impl Serialize for PriorityAtom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A set of priority atoms with pairwise distinct priorities, kept in
/// ascending priority order.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct PriorityGoal {
    atoms: Vec<PriorityAtom>,
}

impl PriorityGoal {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut atoms: Vec<PriorityAtom>) -> Result<Self, PriorityError> {
        atoms.sort_by(|a, b| a.priority.cmp(&b.priority));
        if let Some(w) = atoms.windows(2).find(|w| w[0].priority == w[1].priority) {
            return Err(PriorityError::Clash(w[0].priority.clone()));
        }
        Ok(PriorityGoal { atoms })
    }

    /// Priorities `1..=k` in list order, lineage `Initial(i)`.
    pub fn from_list(atoms: &[Atom]) -> Self {
        PriorityGoal {
            atoms: atoms
                .iter()
                .enumerate()
                .map(|(i, a)| PriorityAtom::new(a.clone(), Priority::int(i as i64 + 1), LineageTag::initial(i)))
                .collect(),
        }
    }

    /// Pairs of (atom, priority) with `Initial` lineage in the given order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Atom, Priority)>) -> Result<Self, PriorityError> {
        Self::new(
            pairs.into_iter().enumerate().map(|(i, (a, p))| PriorityAtom::new(a, p, LineageTag::initial(i))).collect(),
        )
    }

    pub fn atoms(&self) -> &[PriorityAtom] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<PriorityAtom> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PriorityAtom> {
        self.atoms.iter()
    }

    pub fn get(&self, i: usize) -> Option<&PriorityAtom> {
        self.atoms.get(i)
    }

    pub fn first(&self) -> Option<&PriorityAtom> {
        self.atoms.first()
    }

    pub fn min_priority(&self) -> Option<&Priority> {
        self.atoms.first().map(|a| &a.priority)
    }

    pub fn max_priority(&self) -> Option<&Priority> {
        self.atoms.last().map(|a| &a.priority)
    }

    pub fn priorities(&self) -> Vec<Priority> {
        self.atoms.iter().map(|a| a.priority.clone()).collect()
    }

    pub fn priority_set(&self) -> BTreeSet<Priority> {
        self.atoms.iter().map(|a| a.priority.clone()).collect()
    }

    /// The atoms in scheduling order.
    pub fn as_list(&self) -> Vec<Atom> {
        self.atoms.iter().map(|a| a.atom.clone()).collect()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        crate::term::vars_of(self.atoms.iter().map(|a| &a.atom))
    }

    pub fn position_of(&self, p: &Priority) -> Option<usize> {
        self.atoms.binary_search_by(|a| a.priority.cmp(p)).ok()
    }

    pub fn without(&self, index: usize) -> PriorityGoal {
        let mut atoms = self.atoms.clone();
        atoms.remove(index);
        PriorityGoal { atoms }
    }

    /// Keeps the atoms at the given (ascending) indices.
    pub fn select(&self, indices: &[usize]) -> PriorityGoal {
        PriorityGoal { atoms: indices.iter().map(|&i| self.atoms[i].clone()).collect() }
    }

    pub fn filter(&self, keep: impl Fn(&PriorityAtom) -> bool) -> PriorityGoal {
        PriorityGoal { atoms: self.atoms.iter().filter(|a| keep(a)).cloned().collect() }
    }

    pub fn apply(&self, s: &Substitution) -> PriorityGoal {
        PriorityGoal {
            atoms: self
                .atoms
                .iter()
                .map(|a| PriorityAtom::new(a.atom.apply(s), a.priority.clone(), a.lineage.clone()))
                .collect(),
        }
    }

    /// Union of goals with disjoint priorities.
    pub fn merge(&self, other: &PriorityGoal) -> Result<PriorityGoal, PriorityError> {
        let mine = self.priority_set();
        if let Some(a) = other.atoms.iter().find(|a| mine.contains(&a.priority)) {
            return Err(PriorityError::Clash(a.priority.clone()));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        PriorityGoal::new(atoms)
    }

    /// `self | other`: a merge where every priority of `self` precedes every priority of `other`.
    pub fn concat(&self, other: &PriorityGoal) -> Result<PriorityGoal, PriorityError> {
        if !self.precedes(other) {
            return Err(PriorityError::OrderViolation);
        }
        self.merge(other)
    }

    /// `self ⊣ other`.
    pub fn precedes(&self, other: &PriorityGoal) -> bool {
        match (self.max_priority(), other.min_priority()) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }

    pub fn shift(&self, pi: &Shifting) -> Result<PriorityGoal, PriorityError> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                pi.apply(&a.priority)
                    .map(|p| PriorityAtom::new(a.atom.clone(), p.clone(), a.lineage.clone()))
                    .ok_or_else(|| PriorityError::OutsideSupport(a.priority.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        PriorityGoal::new(atoms)
    }

    pub fn contains_atom(&self, a: &PriorityAtom) -> bool {
        self.position_of(&a.priority).is_some_and(|i| self.atoms[i].atom == a.atom)
    }
}

impl fmt::Display for PriorityGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PriorityGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl Serialize for PriorityGoal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.atoms.iter())
    }
}

/// A strictly increasing map between finite sets of priorities.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Shifting {
    map: BTreeMap<Priority, Priority>,
}

impl Shifting {
    pub fn new(pairs: impl IntoIterator<Item = (Priority, Priority)>) -> Result<Self, PriorityError> {
        let mut map = BTreeMap::new();
        for (from, to) in pairs {
            if let Some(prev) = map.insert(from, to.clone()) {
                if prev != to {
                    return Err(PriorityError::NotIncreasing);
                }
            }
        }
        let s = Shifting { map };
        if s.is_increasing() {
            Ok(s)
        } else {
            Err(PriorityError::NotIncreasing)
        }
    }

    pub fn identity_on(goal: &PriorityGoal) -> Self {
        Shifting { map: goal.priorities().into_iter().map(|p| (p.clone(), p)).collect() }
    }

    pub fn is_increasing(&self) -> bool {
        self.map.values().collect::<Vec<_>>().windows(2).all(|w| w[0] < w[1])
    }

    pub fn apply(&self, p: &Priority) -> Option<&Priority> {
        self.map.get(p)
    }

    pub fn support(&self) -> impl Iterator<Item = &Priority> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Priority, &Priority)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `self` then `other`, on the part of the support where both are defined.
    pub fn then(&self, other: &Shifting) -> Shifting {
        Shifting {
            map: self.map.iter().filter_map(|(a, b)| other.apply(b).map(|c| (a.clone(), c.clone()))).collect(),
        }
    }

    pub fn inverse(&self) -> Shifting {
        Shifting { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }
}

impl fmt::Display for Shifting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Shifting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Shifting {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_map(self.map.iter().map(|(a, b)| (a.to_string(), b.to_string())))
    }
}

/// The shifting taking `f` onto `g`, when both list the same atoms in the
/// same priority order.
///
/// Any order-preserving map between finite sets of rationals extends to an
/// increasing bijection of the rationals, so comparing the ordered atom
/// sequences decides existence.
pub fn find_shifting(f: &PriorityGoal, g: &PriorityGoal) -> Option<Shifting> {
    if f.len() != g.len() || f.iter().zip(g.iter()).any(|(a, b)| a.atom != b.atom) {
        return None;
    }
    Some(Shifting { map: f.iter().zip(g.iter()).map(|(a, b)| (a.priority.clone(), b.priority.clone())).collect() })
}

/// A renaming and a shifting taking `f` onto `g`.
pub fn p_variant_of(f: &PriorityGoal, g: &PriorityGoal) -> Option<(Renaming, Shifting)> {
    let renaming = variant_of(&f.as_list(), &g.as_list())?;
    let renamed = f.apply(renaming.as_substitution());
    let shifting = find_shifting(&renamed, g)?;
    Some((renaming, shifting))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_priority_goal;

    fn pg(s: &str) -> PriorityGoal {
        parse_priority_goal(s).unwrap()
    }

    fn p(s: &str) -> Priority {
        s.parse().unwrap()
    }

    #[test]
    fn parses_rational_literals_exactly() {
        assert_eq!(p("12.5"), Priority::ratio(25, 2));
        assert_eq!(p("3/2"), Priority::ratio(3, 2));
        assert_eq!(p("-0.25"), Priority::ratio(-1, 4));
        assert_eq!(p("-7"), Priority::int(-7));
        assert!("1/0".parse::<Priority>().is_err());
        assert!("x".parse::<Priority>().is_err());
    }

    #[test]
    fn display_prefers_decimals() {
        assert_eq!(Priority::ratio(25, 2).to_string(), "12.5");
        assert_eq!(Priority::ratio(-1, 4).to_string(), "-0.25");
        assert_eq!(Priority::ratio(1, 3).to_string(), "1/3");
        assert_eq!(Priority::int(4).to_string(), "4");
        assert_eq!(Priority::ratio(7, 5).to_string(), "1.4");
    }

    #[test]
    fn merge_examples() {
        assert_eq!(pg("a[1]").merge(&pg("b[2]")).unwrap(), pg("a[1], b[2]"));
        assert_eq!(pg("a[1]").merge(&PriorityGoal::empty()).unwrap(), pg("a[1]"));
        assert_eq!(pg("a[1]").merge(&pg("b[1]")), Err(PriorityError::Clash(Priority::int(1))));
    }

    #[test]
    fn concat_examples() {
        assert_eq!(pg("a[1]").concat(&pg("b[2]")).unwrap(), pg("a[1], b[2]"));
        assert_eq!(pg("a[2]").concat(&pg("b[1]")), Err(PriorityError::OrderViolation));
        assert_eq!(PriorityGoal::empty().concat(&pg("b[1], c[3]")).unwrap(), pg("b[1], c[3]"));
    }

    #[test]
    fn fresh_between_examples() {
        assert_eq!(fresh_between(Some(&p("1")), Some(&p("2"))), p("3/2"));
        assert_eq!(fresh_between(None, Some(&p("1"))), p("0"));
        assert_eq!(fresh_between(Some(&p("3")), None), p("4"));
    }

    #[test]
    fn fresh_run_is_ascending_and_inside() {
        let run = fresh_run(Some(&p("1")), Some(&p("2")), 4);
        assert!(run.windows(2).all(|w| w[0] < w[1]));
        assert!(run.iter().all(|x| *x > p("1") && *x < p("2")));
        assert_eq!(fresh_run(None, Some(&p("2")), 2), vec![p("0"), p("1")]);
        assert_eq!(fresh_run(Some(&p("3")), None, 2), vec![p("4"), p("5")]);
    }

    #[test]
    fn find_shifting_examples() {
        let s = find_shifting(&pg("b[3], q[10]"), &pg("b[12], q[12.5]")).unwrap();
        assert_eq!(s.to_string(), "{3->12, 10->12.5}");
        let g = pg("a(x)[1], b[5/2]");
        assert!(find_shifting(&g, &g).unwrap().is_identity());
        assert!(find_shifting(&pg("b[3], q[10]"), &pg("q[12.5], b[13]")).is_none());
    }

    #[test]
    fn p_variant_examples() {
        let (r, s) = p_variant_of(&pg("p(x)[1], q(x)[5]"), &pg("p(y)[2], q(y)[3]")).unwrap();
        assert_eq!(r.to_string(), "{x/y}");
        assert_eq!(s.to_string(), "{1->2, 5->3}");
        assert!(p_variant_of(&pg("p(x)[1], q(x)[5]"), &pg("q(y)[2], p(y)[3]")).is_none());
        let g = pg("p(x)[1], q(y)[2]");
        let (r, s) = p_variant_of(&g, &g).unwrap();
        assert!(r.is_empty() && s.is_identity());
    }

    #[test]
    fn shifting_rejects_non_increasing() {
        assert_eq!(Shifting::new([(p("3"), p("13")), (p("10"), p("12.5"))]), Err(PriorityError::NotIncreasing));
    }

    #[test]
    fn shifting_outside_support_is_an_error() {
        let s = Shifting::new([(p("1"), p("2"))]).unwrap();
        assert_eq!(pg("a[1], b[2]").shift(&s), Err(PriorityError::OutsideSupport(p("2"))));
    }
}
