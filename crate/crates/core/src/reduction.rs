//! Goal reduction: removing atoms that map into the rest of the goal under
//! one substitution fixing the kept variables and a protected set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::priority::{Priority, PriorityAtom, PriorityGoal};
use crate::term::{occurrences, vars_of, Atom, Matcher, Substitution, Term, Var};

/// Largest set of atoms the greedy search eliminates in one move.
pub const GROUP_LIMIT: usize = 8;

/// Longest goal the exhaustive search accepts; longer goals fall back to greedy.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionMode {
    #[default]
    Greedy,
    Exhaustive,
}

/// Atom `index` of the input goal was eliminated by the kept atom `by`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Elimination {
    pub index: usize,
    pub by: usize,
}

/// The kept atom `index` moved from priority `from` to `to`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Advancement {
    pub index: usize,
    pub from: Priority,
    pub to: Priority,
}

/// Witness of a reduction. Indices refer to the input goal in list
/// (ascending priority) order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReductionCertificate {
    pub tau: Substitution,
    pub kept: Vec<usize>,
    pub eliminated: Vec<Elimination>,
    pub advancement: Vec<Advancement>,
}

impl ReductionCertificate {
    pub fn identity(len: usize) -> Self {
        ReductionCertificate { kept: (0..len).collect(), ..Default::default() }
    }

    pub fn is_identity(&self) -> bool {
        self.eliminated.is_empty() && self.advancement.is_empty()
    }

    /// Eliminated atoms grouped by their eliminating atom.
    pub fn groups(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in &self.eliminated {
            out.entry(e.by).or_default().push(e.index);
        }
        out
    }
}

pub fn reduce_list_goal(goal: &[Atom], protected: &BTreeSet<Var>, mode: ReductionMode) -> (Vec<Atom>, ReductionCertificate) {
    let cert = find_reduction(goal, protected, mode);
    let kept = cert.kept.iter().map(|&i| goal[i].clone()).collect();
    (kept, cert)
}

/// Reduction of a priority goal. With `advancement` every eliminating atom
/// takes the least priority among itself and the atoms it eliminates.
pub fn reduce_priority_goal(
    goal: &PriorityGoal,
    protected: &BTreeSet<Var>,
    advancement: bool,
    mode: ReductionMode,
) -> (PriorityGoal, ReductionCertificate) {
    let mut cert = find_reduction(&goal.as_list(), protected, mode);
    if advancement {
        cert.advancement = advancements(goal, &cert);
    }
    (apply_certificate(goal, &cert), cert)
}

fn advancements(goal: &PriorityGoal, cert: &ReductionCertificate) -> Vec<Advancement> {
    let atoms = goal.atoms();
    cert.groups()
        .into_iter()
        .filter_map(|(by, group)| {
            let from = &atoms[by].priority;
            let to = group.iter().map(|&i| &atoms[i].priority).chain([from]).min().expect("nonempty");
            (to != from).then(|| Advancement { index: by, from: from.clone(), to: to.clone() })
        })
        .collect()
}

/// The kept atoms of `goal`, with advanced priorities where the certificate says so.
pub fn apply_certificate(goal: &PriorityGoal, cert: &ReductionCertificate) -> PriorityGoal {
    let moved: HashMap<usize, &Priority> = cert.advancement.iter().map(|a| (a.index, &a.to)).collect();
    let atoms = cert
        .kept
        .iter()
        .map(|&i| {
            let a = &goal.atoms()[i];
            let p = moved.get(&i).map_or_else(|| a.priority.clone(), |p| (*p).clone());
            PriorityAtom::new(a.atom.clone(), p, a.lineage.clone())
        })
        .collect();
    PriorityGoal::new(atoms).expect("advanced priorities come from eliminated atoms")
}

/// Checks the reduction conditions for a list goal: `n` is the kept
/// sublist, every eliminated atom maps onto its eliminating atom under
/// `tau`, and `tau` fixes `var(n)` and `protected`.
pub fn verify_reduction(goal: &[Atom], n: &[Atom], cert: &ReductionCertificate, protected: &BTreeSet<Var>) -> bool {
    if !cert.kept.windows(2).all(|w| w[0] < w[1]) || cert.kept.iter().any(|&i| i >= goal.len()) {
        return false;
    }
    if cert.kept.len() != n.len() || cert.kept.iter().zip(n).any(|(&i, a)| goal[i] != *a) {
        return false;
    }
    let kept: BTreeSet<usize> = cert.kept.iter().copied().collect();
    let mut seen = BTreeSet::new();
    for e in &cert.eliminated {
        if e.index >= goal.len() || kept.contains(&e.index) || !kept.contains(&e.by) || !seen.insert(e.index) {
            return false;
        }
        if goal[e.index].apply(&cert.tau) != goal[e.by] {
            return false;
        }
    }
    if kept.len() + seen.len() != goal.len() {
        return false;
    }
    let fixed = vars_of(n);
    cert.tau.is_identity_on(fixed.iter().chain(protected))
}

/// The list conditions on the priority-ordered atoms, plus: the kept atoms
/// carry `min({p_j} ∪ priorities(A_j))` when `advancement` is on and their
/// own priority otherwise.
pub fn verify_priority_reduction(
    goal: &PriorityGoal,
    n: &PriorityGoal,
    cert: &ReductionCertificate,
    protected: &BTreeSet<Var>,
    advancement: bool,
) -> bool {
    let list = goal.as_list();
    let kept_atoms: Vec<Atom> = cert.kept.iter().filter_map(|&i| list.get(i).cloned()).collect();
    if !verify_reduction(&list, &kept_atoms, cert, protected) {
        return false;
    }
    let expected = if advancement { advancements(goal, cert) } else { Vec::new() };
    if cert.advancement != expected {
        return false;
    }
    apply_certificate(goal, cert) == *n
}

fn find_reduction(goal: &[Atom], protected: &BTreeSet<Var>, mode: ReductionMode) -> ReductionCertificate {
    match mode {
        ReductionMode::Exhaustive if goal.len() <= EXHAUSTIVE_LIMIT => exhaustive(goal, protected),
        _ => greedy(goal, protected),
    }
}

/// Repeatedly removes the latest atom (together with the atoms sharing its
/// rebound variables) that can be mapped into the rest of the goal.
fn greedy(goal: &[Atom], protected: &BTreeSet<Var>) -> ReductionCertificate {
    let n = goal.len();
    let mut alive = vec![true; n];
    let mut by: Vec<Option<usize>> = vec![None; n];
    let mut tau = Substitution::new();
    'scan: loop {
        for b in (0..n).rev().filter(|&b| alive[b]) {
            let Some((group, theta)) = eliminate_group(goal, &alive, protected, b) else {
                continue;
            };
            let mut alive2 = alive.clone();
            let mut by2 = by.clone();
            for &(s, t) in &group {
                alive2[s] = false;
                by2[s] = Some(t);
            }
            for i in 0..n {
                let mut t = by2[i];
                while let Some(j) = t.filter(|&j| !alive2[j]) {
                    t = by2[j];
                }
                if by2[i].is_some() {
                    by2[i] = t;
                }
            }
            let candidate = certificate(&alive2, &by2, tau.compose(&theta));
            let kept: Vec<Atom> = candidate.kept.iter().map(|&i| goal[i].clone()).collect();
            if verify_reduction(goal, &kept, &candidate, protected) {
                alive = alive2;
                by = by2;
                tau = candidate.tau;
                continue 'scan;
            }
        }
        break;
    }
    certificate(&alive, &by, tau)
}

fn certificate(alive: &[bool], by: &[Option<usize>], tau: Substitution) -> ReductionCertificate {
    ReductionCertificate {
        tau,
        kept: (0..alive.len()).filter(|&i| alive[i]).collect(),
        eliminated: (0..alive.len())
            .filter_map(|i| by[i].filter(|_| !alive[i]).map(|t| Elimination { index: i, by: t }))
            .collect(),
        advancement: Vec::new(),
    }
}

struct GroupSearch<'a> {
    goal: &'a [Atom],
    protected: &'a BTreeSet<Var>,
    occurrences: HashMap<Var, Vec<usize>>,
    by_predicate: HashMap<(Arc<str>, usize), Vec<usize>>,
    by_argument: HashMap<(Arc<str>, usize, usize, Term), Vec<usize>>,
}

/// A set `S` containing `b`, each member paired with a target outside `S`,
/// and a matcher taking every member onto its target while fixing every
/// variable that occurs outside `S` or is protected.
fn eliminate_group(
    goal: &[Atom],
    alive: &[bool],
    protected: &BTreeSet<Var>,
    b: usize,
) -> Option<(Vec<(usize, usize)>, Substitution)> {
    let live: Vec<usize> = (0..goal.len()).filter(|&i| alive[i]).collect();
    let live_atoms: Vec<Atom> = live.iter().map(|&i| goal[i].clone()).collect();
    let occurrences = occurrences(&live_atoms)
        .into_iter()
        .map(|(v, is)| (v, is.into_iter().map(|i| live[i]).collect()))
        .collect();
    let mut by_predicate: HashMap<(Arc<str>, usize), Vec<usize>> = HashMap::new();
    for &i in &live {
        by_predicate.entry((goal[i].predicate.clone(), goal[i].arity())).or_default().push(i);
    }
    let mut by_argument: HashMap<(Arc<str>, usize, usize, Term), Vec<usize>> = HashMap::new();
    for &i in &live {
        for (k, t) in goal[i].args.iter().enumerate() {
            by_argument.entry((goal[i].predicate.clone(), goal[i].arity(), k, t.clone())).or_default().push(i);
        }
    }
    let search = GroupSearch { goal, protected, occurrences, by_predicate, by_argument };
    let mut members = BTreeSet::new();
    members.insert(b);
    search.extend(members, BTreeMap::new(), Matcher::new())
}

impl GroupSearch<'_> {
    /// The value an argument must take in any target, when already determined.
    fn known_value(&self, t: &Term, m: &Matcher) -> Option<Term> {
        match t {
            Term::Var(v) => m.get(v).cloned().or_else(|| self.protected.contains(v).then(|| t.clone())),
            _ if t.is_ground() => Some(t.clone()),
            _ => None,
        }
    }

    fn extend(
        &self,
        members: BTreeSet<usize>,
        targets: BTreeMap<usize, usize>,
        m: Matcher,
    ) -> Option<(Vec<(usize, usize)>, Substitution)> {
        let Some(&s) = members.iter().find(|s| !targets.contains_key(s)) else {
            return Some((targets.into_iter().collect(), m.substitution()));
        };
        let pattern = &self.goal[s];
        let key = (pattern.predicate.clone(), pattern.arity());
        let known = pattern.args.iter().enumerate().find_map(|(k, t)| self.known_value(t, &m).map(|v| (k, v)));
        let candidates = match known {
            Some((k, v)) => self.by_argument.get(&(key.0, key.1, k, v))?,
            None => self.by_predicate.get(&key)?,
        };
        for &t in candidates {
            if members.contains(&t) {
                continue;
            }
            let mut m2 = m.clone();
            if !m2.match_atom(pattern, &self.goal[t], &|v| !self.protected.contains(v)) {
                continue;
            }
            let mut grown = members.clone();
            for (v, value) in m2.iter() {
                if value.as_var() != Some(v) {
                    grown.extend(self.occurrences.get(v).into_iter().flatten().copied());
                }
            }
            if grown.len() > GROUP_LIMIT || grown.contains(&t) || targets.values().any(|x| grown.contains(x)) {
                continue;
            }
            let mut targets2 = targets.clone();
            targets2.insert(s, t);
            if let Some(found) = self.extend(grown, targets2, m2) {
                return Some(found);
            }
        }
        None
    }
}

/// The shortest kept sublist (first in lexicographic order of positions)
/// that admits a single eliminating substitution.
fn exhaustive(goal: &[Atom], protected: &BTreeSet<Var>) -> ReductionCertificate {
    let n = goal.len();
    if n == 0 {
        return ReductionCertificate::identity(0);
    }
    for size in 1..=n {
        let mut found = None;
        for_each_combination(n, size, &mut |kept| {
            if found.is_none() {
                found = assign_all(goal, kept, protected);
            }
            found.is_some()
        });
        if let Some(cert) = found {
            return cert;
        }
    }
    ReductionCertificate::identity(n)
}

fn assign_all(goal: &[Atom], kept: &[usize], protected: &BTreeSet<Var>) -> Option<ReductionCertificate> {
    let kept_atoms: Vec<&Atom> = kept.iter().map(|&i| &goal[i]).collect();
    let fixed: BTreeSet<Var> = vars_of(kept_atoms.iter().copied()).into_iter().chain(protected.iter().cloned()).collect();
    let eliminated: Vec<usize> = (0..goal.len()).filter(|i| !kept.contains(i)).collect();

    fn go(
        goal: &[Atom],
        kept: &[usize],
        rest: &[usize],
        fixed: &BTreeSet<Var>,
        m: &Matcher,
        out: &mut Vec<Elimination>,
    ) -> Option<Matcher> {
        let Some((&b, tail)) = rest.split_first() else {
            return Some(m.clone());
        };
        for &t in kept {
            let mut m2 = m.clone();
            if m2.match_atom(&goal[b], &goal[t], &|v| !fixed.contains(v)) {
                out.push(Elimination { index: b, by: t });
                if let Some(done) = go(goal, kept, tail, fixed, &m2, out) {
                    return Some(done);
                }
                out.pop();
            }
        }
        None
    }

    let mut out = Vec::new();
    let m = go(goal, kept, &eliminated, &fixed, &Matcher::fixing(&fixed), &mut out)?;
    let tau = Substitution::from_pairs(m.iter().filter(|(v, _)| !fixed.contains(*v)).map(|(v, t)| (v.clone(), t.clone())));
    Some(ReductionCertificate { tau, kept: kept.to_vec(), eliminated: out, advancement: Vec::new() })
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order until it returns true.
fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            if go(n, k, i + 1, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    go(n, k, 0, &mut Vec::with_capacity(k), f);
}
