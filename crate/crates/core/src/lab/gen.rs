//! Random function-free goals, clauses and priorities over a small vocabulary.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::LineageTag;
use crate::priority::{Priority, PriorityAtom, PriorityGoal};
use crate::term::{Atom, Clause, Substitution, Term, Var};

pub const PREDICATES: [(&str, usize); 4] = [("p", 1), ("q", 2), ("r", 0), ("s", 1)];
pub const CONSTANTS: [&str; 3] = ["a", "b", "c"];
pub const VARIABLES: [&str; 4] = ["x", "y", "z", "w"];

pub const MAX_GOAL: usize = 5;
pub const MAX_BODY: usize = 3;

pub fn term<R: Rng>(rng: &mut R, var_bias: f64) -> Term {
    if rng.gen_bool(var_bias) {
        Term::var(VARIABLES.choose(rng).expect("nonempty"))
    } else {
        Term::constant(CONSTANTS.choose(rng).expect("nonempty"))
    }
}

pub fn atom_of<R: Rng>(rng: &mut R, predicate: &str, arity: usize) -> Atom {
    Atom::new(predicate, (0..arity).map(|_| term(rng, 0.6)).collect())
}

pub fn atom<R: Rng>(rng: &mut R) -> Atom {
    let (p, n) = *PREDICATES.choose(rng).expect("nonempty");
    atom_of(rng, p, n)
}

pub fn goal<R: Rng>(rng: &mut R, max_len: usize) -> Vec<Atom> {
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| atom(rng)).collect()
}

/// A clause with a random stack/queue split.
pub fn clause_for<R: Rng>(rng: &mut R, predicate: &str, arity: usize) -> Clause {
    let head = atom_of(rng, predicate, arity);
    let body: Vec<Atom> = (0..rng.gen_range(0..=MAX_BODY)).map(|_| atom(rng)).collect();
    let split = rng.gen_range(0..=body.len());
    Clause::new(head, body[..split].to_vec(), body[split..].to_vec())
}

pub fn clause<R: Rng>(rng: &mut R) -> Clause {
    let (p, n) = *PREDICATES.choose(rng).expect("nonempty");
    clause_for(rng, p, n)
}

/// `count` distinct ascending priorities with small denominators.
pub fn priorities<R: Rng>(rng: &mut R, count: usize) -> Vec<Priority> {
    let mut out: Vec<Priority> = Vec::new();
    while out.len() < count {
        let p = Priority::ratio(rng.gen_range(-40..=40), *[1, 2, 4].choose(rng).expect("nonempty"));
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort();
    out
}

/// `count` distinct ascending priorities strictly above `low` and outside `taken`.
pub fn priorities_above<R: Rng>(rng: &mut R, low: &Priority, taken: &[Priority], count: usize) -> Vec<Priority> {
    let mut out: Vec<Priority> = Vec::new();
    while out.len() < count {
        let p = Priority::ratio(rng.gen_range(1..=80), 4);
        let p = Priority::from_value(low.value() + p.value());
        if !out.contains(&p) && !taken.contains(&p) {
            out.push(p);
        }
    }
    out.sort();
    out
}

/// The atoms with the given ascending priorities, tagged `Initial(k)` in order.
pub fn priority_goal(atoms: &[Atom], ps: &[Priority]) -> PriorityGoal {
    PriorityGoal::new(
        atoms.iter().zip(ps).enumerate().map(|(k, (a, p))| PriorityAtom::new(a.clone(), p.clone(), LineageTag::Initial(k))).collect(),
    )
    .expect("distinct priorities")
}

pub fn random_priority_goal<R: Rng>(rng: &mut R, max_len: usize) -> PriorityGoal {
    let atoms = goal(rng, max_len);
    let ps = priorities(rng, atoms.len());
    priority_goal(&atoms, &ps)
}

/// Binds each of `vars` with probability one half, to a constant or a
/// vocabulary variable.
pub fn substitution<R: Rng>(rng: &mut R, vars: impl IntoIterator<Item = Var>) -> Substitution {
    let mut s = Substitution::new();
    for v in vars {
        if rng.gen_bool(0.5) {
            let t = term(rng, 0.4);
            if t.as_var() != Some(&v) {
                s.bind(v, t);
            }
        }
    }
    // Bindings to variables that are themselves bound would break idempotence.
    let dom = s.domain();
    Substitution::from_pairs(s.iter().filter(|(_, t)| t.as_var().is_none_or(|w| !dom.contains(w))).map(|(v, t)| (v.clone(), t.clone())))
}
