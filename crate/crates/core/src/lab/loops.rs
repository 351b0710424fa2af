//! Loop-check properties on function-free programs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{gen, run_trials, CheckReport, Outcome};
use crate::engine::{derive_with, DeriveOptions, LoopCheck, Mode, Status};
use crate::loopcheck::{resultant_equivalent, Resultant};
use crate::priority::{PriorityGoal, Shifting};
use crate::scheduling::Rule;
use crate::syntax::Program;
use crate::term::{canonical_form, Atom, Clause, Renaming, Term, Var};

const PREDS: [&str; 2] = ["p", "q"];
const CONSTS: [&str; 2] = ["a", "b"];

/// Resultant classes up to renaming for the instance `p(t)` of `p(x)` and
/// reduced resolvents of at most `max_len` atoms over `p/1, q/1, a, b`.
pub fn resultant_class_count(max_len: usize) -> usize {
    let slots = max_len + 1;
    let mut classes = BTreeSet::new();
    for len in 0..=max_len {
        let positions = len + 1;
        let terms: Vec<Term> = CONSTS
            .iter()
            .map(|c| Term::constant(c))
            .chain((0..slots).map(|i| Term::var(&format!("x{i}"))))
            .collect();
        let mut idx = vec![0usize; 2 * positions];
        loop {
            let atoms: Vec<Atom> = (0..positions)
                .map(|k| {
                    let pred = if k == 0 { "p" } else { PREDS[idx[2 * k] % 2] };
                    Atom::new(pred, vec![terms[idx[2 * k + 1]].clone()])
                })
                .collect();
            classes.insert(canonical_form(&atoms));
            // Odometer over (predicate, term) per position; the instance predicate is fixed.
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                let radix = if k % 2 == 0 { if k == 0 { 1 } else { 2 } } else { terms.len() };
                idx[k] += 1;
                if idx[k] < radix {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    classes.len()
}

fn small_atom(rng: &mut ChaCha8Rng, vars: &[&str]) -> Atom {
    let pred = PREDS.choose(rng).expect("nonempty");
    let t = if rng.gen_bool(0.5) {
        Term::var(vars.choose(rng).expect("nonempty"))
    } else {
        Term::constant(CONSTS.choose(rng).expect("nonempty"))
    };
    Atom::new(pred, vec![t])
}

pub fn small_program(rng: &mut ChaCha8Rng, max_body: usize) -> Program {
    let n = rng.gen_range(1..=4);
    let clauses = (0..n)
        .map(|_| {
            let head = small_atom(rng, &["x"]);
            let body: Vec<Atom> = (0..rng.gen_range(0..=max_body)).map(|_| small_atom(rng, &["x", "y"])).collect();
            Clause::new(head, body, Vec::new())
        })
        .collect();
    Program::new(clauses).expect("fixed arities")
}

/// Every reduced derivation from `p(x)` keeping resolvents within two atoms
/// stops (pruned, refuted or failed) within the class count.
pub fn check_pruning_bound(trials: u64, seed: u64) -> CheckReport {
    let bound = resultant_class_count(2);
    run_trials("pruning-bound", trials, seed, |rng| {
        let program = small_program(rng, 2);
        let goal = PriorityGoal::from_list(&[Atom::new("p", vec![Term::var("x")])]);
        let (mode, rule) = if rng.gen_bool(0.5) { (Mode::Rsld, Rule::Stack) } else { (Mode::Prsld, Rule::Sq) };
        let opts = DeriveOptions::new(mode, rule).loop_check(LoopCheck::Evrl).max_steps(bound);
        let d = derive_with(&program, &goal, &opts, &mut |_, cs| rng.gen_range(0..cs.len())).expect("valid options");
        if d.stages.iter().any(|s| s.reduced.len() > 2) {
            return Outcome::Vacuous;
        }
        match d.status {
            Status::BoundExceeded => Outcome::fail(
                json!({ "program": program.to_string(), "mode": mode.to_string(), "template": d.template() }),
                format!("not pruned within {bound} steps"),
            ),
            _ => Outcome::Pass,
        }
    })
}

fn random_resultant(rng: &mut ChaCha8Rng) -> Resultant {
    let n = rng.gen_range(0..=3);
    let atoms: Vec<Atom> = (0..n).map(|_| small_atom(rng, &["x", "y"])).collect();
    let ps = gen::priorities(rng, n);
    let reduced = gen::priority_goal(&atoms, &ps);
    Resultant { reduced, instance: vec![small_atom(rng, &["x", "y"])] }
}

/// A renamed and shifted copy.
fn variant(rng: &mut ChaCha8Rng, r: &Resultant) -> Resultant {
    let mut vars = r.reduced.vars();
    vars.extend(r.instance.iter().flat_map(Atom::vars));
    let names = ["u", "v", "w", "z"];
    let pairs: Vec<(Var, Var)> = vars.into_iter().zip(names.choose_multiple(rng, 4)).map(|(v, n)| (v, Var::new(n))).collect();
    let rho = Renaming::from_pairs(pairs).expect("distinct");
    let s = rho.as_substitution();
    let ps = gen::priorities(rng, r.reduced.len());
    let sigma = Shifting::new(r.reduced.priorities().into_iter().zip(ps)).expect("increasing");
    Resultant {
        reduced: r.reduced.apply(s).shift(&sigma).expect("covers"),
        instance: r.instance.iter().map(|a| a.apply(s)).collect(),
    }
}

/// Reflexivity, symmetry and transitivity of resultant equivalence.
pub fn check_equivalence(trials: u64, seed: u64) -> CheckReport {
    run_trials("resultant-equivalence", trials, seed, |rng| {
        let a = random_resultant(rng);
        let b = if rng.gen_bool(0.6) { variant(rng, &a) } else { random_resultant(rng) };
        let c = if rng.gen_bool(0.6) { variant(rng, &b) } else { random_resultant(rng) };
        let eq = |x: &Resultant, y: &Resultant| resultant_equivalent(x, y, true, true).is_some();
        let show = |r: &Resultant| json!({ "reduced": r.reduced.to_string(), "instance": r.instance.iter().map(|a| a.to_string()).collect::<Vec<_>>() });
        let inst = json!([show(&a), show(&b), show(&c)]);
        if !eq(&a, &a) {
            return Outcome::fail(inst, "not reflexive");
        }
        if eq(&a, &b) != eq(&b, &a) {
            return Outcome::fail(inst, "not symmetric");
        }
        if eq(&a, &b) && eq(&b, &c) && !eq(&a, &c) {
            return Outcome::fail(inst, "not transitive");
        }
        Outcome::Pass
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_count_small_cases() {
        // p(_0), p(a), p(b)
        assert_eq!(resultant_class_count(0), 3);
        // p or q; shared var, new var, a, b after p(_0); var, a, b after p(a) or p(b)
        assert_eq!(resultant_class_count(1), 3 + 2 * (4 + 2 * 3));
    }

    #[test]
    fn pruning_within_bound() {
        let r = check_pruning_bound(300, 4);
        assert!(r.passed(), "{:?}", r.failures.first());
        assert!(r.vacuous < r.trials);
    }

    #[test]
    fn equivalence_relation() {
        let r = check_equivalence(1000, 6);
        assert!(r.passed(), "{:?}", r.failures.first());
    }
}
