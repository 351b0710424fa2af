//! Duplication tolerance, embeddings of reduced derivations into plain ones,
//! and termination preservation.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use super::templates::random_derivation;
use super::lowering::LabError;
use super::{run_trials, CheckReport, Outcome, NODE_BUDGET};
use crate::engine::{build_tree, resolve, DerivationRecord, DeriveOptions, LineageTag, Mode, TreeOptions};
use crate::priority::{PriorityAtom, PriorityGoal};
use crate::scheduling::Rule;
use crate::syntax::{parse_priority_goal, parse_program, Program};
use crate::term::{mgu, rename_apart, variant_of, vars_of, Atom, FreshVars, Renaming, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search {
    /// Template of a qualifying derivation.
    Found(Vec<usize>),
    NotFound,
    Budget,
}

struct Superlist<'a> {
    program: &'a Program,
    rule: &'a Rule,
    base: BTreeSet<Var>,
    wanted: &'a [usize],
    min_atoms: usize,
    nodes: usize,
    budget: usize,
}

impl Superlist<'_> {
    fn go(&mut self, goal: &PriorityGoal, fresh: &FreshVars, matched: usize, path: &mut Vec<usize>, limit: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        if matched == self.wanted.len() && goal.len() >= self.min_atoms {
            return Some(true);
        }
        if goal.is_empty() || path.len() >= limit || self.wanted.len() - matched > limit - path.len() {
            return Some(false);
        }
        let i = self.rule.select(goal).ok()?;
        for c in 0..self.program.len() {
            let mut f = fresh.clone();
            let Some(rec) = resolve(self.program, self.rule, goal, i, c, &self.base, &mut f, path.len(), true) else {
                continue;
            };
            let m = matched + usize::from(self.wanted.get(matched) == Some(&c));
            path.push(c);
            match self.go(&rec.resolvent, &f, m, path, limit) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            path.pop();
        }
        Some(false)
    }
}

/// Iterative deepening for a plain derivation from `goal` whose template
/// contains `wanted` as a sublist and whose last resolvent has at least
/// `min_atoms` atoms.
pub fn search_superlist(program: &Program, rule: &Rule, goal: &PriorityGoal, wanted: &[usize], min_atoms: usize, max_depth: usize, budget: usize) -> Search {
    let base = goal.vars();
    let mut s = Superlist { program, rule, base: base.clone(), wanted, min_atoms, nodes: 0, budget };
    for limit in wanted.len()..=max_depth.max(wanted.len()) {
        let mut path = Vec::new();
        match s.go(goal, &FreshVars::after(&base), 0, &mut path, limit) {
            Some(true) => return Search::Found(path),
            None => return Search::Budget,
            Some(false) => {}
        }
    }
    Search::NotFound
}

fn default_depth(wanted: &[usize]) -> usize {
    3 * wanted.len() + 2
}

/// Goals with copies of some atoms, each copy scheduled after its original.
/// `copies` lists (original position, position of the atom the copy precedes;
/// `len` for the end).
pub fn duplicate(goal: &PriorityGoal, copies: &[(usize, usize)]) -> PriorityGoal {
    let n = goal.len();
    let mut atoms: Vec<PriorityAtom> = goal.atoms().to_vec();
    let mut by_slot: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(i, before) in copies {
        assert!(i < before && before <= n, "copy must follow its original");
        by_slot.entry(before).or_default().push(i);
    }
    let mut fresh = FreshVars::after(&goal.vars());
    let avoid = goal.vars();
    let mut next_tag = n;
    for (before, originals) in by_slot {
        let lo = goal.get(before - 1).map(|a| a.priority.clone());
        let hi = goal.get(before).map(|a| a.priority.clone());
        let ps = crate::priority::fresh_run(lo.as_ref(), hi.as_ref(), originals.len());
        for (i, p) in originals.into_iter().zip(ps) {
            let a = &goal.atoms()[i].atom;
            let pi = Renaming::from_pairs(a.vars().into_iter().map(|v| (v, fresh.fresh(&avoid)))).expect("fresh");
            atoms.push(PriorityAtom::new(a.apply(pi.as_substitution()), p, LineageTag::Initial(next_tag)));
            next_tag += 1;
        }
    }
    PriorityGoal::new(atoms).expect("fresh priorities")
}

/// Every single copy `(i, j)` with `i < j <= n`, plus copying every atom to
/// the end and copying the first and third atoms to interleaved places.
pub fn duplication_variants(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out: Vec<Vec<(usize, usize)>> = (0..n).flat_map(|i| (i + 1..=n).map(move |j| vec![(i, j)])).collect();
    out.push((0..n).map(|i| (i, n)).collect());
    if n >= 4 {
        out.push(vec![(0, 3), (2, 4)]);
    }
    out
}

/// Over every node of the plain tree from `goal` up to `depth`, each
/// duplicated goal admits a derivation with a template superlist and at
/// least as many atoms.
pub fn check_duplication(program: &Program, rule: &Rule, goal: &PriorityGoal, depth: usize, variants: &[Vec<(usize, usize)>]) -> CheckReport {
    let mut report = CheckReport::new(&format!("duplication[{rule}]"));
    let tree = match build_tree(program, goal, &TreeOptions::new(Mode::Psld, rule.clone(), depth)) {
        Ok(t) => t,
        Err(e) => {
            report.record(0, 0, Outcome::fail(json!({ "goal": goal.to_string() }), e.to_string()));
            return report;
        }
    };
    let dups: Vec<PriorityGoal> = variants.iter().map(|v| duplicate(goal, v)).collect();
    let paths = tree.paths();
    let outcomes: Vec<Outcome> = {
        use rayon::prelude::*;
        paths
            .par_iter()
            .flat_map_iter(|(x, node)| dups.iter().map(move |d| (x, node, d)))
            .map(|(x, node, d)| {
                match search_superlist(program, rule, d, x, node.resolvent.len(), default_depth(x), NODE_BUDGET) {
                    Search::Found(_) => Outcome::Pass,
                    Search::Budget => Outcome::Budget,
                    Search::NotFound => Outcome::fail(
                        json!({
                            "program": program.to_string(),
                            "goal": goal.to_string(),
                            "duplicated": d.to_string(),
                            "template": x.iter().map(|&c| Program::clause_name(c)).collect::<Vec<_>>(),
                            "atoms": node.resolvent.len(),
                        }),
                        "no derivation from the duplicated goal",
                    ),
                }
            })
            .collect()
    };
    for (t, o) in outcomes.into_iter().enumerate() {
        report.record(0, t as u64, o);
    }
    report
}

/// Replays the clause and atom choices of a reduced list-mode derivation
/// without eliminating anything, checking at every stage that the reduced
/// resolvent is, up to renaming, a sublist of the plain one.
pub fn check_list_embedding(program: &Program, d: &DerivationRecord) -> Result<(), LabError> {
    let bad = |m: String| Err(LabError::InvalidInstance(m));
    if !d.options.mode.is_list() {
        return bad("list embedding needs a list-mode derivation".into());
    }
    let mut plain: Vec<(Atom, LineageTag)> = d.initial.iter().map(|a| (a.atom.clone(), a.lineage.clone())).collect();
    let base = d.initial.vars();
    let mut fresh = FreshVars::after(&base);
    for (j, stage) in d.stages.iter().enumerate() {
        included(&stage.reduced, &plain).map_err(|_| LabError::NoEmbedding)?;
        let Some(step) = d.steps.get(j) else { break };
        let Some(at) = plain.iter().position(|(_, t)| *t == step.selected.lineage) else {
            return Err(LabError::NoEmbedding);
        };
        let mut avoid = base.clone();
        avoid.extend(vars_of(plain.iter().map(|(a, _)| a)));
        let (renamed, _) = rename_apart(program.clause(step.clause_index), &avoid, &mut fresh);
        let Some(theta) = mgu(&plain[at].0, &renamed.head) else {
            return Err(LabError::NoEmbedding);
        };
        plain.remove(at);
        // Anchor each new atom after the old atom preceding it in the reduced derivation.
        let mut groups: BTreeMap<Option<LineageTag>, Vec<(Atom, LineageTag)>> = BTreeMap::new();
        let mut anchor: Option<LineageTag> = None;
        let body = renamed.body();
        for a in step.resolvent.iter() {
            match &a.lineage {
                LineageTag::Step { step: s, position } if *s == j => {
                    groups.entry(anchor.clone()).or_default().push((body[*position].clone(), a.lineage.clone()));
                    anchor = Some(a.lineage.clone());
                }
                t => anchor = Some(t.clone()),
            }
        }
        let mut next = Vec::new();
        let mut emit = |anchor: Option<LineageTag>, next: &mut Vec<(Atom, LineageTag)>| {
            let mut pending = vec![anchor];
            while let Some(t) = pending.pop() {
                for (a, nt) in groups.remove(&t).unwrap_or_default() {
                    next.push((a, nt.clone()));
                    pending.push(Some(nt));
                }
            }
        };
        emit(None, &mut next);
        for item in plain {
            let tag = item.1.clone();
            next.push(item);
            emit(Some(tag), &mut next);
        }
        if !groups.is_empty() {
            return bad("new atoms anchored on a missing atom".into());
        }
        plain = next.into_iter().map(|(a, t)| (a.apply(&theta), t)).collect();
    }
    Ok(())
}

/// `N τ ⊆_L plain` for the atoms of `plain` sharing lineage with `n`.
fn included(n: &PriorityGoal, plain: &[(Atom, LineageTag)]) -> Result<Renaming, ()> {
    let tags: BTreeSet<&LineageTag> = n.iter().map(|a| &a.lineage).collect();
    let sub: Vec<&(Atom, LineageTag)> = plain.iter().filter(|(_, t)| tags.contains(t)).collect();
    if sub.len() != n.len() || sub.iter().zip(n.iter()).any(|((_, t), a)| *t != a.lineage) {
        return Err(());
    }
    let sub_atoms: Vec<Atom> = sub.into_iter().map(|(a, _)| a.clone()).collect();
    variant_of(&n.as_list(), &sub_atoms).ok_or(())
}

/// A plain priority derivation via the same rule whose template contains
/// that of `d` as a sublist and whose last resolvent is at least as long.
pub fn check_priority_embedding(program: &Program, d: &DerivationRecord) -> Result<Vec<usize>, LabError> {
    let rule = &d.options.rule;
    let last = d.stages.last().expect("at least one stage");
    let m = d.template();
    match search_superlist(program, rule, &d.initial, &m, last.reduced.len(), default_depth(&m), NODE_BUDGET) {
        Search::Found(t) => Ok(t),
        Search::NotFound => Err(LabError::NoEmbedding),
        Search::Budget => Err(LabError::BudgetExhausted),
    }
}

/// Programs and goals used by the embedding suite.
pub fn sample_programs() -> Vec<(Program, PriorityGoal)> {
    [
        ("p <- q(x) | p. q(a).", "p, q(a)"),
        ("p(x,y) <- e(x,y). p(x,y) <- e(x,z) | p(z,y). e(a,b). e(b,a). e(b,c).", "p(a,y), p(y,a)"),
        ("s(x) <- t(x), t(y) | s(y). s(a) <- t(a). t(a). t(b).", "s(x), t(x)"),
    ]
    .iter()
    .map(|(p, g)| (parse_program(p).expect("sample program"), parse_priority_goal(g).expect("sample goal")))
    .collect()
}

/// Random reduced prefixes of the sample programs, embedded in list mode
/// and, for stack-queue rules, in priority mode.
pub fn check_embedding_suite(trials: u64, seed: u64) -> CheckReport {
    let samples = sample_programs();
    run_trials("embedding", trials, seed, |rng| {
        let (program, goal) = samples.choose(rng).expect("nonempty");
        let list_rule = [Rule::Stack, Rule::Queue, Rule::Sq, Rule::OddEven].choose(rng).expect("nonempty").clone();
        let prio_rule = [Rule::Stack, Rule::Queue, Rule::Sq].choose(rng).expect("nonempty").clone();
        let len = rng.gen_range(0..=6);
        let instance = |d: &DerivationRecord| {
            json!({
                "program": program.to_string(),
                "goal": goal.to_string(),
                "mode": d.options.mode.to_string(),
                "rule": d.options.rule.to_string(),
                "template": d.template().iter().map(|&c| Program::clause_name(c)).collect::<Vec<_>>(),
            })
        };
        let dl = random_derivation(rng, program, goal, &DeriveOptions::new(Mode::Rsld, list_rule), len);
        if let Err(e) = check_list_embedding(program, &dl) {
            return Outcome::fail(instance(&dl), e.to_string());
        }
        let dp = random_derivation(rng, program, goal, &DeriveOptions::new(Mode::Prsld, prio_rule), len);
        match check_priority_embedding(program, &dp) {
            Ok(_) => Outcome::Pass,
            Err(LabError::BudgetExhausted) => Outcome::Budget,
            Err(e) => Outcome::fail(instance(&dp), e.to_string()),
        }
    })
}

/// The plain tree via `rule` is finite within `f` steps, and so is the
/// reduced tree.
pub fn check_termination(program: &Program, goal: &PriorityGoal, rule: &Rule, f: usize) -> Result<bool, LabError> {
    let plain = build_tree(program, goal, &TreeOptions::new(Mode::Psld, rule.clone(), f)).map_err(|e| LabError::InvalidInstance(e.to_string()))?;
    if !plain.is_finite() {
        return Err(LabError::InvalidInstance(format!("plain tree is not finite within depth {f}")));
    }
    let reduced = build_tree(program, goal, &TreeOptions::new(Mode::Prsld, rule.clone(), f)).map_err(|e| LabError::InvalidInstance(e.to_string()))?;
    Ok(reduced.is_finite() && reduced.max_depth() <= f)
}

/// Programs with finite plain stack trees, and the depth bounding them.
pub fn termination_samples() -> Vec<(Program, PriorityGoal, usize)> {
    [
        ("anc(x,y) <- par(x,y). anc(x,y) <- par(x,z), anc(z,y). par(a,b). par(b,c).", "anc(a,y)", 10),
        ("s(x) <- t(x), t(x), u(x). t(a). t(b). u(b).", "s(x), t(x), s(y)", 12),
        ("p <- q, q, r. q <- r. r.", "p, q", 12),
    ]
    .iter()
    .map(|(p, g, f)| (parse_program(p).expect("sample program"), parse_priority_goal(g).expect("sample goal"), *f))
    .collect()
}

/// A random ground goal of length four over `p, q, r`.
pub fn ground_goal<R: Rng>(rng: &mut R) -> PriorityGoal {
    let atoms: Vec<Atom> = (0..4).map(|_| Atom::prop(["p", "q", "r"].choose(rng).expect("nonempty"))).collect();
    PriorityGoal::from_list(&atoms)
}

pub fn ground_program() -> Program {
    parse_program("p <- q | r. q <- r | p. q.").expect("ground program")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::derive;

    fn pg(s: &str) -> PriorityGoal {
        parse_priority_goal(s).unwrap()
    }

    #[test]
    fn duplicated_goals_keep_order() {
        let g = pg("p, q, r, s");
        assert_eq!(duplicate(&g, &[(1, 3)]).to_string(), "p[1], q[2], r[3], q[3.5], s[4]");
        assert_eq!(duplicate(&g, &[(0, 4), (1, 4)]).to_string(), "p[1], q[2], r[3], s[4], p[5], q[6]");
    }

    #[test]
    fn zero_steps_need_nothing() {
        let p = ground_program();
        assert_eq!(search_superlist(&p, &Rule::Stack, &pg("p, q"), &[], 2, 0, 10), Search::Found(vec![]));
    }

    #[test]
    fn ground_duplication_stack() {
        let p = ground_program();
        let g = pg("p, q, r, q");
        let r = check_duplication(&p, &Rule::Stack, &g, 5, &duplication_variants(4));
        assert!(r.passed(), "{:?}", r.failures.first());
        assert_eq!(r.budget_exhausted, 0);
    }

    #[test]
    fn queued_self_call_list_embedding() {
        let p = parse_program("p <- q(x) | p.").unwrap();
        let d = derive(&p, &PriorityGoal::from_list(&crate::syntax::parse_goal("p, q(a)").unwrap()), &DeriveOptions::new(Mode::Rsld, Rule::Stack).max_steps(5).advancement(false)).unwrap();
        assert_eq!(d.len(), 5);
        assert_eq!(check_list_embedding(&p, &d), Ok(()));
        let zero = derive(&p, &pg("p"), &DeriveOptions::new(Mode::Rsld, Rule::Stack).max_steps(0)).unwrap();
        assert_eq!(check_list_embedding(&p, &zero), Ok(()));
    }

    #[test]
    fn doubling_list_embedding() {
        let p = parse_program("p(x,y) <- q, p(x,z1), p(z1,z2), p(z2,y).").unwrap();
        let g = PriorityGoal::from_list(&crate::syntax::parse_goal("q, p(x,x)").unwrap());
        let d = derive(&p, &g, &DeriveOptions::new(Mode::Rsld, Rule::OddEven).max_steps(6)).unwrap();
        assert_eq!(check_list_embedding(&p, &d), Ok(()));
    }

    #[test]
    fn pred_special_has_no_priority_embedding() {
        let p = parse_program("r <-. s(x,y) <- t(x,y). q(x,y) <- r | s(z,y) | r | q(x,z).").unwrap();
        let g = pg("q(x,x1), t(x1,x)");
        let rule: Rule = "pred-special:s".parse().unwrap();
        let d = derive(&p, &g, &DeriveOptions::new(Mode::Prsld, rule).max_steps(6)).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(check_priority_embedding(&p, &d), Err(LabError::NoEmbedding));
    }

    #[test]
    fn embedding_suite_passes() {
        let r = check_embedding_suite(60, 8);
        assert!(r.passed(), "{:?}", r.failures.first());
    }

    #[test]
    fn termination_is_preserved() {
        for (p, g, f) in termination_samples() {
            assert_eq!(check_termination(&p, &g, &Rule::Stack, f), Ok(true), "{p}");
        }
    }
}
