//! Lowering, lifting and determinism of whole derivations.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use super::lowering::LabError;
use super::{gen, run_trials, CheckReport, Outcome, NODE_BUDGET};
use crate::engine::{derive_with, replay, DerivationRecord, DeriveOptions, LineageTag, Mode};
use crate::priority::{find_shifting, p_variant_of, Priority, PriorityAtom, PriorityGoal, Shifting};
use crate::scheduling::Rule;
use crate::syntax::{parse_priority_goal, parse_program, Program};
use crate::term::{Atom, Matcher, Renaming, Substitution, Term, Var};

/// A goal `G`, a specialisation `Gγτ` of it with a context `X`, and a
/// clause template. Atom `k` of `specialised` (by priority) is the image of
/// atom `k` of `goal`.
#[derive(Clone, Debug)]
pub struct TemplateInstance {
    pub program: Program,
    pub rule: Rule,
    pub goal: PriorityGoal,
    pub specialised: PriorityGoal,
    pub context: PriorityGoal,
    pub template: Vec<usize>,
}

#[derive(Deserialize)]
struct RawInstance {
    program: String,
    goal: String,
    #[serde(default)]
    specialised: Option<String>,
    #[serde(default)]
    context: Option<String>,
    #[serde(default)]
    template: Vec<String>,
}

/// Tags atoms `Initial(k)` (or `Context(k)`) by priority rank.
pub fn retag(goal: &PriorityGoal, context: bool) -> PriorityGoal {
    PriorityGoal::new(
        goal.iter()
            .enumerate()
            .map(|(k, a)| {
                let tag = if context { LineageTag::Context(k) } else { LineageTag::Initial(k) };
                PriorityAtom::new(a.atom.clone(), a.priority.clone(), tag)
            })
            .collect(),
    )
    .expect("priorities unchanged")
}

impl TemplateInstance {
    /// Reads the JSON instance format:
    /// `{"program", "goal", "specialised"?, "context"?, "template": ["c2", ...]}`.
    pub fn from_json(text: &str, rule: Rule) -> Result<Self, LabError> {
        let bad = |m: String| LabError::InvalidInstance(m);
        let raw: RawInstance = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let program = parse_program(&raw.program).map_err(|e| bad(e.to_string()))?;
        let goal = retag(&parse_priority_goal(&raw.goal).map_err(|e| bad(e.to_string()))?, false);
        let specialised = match &raw.specialised {
            Some(s) => retag(&parse_priority_goal(s).map_err(|e| bad(e.to_string()))?, false),
            None => goal.clone(),
        };
        let context = match raw.context.as_deref() {
            Some(s) if !s.trim().is_empty() => retag(&parse_priority_goal(s).map_err(|e| bad(e.to_string()))?, true),
            _ => PriorityGoal::empty(),
        };
        let template = raw
            .template
            .iter()
            .map(|c| program.clause_index(c).ok_or_else(|| bad(format!("unknown clause `{c}`"))))
            .collect::<Result<_, _>>()?;
        let inst = TemplateInstance { program, rule, goal, specialised, context, template };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: &str| Err(LabError::InvalidInstance(m.to_string()));
        if self.goal.len() != self.specialised.len() {
            return bad("specialised goal and goal differ in length");
        }
        let mut m = Matcher::new();
        if !self.goal.iter().zip(self.specialised.iter()).all(|(a, b)| m.match_atom(&a.atom, &b.atom, &|_| true)) {
            return bad("specialised goal is not an instance of the goal");
        }
        if self.full().is_err() {
            return bad("context priorities clash with the specialised goal");
        }
        if let Some(&c) = self.template.iter().find(|&&c| c >= self.program.len()) {
            return Err(LabError::InvalidInstance(format!("clause index {c} out of range")));
        }
        Ok(())
    }

    /// `Gγτ + X`.
    pub fn full(&self) -> Result<PriorityGoal, crate::priority::PriorityError> {
        self.specialised.merge(&self.context)
    }

    fn roots(&self) -> BTreeSet<LineageTag> {
        (0..self.specialised.len()).map(LineageTag::Initial).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rule": self.rule.to_string(),
            "program": self.program.to_string(),
            "goal": self.goal.to_string(),
            "specialised": self.specialised.to_string(),
            "context": self.context.to_string(),
            "template": self.template.iter().map(|&c| Program::clause_name(c)).collect::<Vec<_>>(),
        })
    }

    fn options(&self) -> DeriveOptions {
        DeriveOptions::new(Mode::Psld, self.rule.clone())
    }
}

/// `σ` and `ρ` with `Qσρ = R`, matching atoms in priority order.
pub fn instance_shift(q: &PriorityGoal, r: &PriorityGoal) -> Option<(Substitution, Shifting)> {
    if q.len() != r.len() {
        return None;
    }
    let mut m = Matcher::new();
    if !q.iter().zip(r.iter()).all(|(a, b)| m.match_atom(&a.atom, &b.atom, &|_| true)) {
        return None;
    }
    let sigma = m.substitution();
    let rho = find_shifting(&q.apply(&sigma), r)?;
    Some((sigma, rho))
}

fn last_reduced(d: &DerivationRecord) -> &PriorityGoal {
    &d.stages.last().expect("at least one stage").reduced
}

/// Searches derivations from `Gγτ + X` whose steps on descendants of `Gγτ`
/// follow the template, with free choices on the context. The first one
/// found must end with `R/Gγτ = Qσρ`.
pub fn check_lowering(inst: &TemplateInstance) -> Result<bool, LabError> {
    inst.validate()?;
    let opts = inst.options();
    let base = replay(&inst.program, &inst.goal, &opts, &inst.template).map_err(|e| LabError::InvalidInstance(e.to_string()))?;
    if base.len() < inst.template.len() {
        return Err(LabError::InvalidInstance("template does not apply to the goal".into()));
    }
    let q = last_reduced(&base).clone();
    let full = inst.full().expect("validated");
    let roots = inst.roots();
    let max_len = inst.template.len() + 8;
    let mut nodes = 0usize;
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(t) = stack.pop() {
        nodes += 1;
        if nodes > NODE_BUDGET {
            break;
        }
        let d = replay(&inst.program, &full, &opts, &t).expect("validated options");
        if d.len() < t.len() {
            continue;
        }
        let used = d.steps.iter().filter(|s| d.descends_from(&s.selected.lineage, &roots)).count();
        if used == inst.template.len() {
            let r = d.sub_resolvent(d.len(), &roots).expect("last stage");
            return Ok(instance_shift(&q, &r).is_some());
        }
        let n = last_reduced(&d);
        if n.is_empty() || t.len() >= max_len {
            continue;
        }
        let selected = &n.atoms()[inst.rule.select(n).expect("nonempty")];
        if d.descends_from(&selected.lineage, &roots) {
            let mut next = t.clone();
            next.push(inst.template[used]);
            stack.push(next);
        } else {
            for c in (0..inst.program.len()).rev() {
                let mut next = t.clone();
                next.push(c);
                stack.push(next);
            }
        }
    }
    Err(LabError::NoWitnessDerivation)
}

/// Replays the sub-template of a derivation from `Gγτ + X` over `Gγτ` from `G`;
/// passes when every step applies.
pub fn check_lifting(inst: &TemplateInstance) -> Result<bool, LabError> {
    inst.validate()?;
    let opts = inst.options();
    let full = inst.full().expect("validated");
    let d = replay(&inst.program, &full, &opts, &inst.template).map_err(|e| LabError::InvalidInstance(e.to_string()))?;
    if d.len() < inst.template.len() {
        return Err(LabError::InvalidInstance("template does not apply to the specialised goal".into()));
    }
    let sub = d.sub_template(0, &inst.roots()).expect("roots are initial atoms");
    let lifted = replay(&inst.program, &inst.goal, &opts, &sub).expect("validated options");
    Ok(lifted.len() == sub.len())
}

/// A program whose clause heads favour the predicates of `goal`.
pub fn random_program(rng: &mut ChaCha8Rng, goal: &PriorityGoal) -> Program {
    let n = rng.gen_range(2..=4);
    let clauses = (0..n)
        .map(|_| {
            if rng.gen_bool(0.6) {
                let a = &goal.atoms()[rng.gen_range(0..goal.len())].atom;
                gen::clause_for(rng, &a.predicate, a.arity())
            } else {
                gen::clause(rng)
            }
        })
        .collect();
    Program::new(clauses).expect("fixed arities")
}

/// A derivation choosing uniformly among applicable clauses.
pub fn random_derivation(rng: &mut ChaCha8Rng, program: &Program, goal: &PriorityGoal, opts: &DeriveOptions, max_len: usize) -> DerivationRecord {
    let opts = opts.clone().max_steps(max_len);
    derive_with(program, goal, &opts, &mut |_, cs| rng.gen_range(0..cs.len())).expect("validated options")
}

/// A random specialisation `Gγτ` and a context interleaved anywhere.
fn random_specialisation(rng: &mut ChaCha8Rng, goal: &PriorityGoal) -> (PriorityGoal, PriorityGoal) {
    let gamma = gen::substitution(rng, goal.vars());
    let nx = rng.gen_range(0..=2);
    let ps = gen::priorities(rng, goal.len() + nx);
    let mut slots: Vec<usize> = (0..ps.len()).collect();
    slots.shuffle(rng);
    let (mut gs, mut xs): (Vec<usize>, Vec<usize>) = (slots[..goal.len()].to_vec(), slots[goal.len()..].to_vec());
    gs.sort();
    xs.sort();
    let tau = Shifting::new(goal.priorities().into_iter().zip(gs.iter().map(|&i| ps[i].clone()))).expect("increasing");
    let special = goal.apply(&gamma).shift(&tau).expect("covers the goal");
    let context = PriorityGoal::new(
        xs.iter().enumerate().map(|(k, &i)| PriorityAtom::new(gen::atom(rng), ps[i].clone(), LineageTag::Context(k))).collect(),
    )
    .expect("distinct");
    (special, context)
}

fn template_outcome(inst: &TemplateInstance, r: Result<bool, LabError>) -> Outcome {
    match r {
        Ok(true) => Outcome::Pass,
        Ok(false) => Outcome::fail(inst.to_json(), "conclusion does not hold"),
        Err(LabError::NoWitnessDerivation) => Outcome::Vacuous,
        Err(e) => Outcome::fail(inst.to_json(), e.to_string()),
    }
}

pub fn random_lowering_trials(rule: &Rule, trials: u64, seed: u64) -> CheckReport {
    run_trials(&format!("lowering[{rule}]"), trials, seed, |rng| {
        let goal = gen::random_priority_goal(rng, 4);
        let program = random_program(rng, &goal);
        let opts = DeriveOptions::new(Mode::Psld, rule.clone());
        let max = rng.gen_range(0..=4);
        let d = random_derivation(rng, &program, &goal, &opts, max);
        if d.is_empty() && max > 0 {
            return Outcome::Vacuous;
        }
        let (specialised, context) = random_specialisation(rng, &goal);
        let inst = TemplateInstance { program, rule: rule.clone(), goal, specialised, context, template: d.template() };
        template_outcome(&inst, check_lowering(&inst))
    })
}

pub fn random_lifting_trials(rule: &Rule, trials: u64, seed: u64) -> CheckReport {
    run_trials(&format!("lifting[{rule}]"), trials, seed, |rng| {
        let goal = gen::random_priority_goal(rng, 4);
        let program = random_program(rng, &goal);
        let (specialised, context) = random_specialisation(rng, &goal);
        let full = specialised.merge(&context).expect("distinct");
        let opts = DeriveOptions::new(Mode::Psld, rule.clone());
        let d = random_derivation(rng, &program, &full, &opts, 6);
        if d.is_empty() {
            return Outcome::Vacuous;
        }
        let inst = TemplateInstance { program, rule: rule.clone(), goal, specialised, context, template: d.template() };
        template_outcome(&inst, check_lifting(&inst))
    })
}

fn p_variant_renamed(rng: &mut ChaCha8Rng, goal: &PriorityGoal) -> PriorityGoal {
    let renaming = Renaming::from_pairs(goal.vars().into_iter().enumerate().map(|(i, v)| (v, Var::new(&format!("u{i}")))))
        .expect("distinct names");
    let ps = gen::priorities(rng, goal.len());
    let sigma = Shifting::new(goal.priorities().into_iter().zip(ps)).expect("increasing");
    goal.apply(renaming.as_substitution()).shift(&sigma).expect("covers the goal")
}

/// Same template from p-variant goals gives p-variant resolvents; running a
/// template in two pieces gives a p-variant of the direct run.
pub fn check_determinism(rule: &Rule, trials: u64, seed: u64) -> CheckReport {
    run_trials(&format!("determinism[{rule}]"), trials, seed, |rng| {
        let goal = gen::random_priority_goal(rng, 4);
        let program = random_program(rng, &goal);
        let opts = DeriveOptions::new(Mode::Psld, rule.clone());
        let d = random_derivation(rng, &program, &goal, &opts, 6);
        let t = d.template();
        let variant = p_variant_renamed(rng, &goal);
        let instance = || json!({ "rule": rule.to_string(), "program": program.to_string(), "goal": goal.to_string(), "variant": variant.to_string(), "template": t.iter().map(|&c| Program::clause_name(c)).collect::<Vec<_>>() });
        let e = replay(&program, &variant, &opts, &t).expect("validated options");
        if e.len() != t.len() {
            return Outcome::fail(instance(), "template does not apply to the variant");
        }
        if p_variant_of(last_reduced(&d), last_reduced(&e)).is_none() {
            return Outcome::fail(instance(), format!("{} is no p-variant of {}", last_reduced(&e), last_reduced(&d)));
        }
        let cut = rng.gen_range(0..=t.len());
        let first = replay(&program, &goal, &opts, &t[..cut]).expect("validated options");
        let second = replay(&program, last_reduced(&first), &opts, &t[cut..]).expect("validated options");
        if second.len() != t.len() - cut || p_variant_of(last_reduced(&d), last_reduced(&second)).is_none() {
            return Outcome::fail(instance(), format!("chaining at {cut} differs from the direct run"));
        }
        if t.is_empty() {
            Outcome::Vacuous
        } else {
            Outcome::Pass
        }
    })
}

/// Single-step lifting: a clause applying to `aγτ|F` applies to `a|G`.
pub fn check_single_step_lifting(trials: u64, seed: u64) -> CheckReport {
    run_trials("single-step-lifting", trials, seed, |rng| {
        let a = gen::atom(rng);
        let c = gen::clause_for(rng, &a.predicate, a.arity());
        let gamma = gen::substitution(rng, a.vars());
        let program = Program::new(vec![c]).expect("one clause");
        let opts = DeriveOptions::new(Mode::Psld, Rule::Stack);
        let special = PriorityGoal::from_list(&[a.apply(&gamma), gen::atom(rng)]);
        let d = replay(&program, &special, &opts, &[0]).expect("validated options");
        if d.is_empty() {
            return Outcome::Vacuous;
        }
        let clash = Atom::new("q", vec![Term::var("v1"), Term::var("v2")]);
        let general = PriorityGoal::new(vec![
            PriorityAtom::new(a.clone(), Priority::int(1), LineageTag::Initial(0)),
            PriorityAtom::new(clash, Priority::int(2), LineageTag::Initial(1)),
        ])
        .expect("distinct");
        if replay(&program, &general, &opts, &[0]).expect("validated options").is_empty() {
            Outcome::fail(json!({ "atom": a.to_string(), "gamma": gamma.to_string(), "program": program.to_string() }), "clause does not lift")
        } else {
            Outcome::Pass
        }
    })
}

/// Example instances used by the acceptance suite and the CLI.
pub mod examples {
    use super::*;

    /// Center-insert lowering counterexample.
    pub fn lowering_center() -> TemplateInstance {
        TemplateInstance::from_json(
            r#"{"program":"p(x) <- q(x). s <- p(b).","goal":"s[1], p(a)[2]","specialised":"s[1], p(a)[1.5]","context":"r[2]","template":["c2","c1"]}"#,
            Rule::Center,
        )
        .expect("valid instance")
    }

    /// Center-insert lifting counterexample: the four-step prefix from `Gγτ + X`.
    pub fn lifting_center() -> TemplateInstance {
        TemplateInstance::from_json(
            r#"{"program":"p <- p, r, r. r <-.","goal":"p[1], s[2], s[3]","specialised":"p[1.1], s[2], s[2.5]","context":"r[1.5], r[1.6]","template":["c1","c2","c2","c1"]}"#,
            Rule::Center,
        )
        .expect("valid instance")
    }
}
