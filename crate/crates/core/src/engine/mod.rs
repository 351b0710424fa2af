//! Derivation steps and single-branch drivers for the four execution modes.
//!
//! Every derivation state is a [`PriorityGoal`]. In list modes the
//! priorities only encode positions: the list reading of a goal is its
//! ascending-priority sequence.

pub mod trace;
pub mod tree;

pub use tree::{build_tree, Edge, NodeStatus, Tree, TreeNode, TreeOptions};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::loopcheck::{check_prune, PruneWitness, Resultant};
use crate::priority::{PriorityAtom, PriorityGoal};
use crate::reduction::{reduce_list_goal, reduce_priority_goal, ReductionCertificate, ReductionMode};
use crate::scheduling::{Placement, Rule, ScheduleError};
use crate::syntax::Program;
use crate::term::{apply_all, mgu_with, rename_apart, Atom, Clause, FreshVars, Renaming, Substitution, UnifyOptions, Var};

/// Where an atom of a resolvent came from.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LineageTag {
    /// Position `k` of the initial goal.
    Initial(usize),
    /// Position `k` of a context added to a specialised goal.
    Context(usize),
    /// Body position `position` of the clause applied at step `step`.
    Step { step: usize, position: usize },
}

impl LineageTag {
    pub fn initial(k: usize) -> Self {
        LineageTag::Initial(k)
    }
}

impl fmt::Display for LineageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineageTag::Initial(k) => write!(f, "g{k}"),
            LineageTag::Context(k) => write!(f, "x{k}"),
            LineageTag::Step { step, position } => write!(f, "s{step}.{position}"),
        }
    }
}

impl fmt::Debug for LineageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for LineageTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for LineageTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid lineage tag `{s}`");
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        if let Some(rest) = s.strip_prefix('g') {
            Ok(LineageTag::Initial(num(rest)?))
        } else if let Some(rest) = s.strip_prefix('x') {
            Ok(LineageTag::Context(num(rest)?))
        } else if let Some(rest) = s.strip_prefix('s') {
            let (a, b) = rest.split_once('.').ok_or_else(bad)?;
            Ok(LineageTag::Step { step: num(a)?, position: num(b)? })
        } else {
            Err(bad())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sld,
    Rsld,
    Psld,
    Prsld,
}

impl Mode {
    pub fn is_list(self) -> bool {
        matches!(self, Mode::Sld | Mode::Rsld)
    }

    pub fn reduces(self) -> bool {
        matches!(self, Mode::Rsld | Mode::Prsld)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sld => "sld",
            Mode::Rsld => "rsld",
            Mode::Psld => "psld",
            Mode::Prsld => "prsld",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sld" => Ok(Mode::Sld),
            "rsld" => Ok(Mode::Rsld),
            "psld" => Ok(Mode::Psld),
            "prsld" => Ok(Mode::Prsld),
            _ => Err(format!("unknown mode `{s}` (expected sld, rsld, psld or prsld)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopCheck {
    #[default]
    Off,
    /// Equal resultants up to one renaming (and a shifting in priority mode).
    Evrl,
    /// Equal reduced resolvents only.
    Evgl,
}

impl FromStr for LoopCheck {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(LoopCheck::Off),
            "evrl" => Ok(LoopCheck::Evrl),
            "evgl" => Ok(LoopCheck::Evgl),
            _ => Err(format!("unknown loop check `{s}` (expected evrl, evgl or off)")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeriveOptions {
    pub mode: Mode,
    pub rule: Rule,
    pub max_steps: usize,
    /// Reduce resolvents in the reducing modes.
    pub reduce: bool,
    pub advancement: bool,
    pub loop_check: LoopCheck,
    pub reduction_mode: ReductionMode,
    pub occurs_check: bool,
}

impl DeriveOptions {
    pub fn new(mode: Mode, rule: Rule) -> Self {
        DeriveOptions {
            mode,
            rule,
            max_steps: 1000,
            reduce: true,
            advancement: true,
            loop_check: LoopCheck::Off,
            reduction_mode: ReductionMode::Greedy,
            occurs_check: true,
        }
    }

    pub fn max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn advancement(mut self, on: bool) -> Self {
        self.advancement = on;
        self
    }

    pub fn loop_check(mut self, check: LoopCheck) -> Self {
        self.loop_check = check;
        self
    }

    pub fn reduce(mut self, on: bool) -> Self {
        self.reduce = on;
        self
    }

    fn reducing(&self) -> bool {
        self.mode.reduces() && self.reduce
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.rule == Rule::All {
            return Err(EngineError::Schedule(ScheduleError::TreeOnly(Rule::All)));
        }
        self.validate_for_tree()
    }

    pub(crate) fn validate_for_tree(&self) -> Result<(), EngineError> {
        if !self.mode.is_list() && self.rule.is_list_only() {
            return Err(EngineError::ListOnlyRule(self.rule.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("rule `{0}` selects by position and needs a list mode (sld or rsld)")]
    ListOnlyRule(Rule),
    #[error("no atom with lineage tag {0} in the designated resolvent")]
    UnknownTag(LineageTag),
    #[error("step index {0} is past the end of the derivation")]
    IndexOutOfRange(usize),
}

/// One resolution step.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub index: usize,
    /// Position of the selected atom in the reduced resolvent.
    pub selected_index: usize,
    pub selected: PriorityAtom,
    pub clause_index: usize,
    /// The clause after standardisation apart.
    pub renamed: Clause,
    pub renaming: Renaming,
    pub mgu: Substitution,
    #[serde(skip)]
    pub placement: Placement,
    pub resolvent: PriorityGoal,
}

/// Rewrites atom `selected_index` of `goal` with clause `clause_index`.
/// Returns `None` when the clause head does not unify.
#[allow(clippy::too_many_arguments)]
pub fn resolve(
    program: &Program,
    rule: &Rule,
    goal: &PriorityGoal,
    selected_index: usize,
    clause_index: usize,
    avoid: &BTreeSet<Var>,
    fresh: &mut FreshVars,
    step: usize,
    occurs_check: bool,
) -> Option<StepRecord> {
    let selected = goal.get(selected_index)?.clone();
    let clause = program.clause(clause_index);
    if clause.head.predicate != selected.atom.predicate || clause.head.arity() != selected.atom.arity() {
        return None;
    }
    let mut trial = fresh.clone();
    let mut avoid = avoid.clone();
    avoid.extend(goal.vars());
    let (renamed, renaming) = rename_apart(clause, &avoid, &mut trial);
    let theta = mgu_with(&selected.atom, &renamed.head, UnifyOptions { occurs_check })?;
    *fresh = trial;
    let rest = goal.without(selected_index);
    let placement = rule.place(&rest, &selected, selected_index, &renamed);
    let body = PriorityGoal::new(
        renamed
            .body()
            .into_iter()
            .zip(&placement.priorities)
            .enumerate()
            .map(|(m, (a, p))| PriorityAtom::new(a, p.clone(), LineageTag::Step { step, position: m }))
            .collect(),
    )
    .expect("fresh priorities are distinct");
    let resolvent = rest.merge(&body).expect("fresh priorities avoid the old goal").apply(&theta);
    Some(StepRecord {
        index: step,
        selected_index,
        selected,
        clause_index,
        renamed,
        renaming,
        mgu: theta,
        placement,
        resolvent,
    })
}

/// Reduces `goal` as prescribed by the options, protecting `protected`.
pub fn reduce_stage(
    goal: &PriorityGoal,
    protected: &BTreeSet<Var>,
    opts: &DeriveOptions,
) -> (PriorityGoal, Option<ReductionCertificate>) {
    if !opts.reducing() {
        return (goal.clone(), None);
    }
    if opts.mode.is_list() {
        let (_, cert) = reduce_list_goal(&goal.as_list(), protected, opts.reduction_mode);
        (goal.select(&cert.kept), Some(cert))
    } else {
        let (n, cert) = reduce_priority_goal(goal, protected, opts.advancement, opts.reduction_mode);
        (n, Some(cert))
    }
}

/// A resolvent, its reduction and the matching instance of the initial goal.
#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub resolvent: PriorityGoal,
    pub reduction: Option<ReductionCertificate>,
    pub reduced: PriorityGoal,
    /// The initial goal under the mgus applied so far.
    pub instance: Vec<Atom>,
}

impl Stage {
    pub fn resultant(&self) -> Resultant {
        Resultant { reduced: self.reduced.clone(), instance: self.instance.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    Refuted,
    Failed,
    BoundExceeded,
    Pruned { i: usize, j: usize },
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Refuted => 0,
            Status::Failed => 1,
            Status::BoundExceeded => 2,
            Status::Pruned { .. } => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Status::Refuted => "refuted",
            Status::Failed => "failed",
            Status::BoundExceeded => "bound_exceeded",
            Status::Pruned { .. } => "pruned",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pruned { i, j } => write!(f, "pruned({i},{j})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A single derivation: `stages[j]` holds `G_j`, `N_j` and `G_0θ_0…θ_{j-1}`,
/// and `steps[j]` rewrites `N_j` into `G_{j+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct DerivationRecord {
    pub initial: PriorityGoal,
    pub options: DeriveOptions,
    pub stages: Vec<Stage>,
    pub steps: Vec<StepRecord>,
    pub status: Status,
    pub witness: Option<PruneWitness>,
}

/// Clause choice strategy for [`run`].
enum Choice<'a> {
    FirstApplicable,
    Template(&'a [usize]),
    /// Called with the step index and the applicable clauses (nonempty);
    /// returns a position in that slice.
    Custom(&'a mut dyn FnMut(usize, &[usize]) -> usize),
}

/// Runs a single derivation, always taking the first applicable clause.
pub fn derive(program: &Program, goal: &PriorityGoal, opts: &DeriveOptions) -> Result<DerivationRecord, EngineError> {
    opts.validate()?;
    Ok(run(program, goal, opts, Choice::FirstApplicable))
}

/// Applies the clauses of `template` in order. The record ends `Failed` if
/// one of them does not apply and `BoundExceeded` once the template is used up
/// with atoms left.
pub fn replay(
    program: &Program,
    goal: &PriorityGoal,
    opts: &DeriveOptions,
    template: &[usize],
) -> Result<DerivationRecord, EngineError> {
    opts.validate()?;
    let mut opts = opts.clone();
    opts.max_steps = template.len();
    Ok(run(program, goal, &opts, Choice::Template(template)))
}

/// Runs a single derivation, letting `chooser` pick among the applicable
/// clauses at every step.
pub fn derive_with(
    program: &Program,
    goal: &PriorityGoal,
    opts: &DeriveOptions,
    chooser: &mut dyn FnMut(usize, &[usize]) -> usize,
) -> Result<DerivationRecord, EngineError> {
    opts.validate()?;
    Ok(run(program, goal, opts, Choice::Custom(chooser)))
}

fn run(program: &Program, goal: &PriorityGoal, opts: &DeriveOptions, mut choice: Choice<'_>) -> DerivationRecord {
    let initial_list = goal.as_list();
    let base: BTreeSet<Var> = goal.vars();
    let mut fresh = FreshVars::after(&base);
    let mut theta = Substitution::new();
    let mut current = goal.clone();
    let mut stages: Vec<Stage> = Vec::new();
    let mut steps = Vec::new();
    let mut resultants = Vec::new();
    let (status, witness) = loop {
        let j = stages.len();
        let instance = apply_all(&initial_list, &theta);
        let protected = crate::term::vars_of(&instance);
        let (reduced, reduction) = reduce_stage(&current, &protected, opts);
        let stage = Stage { resolvent: current.clone(), reduction, reduced, instance };
        resultants.push(stage.resultant());
        let reduced = stage.reduced.clone();
        stages.push(stage);
        if reduced.is_empty() {
            break (Status::Refuted, None);
        }
        if let Some(w) = check_prune(&resultants, opts.loop_check, !opts.mode.is_list()) {
            break (Status::Pruned { i: w.i, j: w.j }, Some(w));
        }
        if j >= opts.max_steps {
            break (Status::BoundExceeded, None);
        }
        let selected = opts.rule.select(&reduced).expect("validated rule on a nonempty goal");
        let attempt = |c: usize, fresh: &mut FreshVars| {
            resolve(program, &opts.rule, &reduced, selected, c, &base, fresh, j, opts.occurs_check)
        };
        let record = match &mut choice {
            Choice::FirstApplicable => (0..program.len()).find_map(|c| attempt(c, &mut fresh)),
            Choice::Template(t) => attempt(t[j], &mut fresh),
            Choice::Custom(pick) => {
                let mut options: Vec<(usize, StepRecord, FreshVars)> = (0..program.len())
                    .filter_map(|c| {
                        let mut f = fresh.clone();
                        attempt(c, &mut f).map(|r| (c, r, f))
                    })
                    .collect();
                if options.is_empty() {
                    None
                } else {
                    let clauses: Vec<usize> = options.iter().map(|o| o.0).collect();
                    let (_, r, f) = options.swap_remove(pick(j, &clauses).min(clauses.len() - 1));
                    fresh = f;
                    Some(r)
                }
            }
        };
        let Some(record) = record else {
            break (Status::Failed, None);
        };
        theta = theta.compose(&record.mgu);
        current = record.resolvent.clone();
        steps.push(record);
    };
    DerivationRecord { initial: goal.clone(), options: opts.clone(), stages, steps, status, witness }
}

impl DerivationRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Clause indices of the applied steps.
    pub fn template(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.clause_index).collect()
    }

    pub fn resultant_at(&self, h: usize) -> Result<Resultant, EngineError> {
        self.stages.get(h).map(Stage::resultant).ok_or(EngineError::IndexOutOfRange(h))
    }

    /// Lineage of the atom rewritten by step `step`.
    fn parent(&self, tag: &LineageTag) -> Option<&LineageTag> {
        match tag {
            LineageTag::Step { step, .. } => self.steps.get(*step).map(|s| &s.selected.lineage),
            _ => None,
        }
    }

    /// True when `tag` is one of `roots` or was introduced by rewriting one of
    /// their descendants.
    pub fn descends_from(&self, tag: &LineageTag, roots: &BTreeSet<LineageTag>) -> bool {
        let mut cur = Some(tag);
        while let Some(t) = cur {
            if roots.contains(t) {
                return true;
            }
            cur = self.parent(t);
        }
        false
    }

    /// Chain from `tag` back to an atom of the initial goal.
    pub fn ancestors(&self, tag: &LineageTag) -> Vec<LineageTag> {
        let mut out = vec![tag.clone()];
        while let Some(p) = self.parent(out.last().expect("nonempty")) {
            out.push(p.clone());
        }
        out
    }

    /// Clauses of the steps from stage `h` on that rewrite atoms descending
    /// from `roots`, which must all occur in the reduced resolvent at `h`.
    pub fn sub_template(&self, h: usize, roots: &BTreeSet<LineageTag>) -> Result<Vec<usize>, EngineError> {
        let stage = self.stages.get(h).ok_or(EngineError::IndexOutOfRange(h))?;
        for r in roots {
            if !stage.reduced.iter().any(|a| &a.lineage == r) {
                return Err(EngineError::UnknownTag(r.clone()));
            }
        }
        Ok(self.steps[h..]
            .iter()
            .filter(|s| self.descends_from(&s.selected.lineage, roots))
            .map(|s| s.clause_index)
            .collect())
    }

    /// Atoms of the reduced resolvent at `h` that descend from `roots`.
    pub fn sub_resolvent(&self, h: usize, roots: &BTreeSet<LineageTag>) -> Result<PriorityGoal, EngineError> {
        let stage = self.stages.get(h).ok_or(EngineError::IndexOutOfRange(h))?;
        Ok(stage.reduced.filter(|a| self.descends_from(&a.lineage, roots)))
    }

    fn stack_placed(&self, tag: &LineageTag) -> bool {
        use crate::scheduling::PlacementTag;
        match tag {
            LineageTag::Step { step, position } => {
                self.steps.get(*step).and_then(|s| s.placement.tags.get(*position)) == Some(&PlacementTag::Stack)
            }
            _ => false,
        }
    }

    /// True when `tag` is in `roots` or is a stack-placed descendant of them
    /// whose every intermediate ancestor is too.
    fn in_stack_part(&self, tag: &LineageTag, roots: &BTreeSet<LineageTag>) -> bool {
        let mut cur = tag;
        loop {
            if roots.contains(cur) {
                return true;
            }
            if !self.stack_placed(cur) {
                return false;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Pre-queued with respect to the initial atoms `roots`: every rewritten
    /// atom belongs to `roots` or derives from them through stack placements.
    pub fn is_a_preq(&self, roots: &BTreeSet<LineageTag>) -> bool {
        self.steps.iter().all(|s| self.in_stack_part(&s.selected.lineage, roots))
    }

    /// Pre-queued, and no atom of the stack part is left.
    pub fn is_a_queued(&self, roots: &BTreeSet<LineageTag>) -> bool {
        self.is_a_preq(roots)
            && self.stages.last().is_some_and(|st| st.resolvent.iter().all(|a| !self.in_stack_part(&a.lineage, roots)))
    }

    /// Lengths of the reduced resolvents.
    pub fn reduced_lengths(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.reduced.len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_goal, parse_priority_goal, parse_program};
    use crate::term::variant_of;

    fn list(s: &str) -> PriorityGoal {
        PriorityGoal::from_list(&parse_goal(s).unwrap())
    }

    fn show(g: &PriorityGoal) -> String {
        g.as_list().iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }

    #[test]
    fn doubling_prefix() {
        let p = parse_program("p(x,y) <- q, p(x,z1), p(z1,z2), p(z2,y).").unwrap();
        let opts = DeriveOptions::new(Mode::Rsld, Rule::OddEven).max_steps(50);
        let d = derive(&p, &list("q, p(x,x)"), &opts).unwrap();
        assert_eq!(d.status, Status::BoundExceeded);
        let lengths = d.reduced_lengths();
        for (k, n) in lengths.iter().enumerate().take(25) {
            assert_eq!(*n, 2 * k + 2);
        }
        let expect = ["q,p(x,x)", "q,p(x,z1),p(z1,z2),p(z2,x)", "q,p(x,z1),p(z1,z2),p(z2,z3),p(z3,z4),p(z4,x)"];
        for (j, e) in expect.iter().enumerate() {
            assert!(variant_of(&d.stages[j].reduced.as_list(), &parse_goal(e).unwrap()).is_some(), "stage {j}");
        }
    }

    #[test]
    fn advancement_toggle() {
        let p = parse_program("p <- q(x) | p.").unwrap();
        let g = list("p, q(a)");
        let d = derive(&p, &g, &DeriveOptions::new(Mode::Prsld, Rule::Stack).max_steps(50)).unwrap();
        assert_eq!(d.status, Status::Failed);
        assert!(d.len() <= 3);
        let d = derive(&p, &g, &DeriveOptions::new(Mode::Prsld, Rule::Stack).max_steps(50).advancement(false)).unwrap();
        assert_eq!(d.status, Status::BoundExceeded);
        assert!(d.stages.iter().all(|s| show(&s.reduced) == "p,q(a)"));
    }

    #[test]
    fn self_loop_is_pruned() {
        let p = parse_program("p <- p.").unwrap();
        let d = derive(&p, &list("p"), &DeriveOptions::new(Mode::Sld, Rule::Stack).loop_check(LoopCheck::Evrl)).unwrap();
        assert_eq!(d.status, Status::Pruned { i: 0, j: 1 });
    }

    #[test]
    fn facts_refute() {
        let p = parse_program("a. b <- a.").unwrap();
        let d = derive(&p, &list("b, a"), &DeriveOptions::new(Mode::Psld, Rule::Stack)).unwrap();
        assert_eq!(d.status, Status::Refuted);
        assert_eq!(d.template(), vec![1, 0, 0]);
    }

    #[test]
    fn pred_special_cycles() {
        let p = parse_program("r <-. s(x,y) <- t(x,y). q(x,y) <- r | s(z,y) | r | q(x,z).").unwrap();
        let g = parse_priority_goal("q(x,x1), t(x1,x)").unwrap();
        let opts = DeriveOptions::new(Mode::Prsld, "pred-special:s".parse().unwrap()).max_steps(50).loop_check(LoopCheck::Evrl);
        let d = derive(&p, &g, &opts).unwrap();
        assert_eq!(d.status, Status::BoundExceeded);
        let t = d.template();
        assert!(t.chunks(3).all(|c| c == [2, 0, 1] || c.len() < 3));
        assert_eq!(show(&d.stages[3].reduced), format!("q(x,{0}),t({0},x1),t(x1,x)", d.stages[3].reduced.as_list()[0].args[1]));
    }

    #[test]
    fn sub_template_and_lineage() {
        let p = parse_program("p(x,y) <- q, p(x,z1), p(z1,z2), p(z2,y).").unwrap();
        let d = derive(&p, &list("q, p(x,x)"), &DeriveOptions::new(Mode::Rsld, Rule::OddEven).max_steps(5)).unwrap();
        let roots = BTreeSet::from([LineageTag::Initial(1)]);
        assert_eq!(d.sub_template(0, &roots).unwrap(), d.template());
        let q = BTreeSet::from([LineageTag::Initial(0)]);
        assert!(d.sub_template(0, &q).unwrap().is_empty());
        assert!(d.sub_template(0, &BTreeSet::from([LineageTag::Initial(7)])).is_err());
    }

    #[test]
    fn preq_recognition() {
        let p = parse_program("p <- q(x) | p.").unwrap();
        let d = derive(&p, &list("p, q(a)"), &DeriveOptions::new(Mode::Psld, Rule::Sq).max_steps(1)).unwrap();
        let a = BTreeSet::from([LineageTag::Initial(0)]);
        assert!(d.is_a_preq(&a));
        assert!(!d.is_a_queued(&a));
        let d = derive(&p, &list("p, q(a)"), &DeriveOptions::new(Mode::Psld, Rule::Queue).max_steps(1)).unwrap();
        assert!(d.is_a_queued(&a));
    }

    #[test]
    fn lineage_tags_roundtrip() {
        for t in ["g0", "x3", "s12.4"] {
            assert_eq!(t.parse::<LineageTag>().unwrap().to_string(), t);
        }
    }

    #[test]
    fn rejects_list_rule_in_priority_mode() {
        let p = parse_program("p.").unwrap();
        assert!(derive(&p, &list("p"), &DeriveOptions::new(Mode::Psld, Rule::OddEven)).is_err());
        assert!(derive(&p, &list("p"), &DeriveOptions::new(Mode::Sld, Rule::All)).is_err());
    }
}
