//! Scheduling rules: atom selection and placement of new atoms.
//!
//! Every rule is a pure function of the current goal, the selected atom and
//! the applied clause. Priority rules always select the minimum priority;
//! the list-only rules select by position and rewrite the atom in place.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::priority::{fresh_run, Priority, PriorityAtom, PriorityGoal};
use crate::term::Clause;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("cannot select from an empty goal")]
    EmptyGoal,
    #[error("unknown rule `{0}` (expected stack, queue, sq, center, pred-special:<p>, odd-even or all)")]
    UnknownRule(String),
    #[error("rule `{0}` enumerates every selection and only builds trees")]
    TreeOnly(Rule),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Rule {
    /// Whole body below the old goal.
    Stack,
    /// Whole body above the old goal.
    Queue,
    /// Per-clause split: the part before `|` stacked, the rest queued.
    Sq,
    /// Body inserted in the middle of the old goal.
    Center,
    /// Stack, except that rewriting the given predicate inserts the body
    /// right after the first old atom.
    PredSpecial(Arc<str>),
    /// List mode: first atom on odd length, last atom on even length.
    OddEven,
    /// List mode, trees only: every atom is a possible selection.
    All,
}

impl Rule {
    pub fn is_stack_queue(&self) -> bool {
        matches!(self, Rule::Stack | Rule::Queue | Rule::Sq)
    }

    /// Rules that only make sense on goals read as lists.
    pub fn is_list_only(&self) -> bool {
        matches!(self, Rule::OddEven | Rule::All)
    }

    /// The index of the atom to rewrite.
    pub fn select(&self, goal: &PriorityGoal) -> Result<usize, ScheduleError> {
        if goal.is_empty() {
            return Err(ScheduleError::EmptyGoal);
        }
        match self {
            Rule::OddEven => Ok(if goal.len() % 2 == 1 { 0 } else { goal.len() - 1 }),
            Rule::All => Err(ScheduleError::TreeOnly(self.clone())),
            _ => Ok(0),
        }
    }

    /// Fresh priorities and placement tags for the body atoms of `clause`
    /// (in body order), given the remaining goal `rest` and the position
    /// the selected atom occupied.
    pub fn place(&self, rest: &PriorityGoal, selected: &PriorityAtom, selected_index: usize, clause: &Clause) -> Placement {
        let n = clause.body_len();
        let split = match self {
            Rule::Stack => n,
            Rule::Queue => 0,
            _ => clause.split(),
        };
        let priorities = match self {
            Rule::Stack | Rule::Queue | Rule::Sq if rest.is_empty() => insert_at(rest, 0, n),
            Rule::Stack | Rule::Queue | Rule::Sq => {
                let mut ps = insert_at(rest, 0, split);
                ps.extend(insert_at(rest, rest.len(), n - split));
                ps
            }
            Rule::Center => insert_at(rest, rest.len() / 2, n),
            Rule::PredSpecial(p) => {
                let at = if *selected.atom.predicate == **p && !rest.is_empty() { 1 } else { 0 };
                insert_at(rest, at, n)
            }
            Rule::OddEven | Rule::All => insert_at(rest, selected_index, n),
        };
        let tags = priorities
            .iter()
            .enumerate()
            .map(|(m, p)| match (rest.min_priority(), rest.max_priority()) {
                (Some(lo), _) if p < lo => PlacementTag::Stack,
                (_, Some(hi)) if p > hi => PlacementTag::Queue,
                (Some(_), Some(_)) => PlacementTag::Interior,
                _ if m < split => PlacementTag::Stack,
                _ => PlacementTag::Queue,
            })
            .collect();
        Placement { priorities, tags }
    }
}

/// `count` ascending priorities occupying the gap before `rest[index]`.
fn insert_at(rest: &PriorityGoal, index: usize, count: usize) -> Vec<Priority> {
    if count == 0 {
        return Vec::new();
    }
    let lo = index.checked_sub(1).and_then(|i| rest.get(i)).map(|a| &a.priority);
    let hi = rest.get(index).map(|a| &a.priority);
    fresh_run(lo, hi, count)
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Stack => f.write_str("stack"),
            Rule::Queue => f.write_str("queue"),
            Rule::Sq => f.write_str("sq"),
            Rule::Center => f.write_str("center"),
            Rule::PredSpecial(p) => write!(f, "pred-special:{p}"),
            Rule::OddEven => f.write_str("odd-even"),
            Rule::All => f.write_str("all"),
        }
    }
}

impl FromStr for Rule {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "stack" => Rule::Stack,
            "queue" => Rule::Queue,
            "sq" => Rule::Sq,
            "center" => Rule::Center,
            "odd-even" => Rule::OddEven,
            "all" => Rule::All,
            _ => match s.strip_prefix("pred-special:") {
                Some(p) if !p.is_empty() => Rule::PredSpecial(Arc::from(p)),
                _ => return Err(ScheduleError::UnknownRule(s.to_string())),
            },
        })
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Where a new atom landed relative to the old goal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementTag {
    Stack,
    Queue,
    Interior,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub priorities: Vec<Priority>,
    pub tags: Vec<PlacementTag>,
}

/// The atom with minimum priority.
pub fn select_atom(goal: &PriorityGoal) -> Result<&PriorityAtom, ScheduleError> {
    goal.first().ok_or(ScheduleError::EmptyGoal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_clause, parse_priority_goal};

    fn pg(s: &str) -> PriorityGoal {
        parse_priority_goal(s).unwrap()
    }

    /// Merges the placed body into `rest` and prints the atom order.
    fn order(rule: &Rule, goal: &str, clause: &str) -> String {
        let g = pg(goal);
        let c = parse_clause(clause).unwrap();
        let i = rule.select(&g).unwrap();
        let rest = g.without(i);
        let placement = rule.place(&rest, &g.atoms()[i], i, &c);
        assert!(placement.priorities.iter().all(|p| rest.position_of(p).is_none()));
        let body = PriorityGoal::from_pairs(c.body().into_iter().zip(placement.priorities)).unwrap();
        let merged = rest.merge(&body).unwrap();
        merged.as_list().iter().map(|a| a.to_string()).collect::<Vec<_>>().join("|")
    }

    #[test]
    fn select_minimum() {
        assert_eq!(select_atom(&pg("b[3], q[1]")).unwrap().atom.to_string(), "q");
        assert_eq!(select_atom(&pg("a[1]")).unwrap().atom.to_string(), "a");
        assert_eq!(select_atom(&PriorityGoal::empty()), Err(ScheduleError::EmptyGoal));
    }

    #[test]
    fn stack_rule_places_body_first() {
        assert_eq!(order(&Rule::Stack, "p[1], q(a)[2]", "p <- q(x) | p."), "q(x)|p|q(a)");
    }

    #[test]
    fn queue_rule_places_body_last() {
        let g = pg("a[2], b[3]");
        let c = parse_clause("a <- q.").unwrap();
        let placement = Rule::Queue.place(&g.without(0), &g.atoms()[0], 0, &c);
        assert!(placement.priorities[0] > Priority::int(3));
        assert_eq!(placement.tags, vec![PlacementTag::Queue]);
    }

    #[test]
    fn sq_rule_uses_clause_split() {
        assert_eq!(order(&Rule::Sq, "p[1], k[2]", "p <- a, b | c."), "a|b|k|c");
        assert_eq!(order(&Rule::Sq, "p[1]", "p <- a | c."), "a|c");
    }

    #[test]
    fn fact_leaves_rest_unchanged() {
        assert_eq!(order(&Rule::Stack, "a[1], b[2]", "a."), "b");
    }

    #[test]
    fn center_rule() {
        assert_eq!(order(&Rule::Center, "s[1], p(a)[2]", "s <- p(b)."), "p(b)|p(a)");
        assert_eq!(order(&Rule::Center, "s[1], p(a)[1.5], r[2]", "s <- p(b)."), "p(a)|p(b)|r");
        assert_eq!(order(&Rule::Center, "p[1]", "p <- a, b."), "a|b");
        assert_eq!(
            order(&Rule::Center, "p[1.1], r[1.5], r[1.6], s[2], s[2.5]", "p <- p, r, r."),
            "r|r|p|r|r|s|s"
        );
        assert_eq!(order(&Rule::Center, "p[1], s[2], s[3]", "p <- p, r, r."), "s|p|r|r|s");
    }

    #[test]
    fn pred_special_rule() {
        let rule: Rule = "pred-special:s".parse().unwrap();
        assert_eq!(
            order(&rule, "s(x2,x1)[1], q(x,x2)[2], t(x1,x)[3]", "s(x,y) <- t(x,y)."),
            "q(x,x2)|t(x,y)|t(x1,x)"
        );
        assert_eq!(order(&rule, "q(a,b)[1], t[2]", "q(x,y) <- r | s(z,y)."), "r|s(z,y)|t");
        assert_eq!(order(&rule, "s(a,b)[1]", "s(x,y) <- t(x,y), r."), "t(x,y)|r");
    }

    #[test]
    fn odd_even_selection() {
        assert_eq!(Rule::OddEven.select(&pg("q, p(x,x)")).unwrap(), 1);
        assert_eq!(Rule::OddEven.select(&pg("a, b, c, d, e")).unwrap(), 0);
        assert_eq!(Rule::OddEven.select(&pg("a")).unwrap(), 0);
    }

    #[test]
    fn odd_even_rewrites_in_place() {
        assert_eq!(
            order(&Rule::OddEven, "q, p(x,x)", "p(x,y) <- q, p(x,z1), p(z1,z2), p(z2,y)."),
            "q|q|p(x,z1)|p(z1,z2)|p(z2,y)"
        );
        assert_eq!(order(&Rule::OddEven, "a, b, c, d", "d <- e, f."), "a|b|c|e|f");
    }

    #[test]
    fn rule_names_roundtrip() {
        for name in ["stack", "queue", "sq", "center", "pred-special:s", "odd-even", "all"] {
            assert_eq!(name.parse::<Rule>().unwrap().to_string(), name);
        }
        assert!("pred-special:".parse::<Rule>().is_err());
        assert!("leftmost".parse::<Rule>().is_err());
    }
}
