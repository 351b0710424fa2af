//! Bounded derivation trees over every clause choice (and, with the `all`
//! rule, every selection).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::{reduce_stage, resolve, DeriveOptions, EngineError, LoopCheck, Mode, Stage};
use crate::loopcheck::{check_prune, Resultant};
use crate::priority::PriorityGoal;
use crate::reduction::ReductionCertificate;
use crate::scheduling::Rule;
use crate::syntax::Program;
use crate::term::{apply_all, vars_of, Atom, FreshVars, Substitution, Var};

#[derive(Clone, Debug)]
pub struct TreeOptions {
    pub mode: Mode,
    pub rule: Rule,
    pub depth: usize,
    pub loop_check: LoopCheck,
    pub reduce: bool,
    pub advancement: bool,
    pub max_nodes: usize,
}

impl TreeOptions {
    pub fn new(mode: Mode, rule: Rule, depth: usize) -> Self {
        TreeOptions { mode, rule, depth, loop_check: LoopCheck::Off, reduce: true, advancement: true, max_nodes: 1_000_000 }
    }

    fn derive_options(&self) -> DeriveOptions {
        let mut o = DeriveOptions::new(self.mode, self.rule.clone());
        o.loop_check = self.loop_check;
        o.reduce = self.reduce;
        o.advancement = self.advancement;
        o
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeStatus {
    Refuted,
    Failed,
    /// At the depth bound with at least one applicable step left.
    Truncated,
    Pruned { ancestor: usize },
    Internal,
    /// Node budget ran out before the children were built.
    Budget,
}

#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub clause_index: usize,
    pub selected_index: usize,
    pub mgu: Substitution,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeNode {
    pub resolvent: PriorityGoal,
    pub reduction: Option<ReductionCertificate>,
    pub reduced: PriorityGoal,
    pub instance: Vec<Atom>,
    pub status: NodeStatus,
    /// The step that produced this node; `None` at the root.
    pub edge: Option<Edge>,
    pub children: Vec<TreeNode>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tree {
    pub root: TreeNode,
    pub nodes: usize,
    pub budget_exhausted: bool,
}

pub fn build_tree(program: &Program, goal: &PriorityGoal, opts: &TreeOptions) -> Result<Tree, EngineError> {
    let dopts = opts.derive_options();
    dopts.validate_for_tree()?;
    let base = goal.vars();
    let mut builder = Builder {
        program,
        opts,
        dopts,
        initial: goal.as_list(),
        base: base.clone(),
        nodes: 0,
        budget_exhausted: false,
    };
    let root = builder.node(goal.clone(), None, Substitution::new(), FreshVars::after(&base), &mut Vec::new());
    Ok(Tree { root, nodes: builder.nodes, budget_exhausted: builder.budget_exhausted })
}

struct Builder<'a> {
    program: &'a Program,
    opts: &'a TreeOptions,
    dopts: DeriveOptions,
    initial: Vec<Atom>,
    base: BTreeSet<Var>,
    nodes: usize,
    budget_exhausted: bool,
}

impl Builder<'_> {
    fn node(
        &mut self,
        resolvent: PriorityGoal,
        edge: Option<Edge>,
        theta: Substitution,
        fresh: FreshVars,
        path: &mut Vec<Resultant>,
    ) -> TreeNode {
        self.nodes += 1;
        let depth = path.len();
        let instance = apply_all(&self.initial, &theta);
        let (reduced, reduction) = reduce_stage(&resolvent, &vars_of(&instance), &self.dopts);
        let stage = Stage { resolvent, reduction, reduced, instance };
        let mut node = TreeNode {
            resolvent: stage.resolvent.clone(),
            reduction: stage.reduction.clone(),
            reduced: stage.reduced.clone(),
            instance: stage.instance.clone(),
            status: NodeStatus::Internal,
            edge,
            children: Vec::new(),
        };
        if node.reduced.is_empty() {
            node.status = NodeStatus::Refuted;
            return node;
        }
        path.push(stage.resultant());
        if let Some(w) = check_prune(path, self.opts.loop_check, !self.opts.mode.is_list()) {
            path.pop();
            node.status = NodeStatus::Pruned { ancestor: w.i };
            return node;
        }
        let selections: Vec<usize> = match self.opts.rule {
            Rule::All => (0..node.reduced.len()).collect(),
            ref r => vec![r.select(&node.reduced).expect("nonempty goal")],
        };
        let mut children = Vec::new();
        'outer: for &i in &selections {
            for c in 0..self.program.len() {
                let mut f = fresh.clone();
                let Some(rec) = resolve(self.program, &self.opts.rule, &node.reduced, i, c, &self.base, &mut f, depth, true)
                else {
                    continue;
                };
                if depth >= self.opts.depth {
                    node.status = NodeStatus::Truncated;
                    break 'outer;
                }
                if self.nodes >= self.opts.max_nodes {
                    self.budget_exhausted = true;
                    node.status = NodeStatus::Budget;
                    break 'outer;
                }
                let edge = Edge { clause_index: c, selected_index: i, mgu: rec.mgu.clone() };
                let child = self.node(rec.resolvent, Some(edge), theta.compose(&rec.mgu), f, path);
                children.push(child);
            }
        }
        path.pop();
        if node.status == NodeStatus::Internal && children.is_empty() {
            node.status = NodeStatus::Failed;
        }
        node.children = children;
        node
    }
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a TreeNode, &[usize])) {
        fn go<'a>(n: &'a TreeNode, path: &mut Vec<usize>, f: &mut dyn FnMut(&'a TreeNode, &[usize])) {
            f(n, path);
            for c in &n.children {
                path.push(c.edge.as_ref().map_or(0, |e| e.clause_index));
                go(c, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }
}

impl Tree {
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |n, _| {
            if n.is_leaf() {
                out.push(n)
            }
        });
        out
    }

    /// No leaf was cut by the depth bound or the node budget.
    pub fn is_finite(&self) -> bool {
        self.leaves().iter().all(|n| !matches!(n.status, NodeStatus::Truncated | NodeStatus::Budget))
    }

    pub fn all_leaves_failed(&self) -> bool {
        self.leaves().iter().all(|n| n.status == NodeStatus::Failed)
    }

    pub fn has_refutation(&self) -> bool {
        self.leaves().iter().any(|n| n.status == NodeStatus::Refuted)
    }

    pub fn max_depth(&self) -> usize {
        let mut m = 0;
        self.root.visit(&mut |_, p| m = m.max(p.len()));
        m
    }

    /// Every node with the clause template of the path leading to it.
    pub fn paths(&self) -> Vec<(Vec<usize>, &TreeNode)> {
        let mut out = Vec::new();
        self.root.visit(&mut |n, p| out.push((p.to_vec(), n)));
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  node [shape=box, fontname=\"monospace\"];\n");
        let mut next = 0usize;
        fn go(n: &TreeNode, id: usize, next: &mut usize, out: &mut String) {
            let label = if n.reduced.is_empty() { "□".to_string() } else { n.reduced.to_string() };
            let style = match n.status {
                NodeStatus::Refuted => ", style=bold, color=green",
                NodeStatus::Failed => ", color=red",
                NodeStatus::Truncated | NodeStatus::Budget => ", style=dashed",
                NodeStatus::Pruned { .. } => ", style=dotted, color=blue",
                NodeStatus::Internal => "",
            };
            let _ = writeln!(out, "  n{id} [label=\"{}\"{style}];", label.replace('"', "\\\""));
            for c in &n.children {
                *next += 1;
                let cid = *next;
                let e = c.edge.as_ref().expect("child has an edge");
                let _ = writeln!(out, "  n{id} -> n{cid} [label=\"{}\"];", Program::clause_name(e.clause_index));
                go(c, cid, next, out);
            }
        }
        go(&self.root, 0, &mut next, &mut out);
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_goal, parse_priority_goal, parse_program};

    #[test]
    fn odd_even_tree_is_finite() {
        let p = parse_program("p(x,y) <- q, p(x,z1), p(z1,z2), p(z2,y).").unwrap();
        let g = PriorityGoal::from_list(&parse_goal("q, p(x,x)").unwrap());
        let t = build_tree(&p, &g, &TreeOptions::new(Mode::Sld, Rule::OddEven, 10)).unwrap();
        assert!(t.is_finite());
        assert!(t.all_leaves_failed());
    }

    #[test]
    fn pred_special_tree_is_finite() {
        let p = parse_program("r <-. s(x,y) <- t(x,y). q(x,y) <- r | s(z,y) | r | q(x,z).").unwrap();
        let g = parse_priority_goal("q(x,x1), t(x1,x)").unwrap();
        let t = build_tree(&p, &g, &TreeOptions::new(Mode::Psld, "pred-special:s".parse().unwrap(), 10)).unwrap();
        assert!(t.is_finite());
        assert!(t.all_leaves_failed());
    }

    #[test]
    fn depth_zero_is_root_only() {
        let p = parse_program("p <- p.").unwrap();
        let g = PriorityGoal::from_list(&parse_goal("p").unwrap());
        let t = build_tree(&p, &g, &TreeOptions::new(Mode::Sld, Rule::Stack, 0)).unwrap();
        assert_eq!(t.nodes, 1);
        assert_eq!(t.root.status, NodeStatus::Truncated);
        assert!(!t.is_finite());
    }

    #[test]
    fn all_selections_branch() {
        let p = parse_program("a. b.").unwrap();
        let g = PriorityGoal::from_list(&parse_goal("a, b").unwrap());
        let t = build_tree(&p, &g, &TreeOptions::new(Mode::Sld, Rule::All, 5)).unwrap();
        assert_eq!(t.root.children.len(), 2);
        assert_eq!(t.leaves().len(), 2);
        assert!(t.has_refutation());
        assert!(t.to_dot().contains("c1"));
    }

    #[test]
    fn loop_check_prunes_in_tree() {
        let p = parse_program("p <- p. p.").unwrap();
        let g = PriorityGoal::from_list(&parse_goal("p").unwrap());
        let mut o = TreeOptions::new(Mode::Sld, Rule::Stack, 10);
        o.loop_check = LoopCheck::Evrl;
        let t = build_tree(&p, &g, &o).unwrap();
        assert!(t.is_finite());
        assert!(t.leaves().iter().any(|n| n.status == NodeStatus::Pruned { ancestor: 0 }));
    }
}
