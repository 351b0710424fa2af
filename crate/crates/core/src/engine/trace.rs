//! Text and JSON renderings of derivation records.

use std::fmt::Write as _;

use serde_json::{json, Value};

use super::DerivationRecord;
use crate::syntax::Program;
use crate::term::Atom;

fn atoms(list: &[Atom]) -> Vec<String> {
    list.iter().map(|a| a.to_string()).collect()
}

/// One entry per stage; the last entry has no step.
pub fn to_json(d: &DerivationRecord) -> Value {
    let steps: Vec<Value> = d
        .stages
        .iter()
        .enumerate()
        .map(|(j, st)| {
            let step = d.steps.get(j);
            json!({
                "index": j,
                "resolvent": st.resolvent.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "reduction": st.reduction.as_ref().map(|c| json!({
                    "tau": c.tau,
                    "eliminated": c.eliminated.iter().map(|e| json!({
                        "atom": st.resolvent.atoms()[e.index].to_string(),
                        "by": st.resolvent.atoms()[e.by].to_string(),
                    })).collect::<Vec<_>>(),
                    "advanced": c.advancement.iter().map(|a| json!({
                        "atom": st.resolvent.atoms()[a.index].atom.to_string(),
                        "from": a.from,
                        "to": a.to,
                    })).collect::<Vec<_>>(),
                })),
                "reduced": st.reduced.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "resultant": { "reduced": atoms(&st.reduced.as_list()), "instance": atoms(&st.instance) },
                "selected": step.map(|s| s.selected.to_string()),
                "clause": step.map(|s| Program::clause_name(s.clause_index)),
                "mgu": step.map(|s| serde_json::to_value(&s.mgu).expect("serializable")),
            })
        })
        .collect();
    json!({
        "mode": d.options.mode,
        "rule": d.options.rule,
        "status": d.status.name(),
        "witness": d.witness,
        "initial": d.initial.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "steps": steps,
    })
}

pub fn to_text(d: &DerivationRecord) -> String {
    let mut out = String::new();
    for (j, st) in d.stages.iter().enumerate() {
        let _ = write!(out, "{j:>4}  {}", show(&st.resolvent));
        if let Some(c) = st.reduction.as_ref().filter(|c| !c.is_identity()) {
            let _ = write!(out, "\n      >>{} {}", c.tau, show(&st.reduced));
        }
        if let Some(s) = d.steps.get(j) {
            let _ = write!(out, "\n      -- {} on {} --", Program::clause_name(s.clause_index), s.selected);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "status: {}", d.status);
    if let Some(w) = &d.witness {
        let _ = write!(out, "witness: ({}, {}) renaming {}", w.i, w.j, w.renaming);
        if let Some(s) = &w.shifting {
            let _ = write!(out, " shifting {s}");
        }
        out.push('\n');
    }
    out
}

fn show(g: &crate::priority::PriorityGoal) -> String {
    if g.is_empty() {
        "□".to_string()
    } else {
        g.to_string()
    }
}
