//! Equality-variant loop checks on reduced resultants.

use serde::Serialize;

use crate::engine::LoopCheck;
use crate::priority::{find_shifting, PriorityGoal, Shifting};
use crate::term::{variant_of, Atom, Renaming};

/// `[N_h, G_0θ_0…θ_{h-1}]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Resultant {
    pub reduced: PriorityGoal,
    pub instance: Vec<Atom>,
}

/// Resultant `j` equals resultant `i` under `renaming` (and `shifting`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PruneWitness {
    pub i: usize,
    pub j: usize,
    pub renaming: Renaming,
    pub shifting: Option<Shifting>,
}

/// One renaming `τ` with `instance_b = instance_a τ` and `N_b = N_a τ` as
/// lists; with `priority`, also a shifting taking `N_a τ` onto `N_b`.
/// Without `full` only the reduced resolvents are compared.
pub fn resultant_equivalent(a: &Resultant, b: &Resultant, priority: bool, full: bool) -> Option<(Renaming, Option<Shifting>)> {
    let flatten = |r: &Resultant| {
        let mut v = if full { r.instance.clone() } else { Vec::new() };
        v.extend(r.reduced.as_list());
        v
    };
    if (full && a.instance.len() != b.instance.len()) || a.reduced.len() != b.reduced.len() {
        return None;
    }
    let tau = variant_of(&flatten(a), &flatten(b))?;
    let shifting = if priority { Some(find_shifting(&a.reduced.apply(tau.as_substitution()), &b.reduced)?) } else { None };
    Some((tau, shifting))
}

/// Checks the witness by applying it.
pub fn verify_witness(resultants: &[Resultant], w: &PruneWitness, full: bool) -> bool {
    let (Some(a), Some(b)) = (resultants.get(w.i), resultants.get(w.j)) else {
        return false;
    };
    let s = w.renaming.as_substitution();
    if w.i >= w.j || (full && crate::term::apply_all(&a.instance, s) != b.instance) {
        return false;
    }
    let moved = a.reduced.apply(s);
    match &w.shifting {
        Some(pi) => moved.shift(pi).is_ok_and(|g| g == b.reduced),
        None => moved.as_list() == b.reduced.as_list(),
    }
}

/// Compares the last resultant with every earlier one; the first match wins.
pub fn check_prune(resultants: &[Resultant], check: LoopCheck, priority: bool) -> Option<PruneWitness> {
    let full = match check {
        LoopCheck::Off => return None,
        LoopCheck::Evrl => true,
        LoopCheck::Evgl => false,
    };
    let j = resultants.len().checked_sub(1)?;
    (0..j).find_map(|i| {
        resultant_equivalent(&resultants[i], &resultants[j], priority, full)
            .map(|(renaming, shifting)| PruneWitness { i, j, renaming, shifting })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_goal, parse_priority_goal};

    fn rs(n: &str, g: &str) -> Resultant {
        Resultant { reduced: parse_priority_goal(n).unwrap(), instance: parse_goal(g).unwrap() }
    }

    #[test]
    fn ground_repeat() {
        let rss = [rs("p", "p"), rs("p", "p")];
        let w = check_prune(&rss, LoopCheck::Evrl, false).unwrap();
        assert_eq!((w.i, w.j), (0, 1));
        assert!(w.renaming.is_empty());
        assert!(verify_witness(&rss, &w, true));
    }

    #[test]
    fn shared_renaming_required() {
        let a = rs("q(x)", "p(x)");
        let b = rs("q(z)", "p(x)");
        assert!(resultant_equivalent(&a, &b, false, true).is_none());
        assert!(resultant_equivalent(&a, &b, false, false).is_some());
        let c = rs("q(y)", "p(x)");
        assert!(resultant_equivalent(&b, &c, true, true).is_some());
    }

    #[test]
    fn instance_more_instantiated() {
        let a = rs("q(x,x1), t(x1,x)", "q(x,x1), t(x1,x)");
        let b = rs("q(x,v3)[1], t(v3,x1)[2], t(x1,x)[3]", "q(x,x1), t(x1,x)");
        assert!(resultant_equivalent(&a, &b, true, true).is_none());
    }

    #[test]
    fn priority_order_matters() {
        let a = rs("p(x)[1], q(x)[5]", "r");
        let b = rs("p(y)[2], q(y)[3]", "r");
        let (tau, pi) = resultant_equivalent(&a, &b, true, true).unwrap();
        assert_eq!(tau.to_string(), "{x/y}");
        assert_eq!(pi.unwrap().to_string(), "{1->2, 5->3}");
    }

    #[test]
    fn off_never_prunes() {
        assert!(check_prune(&[rs("p", "p"), rs("p", "p")], LoopCheck::Off, false).is_none());
    }
}
