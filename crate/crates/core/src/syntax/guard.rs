//! Guardedness of recursive specifications by definition inlining.

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{Name, RecSpec, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardVerdict {
    /// Every occurrence became guarded after this many inlining rounds.
    Guarded { rounds: usize },
    /// This variable still has an unguarded occurrence after the bound.
    NotShownGuarded(Name),
}

/// Variables occurring unguarded in `t`. An occurrence is guarded when it lies
/// in the right operand of a sequential composition whose left operand has no
/// unguarded occurrences: such a left operand must act before it can terminate.
pub fn unguarded_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_unguarded(t, &mut out);
    out
}

fn collect_unguarded(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Seq(l, _) => collect_unguarded(l, out),
        _ => {
            for c in t.children() {
                collect_unguarded(c, out);
            }
        }
    }
}

/// Replaces every unguarded variable occurrence by its right-hand side.
fn inline_unguarded(t: &Term, spec: &RecSpec) -> Term {
    match t {
        Term::Var(x) => spec.rhs(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Seq(l, r) => Term::seq(inline_unguarded(l, spec), (**r).clone()),
        Term::Action(_) | Term::Deadlock | Term::Rec(..) => t.clone(),
        Term::Alt(l, r) => Term::alt(inline_unguarded(l, spec), inline_unguarded(r, spec)),
        Term::PAlt(p, l, r) => Term::palt(p.clone(), inline_unguarded(l, spec), inline_unguarded(r, spec)),
        Term::Par(l, r) => Term::par(inline_unguarded(l, spec), inline_unguarded(r, spec)),
        Term::LeftMerge(l, r) => Term::left_merge(inline_unguarded(l, spec), inline_unguarded(r, spec)),
        Term::CommMerge(l, r) => Term::comm_merge(inline_unguarded(l, spec), inline_unguarded(r, spec)),
        Term::Encap(h, x) => Term::Encap(h.clone(), inline_unguarded(x, spec).into()),
        Term::Si(n) | Term::Posm(_, n) => {
            let procs = n.procs.iter().map(|p| inline_unguarded(p, spec)).collect();
            let node = crate::syntax::Interleaving { procs, ..(**n).clone() };
            match t {
                Term::Si(_) => Term::Si(node.into()),
                Term::Posm(i, _) => Term::Posm(*i, node.into()),
                _ => unreachable!(),
            }
        }
    }
}

/// Per-variable verdicts: rounds needed, or `None` if not shown guarded.
pub fn guard_report(spec: &RecSpec, bound: usize) -> BTreeMap<Name, Option<usize>> {
    spec.equations
        .iter()
        .map(|(x, rhs)| {
            let mut t = rhs.clone();
            let mut verdict = None;
            for round in 0..=bound {
                if unguarded_vars(&t).is_empty() {
                    verdict = Some(round);
                    break;
                }
                if round < bound {
                    t = inline_unguarded(&t, spec);
                }
            }
            (x.clone(), verdict)
        })
        .collect()
}

pub fn check_guarded(spec: &RecSpec, bound: usize) -> GuardVerdict {
    let mut rounds = 0;
    for (x, v) in guard_report(spec, bound) {
        match v {
            Some(r) => rounds = rounds.max(r),
            None => return GuardVerdict::NotShownGuarded(x),
        }
    }
    GuardVerdict::Guarded { rounds }
}
