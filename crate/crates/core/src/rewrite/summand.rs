//! The summand relations `⊑` (modulo A1, A2) and `⊑ₚ` (modulo pA1, pA2).

use crate::meadow::Rat;
use crate::syntax::Term;

/// Order-insensitive form of a term modulo A1 and A2: nested `+` is
/// flattened and its operands sorted, recursively.
fn ac_alt(t: &Term) -> Term {
    t.map_bottom_up(&mut |x| match &x {
        Term::Alt(..) => {
            let mut ops = Vec::new();
            flatten_alt(&x, &mut ops);
            ops.sort();
            Term::sum(ops)
        }
        _ => x,
    })
}

fn flatten_alt(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Alt(l, r) => {
            flatten_alt(l, out);
            flatten_alt(r, out);
        }
        _ => out.push(t.clone()),
    }
}

/// `t1 ⊑ t2`: `t1 ≡ t2`, or `t1 + t″ = t2` follows from A1 and A2.
pub fn summand(t1: &Term, t2: &Term) -> bool {
    if t1 == t2 {
        return true;
    }
    let (a, b) = (ac_alt(t1), ac_alt(t2));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    flatten_alt(&a, &mut xs);
    flatten_alt(&b, &mut ys);
    if xs.len() >= ys.len() {
        return false;
    }
    // Sub-multiset test on sorted operand lists.
    let mut j = 0;
    for x in &xs {
        while j < ys.len() && ys[j] < *x {
            j += 1;
        }
        if j == ys.len() || ys[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

/// Leaves of the `⊞` tree with their absolute weights.
fn branches(t: &Term, w: Rat, out: &mut Vec<(Term, Rat)>) {
    match t {
        Term::PAlt(p, l, r) => {
            branches(l, w.mul(p), out);
            branches(r, w.mul(&p.complement()), out);
        }
        _ => out.push((t.clone(), w)),
    }
}

/// `t1 ⊑ₚ t2`: `t1 ≡ t2`, or `t1 ⊞π t″ = t2` follows from pA1 and pA2 for
/// some `π` and `t″`. Decided on the flattened branch structure: the leaves
/// of `t1`, scaled by a common factor, must be matched one-to-one by a
/// proper sub-multiset of the leaves of `t2`.
pub fn psummand(t1: &Term, t2: &Term) -> bool {
    if t1 == t2 {
        return true;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    branches(t1, Rat::one(), &mut xs);
    branches(t2, Rat::one(), &mut ys);
    if xs.len() >= ys.len() {
        return false;
    }
    // The scaling factor is fixed once the first leaf of t1 is matched.
    let (x0, w0) = &xs[0];
    for (k, (y, v)) in ys.iter().enumerate() {
        if y != x0 {
            continue;
        }
        let pi = if w0.is_zero() { continue } else { v.div(w0) };
        let mut used = vec![false; ys.len()];
        used[k] = true;
        if match_rest(&xs[1..], &ys, &pi, &mut used) {
            return true;
        }
    }
    false
}

fn match_rest(xs: &[(Term, Rat)], ys: &[(Term, Rat)], pi: &Rat, used: &mut [bool]) -> bool {
    let Some(((x, w), rest)) = xs.split_first() else {
        return true;
    };
    let want = pi.mul(w);
    for k in 0..ys.len() {
        if used[k] || ys[k].0 != *x || ys[k].1 != want {
            continue;
        }
        used[k] = true;
        if match_rest(rest, ys, pi, used) {
            return true;
        }
        used[k] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Context;
    use crate::syntax::parse_term;

    fn p(s: &str) -> Term {
        parse_term(s, &Context::with_builtins()).unwrap()
    }

    #[test]
    fn summand_examples() {
        assert!(summand(&p("a"), &p("a + b")));
        assert!(!summand(&p("a"), &p("b")));
        assert!(summand(&p("a + c"), &p("c + (b + a)")));
        assert!(summand(&p("a + b"), &p("a + b")));
        assert!(!summand(&p("a + a"), &p("a + b")));
    }

    #[test]
    fn psummand_examples() {
        assert!(psummand(&p("a"), &p("a +[1/2] b")));
        assert!(psummand(&p("a +[1/3] b"), &p("c +[1/2] (b +[2/3] a)")));
        assert!(!psummand(&p("a +[1/3] b"), &p("(a +[1/2] b) +[1/2] c")));
        assert!(!psummand(&p("a"), &p("b +[1/2] c")));
    }
}
