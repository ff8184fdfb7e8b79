use std::fmt::{self, Write};

use crate::syntax::{Interleaving, Term};

/// Binding strength: `+` is loosest, then the equal-strength merge and
/// probabilistic operators, then `.`, then atoms.
fn prec(t: &Term) -> u8 {
    match t {
        Term::Alt(..) => 0,
        Term::PAlt(..) | Term::Par(..) | Term::LeftMerge(..) | Term::CommMerge(..) => 1,
        Term::Seq(..) => 2,
        _ => 3,
    }
}

fn same_level1(a: &Term, b: &Term) -> bool {
    matches!(
        (a, b),
        (Term::PAlt(..), Term::PAlt(..))
            | (Term::Par(..), Term::Par(..))
            | (Term::LeftMerge(..), Term::LeftMerge(..))
            | (Term::CommMerge(..), Term::CommMerge(..))
    )
}

fn wrapped(f: &mut fmt::Formatter<'_>, t: &Term, paren: bool) -> fmt::Result {
    if paren { write!(f, "({t})") } else { write!(f, "{t}") }
}

fn interleaving(f: &mut fmt::Formatter<'_>, kw: &str, pos: Option<usize>, n: &Interleaving) -> fmt::Result {
    write!(f, "{kw}[{}", n.strategy.name)?;
    let initial = n.strategy.strategy.initial_state();
    if let Some(i) = pos {
        write!(f, "; i={i}")?;
    }
    if !n.history.is_empty() || pos.is_some() {
        write!(f, "; h={}", n.history)?;
    }
    if n.state != initial || pos.is_some() {
        write!(f, "; s={}", n.state)?;
    }
    write!(f, "](")?;
    for (k, p) in n.procs.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{p}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Action(a) => write!(f, "{a}"),
            Term::Deadlock => write!(f, "delta"),
            Term::Var(x) => write!(f, "{x}"),
            Term::Rec(x, e) => write!(f, "<{x}|{}>", e.name()),
            Term::Alt(l, r) => {
                wrapped(f, l, prec(l) == 0)?;
                write!(f, " + ")?;
                write!(f, "{r}")
            }
            Term::Seq(l, r) => {
                wrapped(f, l, prec(l) < 3)?;
                write!(f, " . ")?;
                wrapped(f, r, prec(r) < 2)
            }
            Term::PAlt(_, l, r) | Term::Par(l, r) | Term::LeftMerge(l, r) | Term::CommMerge(l, r) => {
                wrapped(f, l, prec(l) < 2)?;
                match self {
                    Term::PAlt(p, ..) => write!(f, " +[{p}] ")?,
                    Term::Par(..) => write!(f, " || ")?,
                    Term::LeftMerge(..) => write!(f, " ||_ ")?,
                    _ => write!(f, " | ")?,
                }
                wrapped(f, r, prec(r) < 2 && !same_level1(self, r))
            }
            Term::Encap(h, t) => {
                write!(f, "encap({{")?;
                let mut s = String::new();
                for (k, a) in h.iter().enumerate() {
                    if k > 0 {
                        s.push_str(", ");
                    }
                    write!(s, "{a}")?;
                }
                write!(f, "{s}}}, {t})")
            }
            Term::Si(n) => interleaving(f, "si", None, n),
            Term::Posm(i, n) => interleaving(f, "posm", Some(*i), n),
        }
    }
}

pub fn print_term(t: &Term) -> String {
    t.to_string()
}
