//! Canonical proper basic terms: a distribution over menus, each menu a set
//! of summands `a` or `a·t`. Commutativity and associativity of `+` and `⊞`
//! hold by construction, so equality of canonical forms is structural.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::context::Context;
use crate::error::{Error, Result};
use crate::meadow::Rat;
use crate::syntax::{Action, ActionSet, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Summand {
    pub action: Action,
    pub cont: Option<Arc<CanonTerm>>,
}

/// A set of summands; the empty menu is δ.
pub type Menu = BTreeSet<Summand>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonTerm(BTreeMap<Menu, Rat>);

impl CanonTerm {
    pub fn deadlock() -> CanonTerm {
        CanonTerm::menu(Menu::new())
    }

    pub fn action(a: Action) -> CanonTerm {
        CanonTerm::menu(Menu::from([Summand { action: a, cont: None }]))
    }

    pub fn menu(m: Menu) -> CanonTerm {
        CanonTerm(BTreeMap::from([(m, Rat::one())]))
    }

    /// Builds from weighted menus, merging duplicates and dropping zeros.
    pub fn from_branches(branches: impl IntoIterator<Item = (Menu, Rat)>) -> CanonTerm {
        let mut out: BTreeMap<Menu, Rat> = BTreeMap::new();
        for (m, p) in branches {
            if p.is_zero() {
                continue;
            }
            let e = out.entry(m).or_insert_with(Rat::zero);
            *e = e.add(&p);
        }
        CanonTerm(out)
    }

    pub fn branches(&self) -> impl Iterator<Item = (&Menu, &Rat)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Not initially probabilistic: `x = x + x` is derivable.
    pub fn is_single_menu(&self) -> bool {
        self.0.len() == 1
    }

    pub fn total(&self) -> Rat {
        Rat::sum(self.0.values())
    }

    /// A term in the term syntax with sorted branches and summands.
    pub fn denote(&self) -> Term {
        Term::prob_sum(self.0.iter().map(|(m, p)| (p.clone(), denote_menu(m))).collect())
    }

    fn product(&self, other: &CanonTerm, f: impl Fn(&Menu, &Menu) -> Menu) -> CanonTerm {
        CanonTerm::from_branches(
            self.0
                .iter()
                .flat_map(|(m, p)| other.0.iter().map(move |(n, q)| (m, p, n, q)))
                .map(|(m, p, n, q)| (f(m, n), p.mul(q))),
        )
    }

    fn map_menus(&self, f: impl Fn(&Menu) -> Menu) -> CanonTerm {
        CanonTerm::from_branches(self.0.iter().map(|(m, p)| (f(m), p.clone())))
    }
}

pub fn denote_menu(m: &Menu) -> Term {
    Term::sum(
        m.iter()
            .map(|s| match &s.cont {
                None => Term::Action(s.action.clone()),
                Some(c) => Term::seq(Term::Action(s.action.clone()), c.denote()),
            })
            .collect(),
    )
}

impl fmt::Display for CanonTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.denote())
    }
}

/// Canonical form of a closed pACP term.
pub fn normalize(t: &Term, ctx: &Context) -> Result<CanonTerm> {
    Normalizer { ctx }.go(t)
}

/// Checks that `t` is a proper basic term already: normalizing and denoting
/// gives it back up to the order of summands and branches.
pub fn is_proper_basic(t: &Term, ctx: &Context) -> Result<bool> {
    let c = normalize(t, ctx)?;
    Ok(normalize(&c.denote(), ctx)? == c && c.denote() == *t)
}

struct Normalizer<'a> {
    ctx: &'a Context,
}

impl Normalizer<'_> {
    fn go(&self, t: &Term) -> Result<CanonTerm> {
        Ok(match t {
            Term::Action(a) => CanonTerm::action(a.clone()),
            Term::Deadlock => CanonTerm::deadlock(),
            Term::Alt(l, r) => self.go(l)?.product(&self.go(r)?, |m, n| m.union(n).cloned().collect()),
            Term::Seq(l, r) => {
                let y = Arc::new(self.go(r)?);
                self.seq(&self.go(l)?, &y)
            }
            Term::PAlt(p, l, r) => {
                let (x, y) = (self.go(l)?, self.go(r)?);
                let rho = p.complement();
                CanonTerm::from_branches(
                    x.0.into_iter()
                        .map(|(m, q)| (m, p.mul(&q)))
                        .chain(y.0.into_iter().map(|(m, q)| (m, rho.mul(&q)))),
                )
            }
            Term::Par(l, r) => self.par(&self.go(l)?, &self.go(r)?),
            Term::LeftMerge(l, r) => {
                let (x, y) = (self.go(l)?, self.go(r)?);
                x.product(&y, |m, n| self.left_merge(m, n))
            }
            Term::CommMerge(l, r) => {
                let (x, y) = (self.go(l)?, self.go(r)?);
                x.product(&y, |m, n| self.comm_merge(m, n))
            }
            Term::Encap(h, x) => self.encap(h, &self.go(x)?),
            Term::Var(x) => return Err(Error::OpenTerm(x.to_string())),
            Term::Rec(..) => return Err(Error::Fragment("normalization needs a term without recursion constants".into())),
            Term::Si(_) | Term::Posm(..) => {
                return Err(Error::Fragment("normalization needs a term without strategic interleaving".into()));
            }
        })
    }

    /// `x·y`: δ absorbs, `a` becomes `a·y`, `a·t` becomes `a·(t·y)`.
    fn seq(&self, x: &CanonTerm, y: &Arc<CanonTerm>) -> CanonTerm {
        x.map_menus(|m| {
            m.iter()
                .map(|s| Summand {
                    action: s.action.clone(),
                    cont: Some(match &s.cont {
                        None => y.clone(),
                        Some(c) => Arc::new(self.seq(c, y)),
                    }),
                })
                .collect()
        })
    }

    /// Probabilistic choices distribute out of `∥`, then the expansion law
    /// applies to the resulting menus.
    fn par(&self, x: &CanonTerm, y: &CanonTerm) -> CanonTerm {
        x.product(y, |m, n| {
            let mut out = self.left_merge(m, n);
            out.extend(self.left_merge(n, m));
            out.extend(self.comm_merge(m, n));
            out
        })
    }

    fn left_merge(&self, m: &Menu, n: &Menu) -> Menu {
        let y = CanonTerm::menu(n.clone());
        let ya = Arc::new(y.clone());
        m.iter()
            .map(|s| Summand {
                action: s.action.clone(),
                cont: Some(match &s.cont {
                    None => ya.clone(),
                    Some(c) => Arc::new(self.par(c, &y)),
                }),
            })
            .collect()
    }

    fn comm_merge(&self, m: &Menu, n: &Menu) -> Menu {
        let mut out = Menu::new();
        for s in m {
            for u in n {
                let Some(c) = self.ctx.gamma(&s.action, &u.action) else {
                    continue;
                };
                let cont = match (&s.cont, &u.cont) {
                    (None, None) => None,
                    (Some(x), None) | (None, Some(x)) => Some(x.clone()),
                    (Some(x), Some(y)) => Some(Arc::new(self.par(x, y))),
                };
                out.insert(Summand { action: c.clone(), cont });
            }
        }
        out
    }

    fn encap(&self, h: &ActionSet, x: &CanonTerm) -> CanonTerm {
        x.map_menus(|m| {
            m.iter()
                .filter(|s| !h.contains(&s.action))
                .map(|s| Summand { action: s.action.clone(), cont: s.cont.as_ref().map(|c| Arc::new(self.encap(h, c))) })
                .collect()
        })
    }
}
