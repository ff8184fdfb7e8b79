//! Head normal forms: `⊞ᵢ[πᵢ](Σⱼ aᵢⱼ·tᵢⱼ + Σₖ bᵢₖ)` with arbitrary
//! continuations `tᵢⱼ`, computed by structural induction.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::context::{Context, DeadlockMode};
use crate::error::{Error, Result};
use crate::meadow::Rat;
use crate::semantics::unfold_constant;
use crate::strategy::{checked_sched, checked_update};
use crate::syntax::{Action, ActionSet, Interleaving, Name, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HSummand {
    pub action: Action,
    pub cont: Option<Term>,
}

pub type HMenu = BTreeSet<HSummand>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hnf(BTreeMap<HMenu, Rat>);

impl Hnf {
    fn menu(m: HMenu) -> Hnf {
        Hnf(BTreeMap::from([(m, Rat::one())]))
    }

    fn from_branches(branches: impl IntoIterator<Item = (HMenu, Rat)>) -> Hnf {
        let mut out: BTreeMap<HMenu, Rat> = BTreeMap::new();
        for (m, p) in branches {
            if p.is_zero() {
                continue;
            }
            let e = out.entry(m).or_insert_with(Rat::zero);
            *e = e.add(&p);
        }
        Hnf(out)
    }

    pub fn branches(&self) -> impl Iterator<Item = (&HMenu, &Rat)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_term(&self) -> Term {
        self.to_term_with(&mut |c| c.clone())
    }

    /// As [`Hnf::to_term`], with every continuation passed through `cont`.
    pub fn to_term_with(&self, cont: &mut dyn FnMut(&Term) -> Term) -> Term {
        Term::prob_sum(self.0.iter().map(|(m, p)| (p.clone(), menu_term_with(m, cont))).collect())
    }

    fn product(&self, other: &Hnf, f: impl Fn(&HMenu, &HMenu) -> HMenu) -> Hnf {
        Hnf::from_branches(
            self.0
                .iter()
                .flat_map(|(m, p)| other.0.iter().map(move |(n, q)| (m, p, n, q)))
                .map(|(m, p, n, q)| (f(m, n), p.mul(q))),
        )
    }

    fn map_menus(&self, f: impl Fn(&HMenu) -> HMenu) -> Hnf {
        Hnf::from_branches(self.0.iter().map(|(m, p)| (f(m), p.clone())))
    }
}

pub fn menu_term(m: &HMenu) -> Term {
    menu_term_with(m, &mut |c| c.clone())
}

fn menu_term_with(m: &HMenu, cont: &mut dyn FnMut(&Term) -> Term) -> Term {
    Term::sum(
        m.iter()
            .map(|s| match &s.cont {
                None => Term::Action(s.action.clone()),
                Some(c) => Term::seq(Term::Action(s.action.clone()), cont(c)),
            })
            .collect(),
    )
}

/// Replaces every recursion constant by its unfolding, `depth` times.
pub fn unfold(t: &Term, depth: usize) -> Result<Term> {
    let mut t = t.clone();
    for _ in 0..depth {
        let mut err = None;
        t = t.map_bottom_up(&mut |x| match &x {
            Term::Rec(v, e) => unfold_constant(v, e).unwrap_or_else(|e| {
                err.get_or_insert(e);
                x.clone()
            }),
            _ => x,
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(t)
}

pub fn head_normal_form(t: &Term, ctx: &Context) -> Result<Hnf> {
    Hnfs { ctx }.go(t, &mut Vec::new())
}

struct Hnfs<'a> {
    ctx: &'a Context,
}

/// A component after its probabilistic choice is resolved: the term that
/// stands for it and its single menu.
type Resolved = (Term, HMenu);

impl Hnfs<'_> {
    fn go(&self, t: &Term, stack: &mut Vec<(Name, Name)>) -> Result<Hnf> {
        Ok(match t {
            Term::Action(a) => Hnf::menu(HMenu::from([HSummand { action: a.clone(), cont: None }])),
            Term::Deadlock => Hnf::menu(HMenu::new()),
            Term::Var(x) => return Err(Error::OpenTerm(x.to_string())),
            Term::Alt(l, r) => self.go(l, stack)?.product(&self.go(r, stack)?, |m, n| m.union(n).cloned().collect()),
            Term::Seq(l, r) => seq(&self.go(l, stack)?, r),
            Term::PAlt(p, l, r) => {
                let (x, y) = (self.go(l, stack)?, self.go(r, stack)?);
                let rho = p.complement();
                Hnf::from_branches(
                    x.0.into_iter()
                        .map(|(m, q)| (m, p.mul(&q)))
                        .chain(y.0.into_iter().map(|(m, q)| (m, rho.mul(&q)))),
                )
            }
            Term::Par(l, r) => {
                let (x, y) = (self.go(l, stack)?, self.go(r, stack)?);
                let (sl, sr) = (x.len() == 1, y.len() == 1);
                x.product(&y, |m, n| {
                    let tm = if sl { (**l).clone() } else { menu_term(m) };
                    let tn = if sr { (**r).clone() } else { menu_term(n) };
                    let mut out = left_merge(m, &tn);
                    out.extend(left_merge(n, &tm));
                    out.extend(self.comm_merge(m, n));
                    out
                })
            }
            Term::LeftMerge(l, r) => {
                let (x, y) = (self.go(l, stack)?, self.go(r, stack)?);
                let sr = y.len() == 1;
                x.product(&y, |m, n| left_merge(m, &if sr { (**r).clone() } else { menu_term(n) }))
            }
            Term::CommMerge(l, r) => {
                let (x, y) = (self.go(l, stack)?, self.go(r, stack)?);
                x.product(&y, |m, n| self.comm_merge(m, n))
            }
            Term::Encap(h, x) => encap(h, &self.go(x, stack)?),
            Term::Rec(x, e) => {
                if stack.iter().any(|(y, f)| y == x && f == e.name()) {
                    return Err(Error::Unguarded(format!("<{x}|{}> reached itself without an action", e.name())));
                }
                stack.push((x.clone(), e.name().clone()));
                let out = self.go(&unfold_constant(x, e)?, stack)?;
                stack.pop();
                out
            }
            Term::Si(n) => {
                self.check(n)?;
                let comps = self.resolve_all(n, stack)?;
                let st = &*n.strategy.strategy;
                let mut out = Vec::new();
                let sigma = checked_sched(st, n.arity(), &n.history, &n.state)?;
                for (procs, p) in comps {
                    match &sigma {
                        None => out.push((HMenu::new(), p)),
                        Some(sigma) => {
                            for (i, w) in sigma.iter().enumerate() {
                                if w.is_zero() {
                                    continue;
                                }
                                for (m, q) in self.posm_branches(i + 1, n, &procs, stack)? {
                                    out.push((m, w.mul(&p).mul(&q)));
                                }
                            }
                        }
                    }
                }
                Hnf::from_branches(out)
            }
            Term::Posm(i, n) => {
                self.check(n)?;
                let mut out = Vec::new();
                for (procs, p) in self.resolve_all(n, stack)? {
                    for (m, q) in self.posm_branches(*i, n, &procs, stack)? {
                        out.push((m, p.mul(&q)));
                    }
                }
                Hnf::from_branches(out)
            }
        })
    }

    fn check(&self, n: &Interleaving) -> Result<()> {
        if n.procs.is_empty() {
            return Err(Error::Contract("interleaving of no processes".into()));
        }
        if !n.history.admissible(n.arity()) {
            return Err(Error::Contract(format!("history {} is not valid for {} processes", n.history, n.arity())));
        }
        Ok(())
    }

    /// Distributes the probabilistic choices of all components outwards.
    /// A component that is not initially probabilistic is kept as it is.
    fn resolve_all(&self, n: &Interleaving, stack: &mut Vec<(Name, Name)>) -> Result<Vec<(Vec<Resolved>, Rat)>> {
        let mut acc: Vec<(Vec<Resolved>, Rat)> = vec![(Vec::new(), Rat::one())];
        for x in &n.procs {
            let h = self.go(x, stack)?;
            let options: Vec<(Resolved, Rat)> = if h.len() == 1 {
                let m = h.0.into_keys().next().unwrap();
                vec![((x.clone(), m), Rat::one())]
            } else {
                h.0.into_iter().map(|(m, p)| ((menu_term(&m), m), p)).collect()
            };
            let mut next = Vec::with_capacity(acc.len() * options.len());
            for (rs, p) in &acc {
                for (r, q) in &options {
                    let mut rs = rs.clone();
                    rs.push(r.clone());
                    next.push((rs, p.mul(q)));
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    /// Head normal form of `posm_i` over components that are not initially
    /// probabilistic. Only the deferred-deadlock case can give more than
    /// one branch.
    fn posm_branches(
        &self,
        i: usize,
        n: &Interleaving,
        procs: &[Resolved],
        stack: &mut Vec<(Name, Name)>,
    ) -> Result<Vec<(HMenu, Rat)>> {
        let count = procs.len();
        let st = &*n.strategy.strategy;
        let terms: Vec<Term> = procs.iter().map(|(t, _)| t.clone()).collect();
        let si = |history, state, procs| Term::si(n.strategy.clone(), history, state, procs);
        let own = &procs[i - 1].1;
        if own.is_empty() {
            if self.ctx.deadlock_mode == DeadlockMode::Immediate || count == 1 {
                return Ok(vec![(HMenu::new(), Rat::one())]);
            }
            let mut rest = terms.clone();
            rest.remove(i - 1);
            let state = checked_update(st, count, &n.history, &n.state, i, None, false)?;
            let next = si(n.history.appended(i, count - 1), state, rest);
            let h = seq(&self.go(&next, stack)?, &Arc::new(Term::Deadlock));
            return Ok(h.0.into_iter().collect());
        }
        let mut out = HMenu::new();
        for s in own {
            match (&s.action, &s.cont) {
                (Action::Pcr(d), cont) => {
                    let body = self.ctx.creation_body(d)?.clone();
                    let mut rest = terms.clone();
                    let (pairs, terminated) = match cont {
                        None => {
                            rest.remove(i - 1);
                            (count, true)
                        }
                        Some(x) => {
                            rest[i - 1] = x.clone();
                            (count + 1, false)
                        }
                    };
                    rest.push(body);
                    let state = checked_update(st, count, &n.history, &n.state, i, Some(&s.action), terminated)?;
                    out.insert(HSummand {
                        action: Action::Rcr(d.clone()),
                        cont: Some(si(n.history.appended(i, pairs), state, rest)),
                    });
                }
                (Action::Rcr(_), _) => {}
                (a, None) => {
                    if count == 1 {
                        out.insert(HSummand { action: a.clone(), cont: None });
                    } else {
                        let mut rest = terms.clone();
                        rest.remove(i - 1);
                        let state = checked_update(st, count, &n.history, &n.state, i, Some(a), true)?;
                        out.insert(HSummand {
                            action: a.clone(),
                            cont: Some(si(n.history.appended(i, count - 1), state, rest)),
                        });
                    }
                }
                (a, Some(x)) => {
                    let mut rest = terms.clone();
                    rest[i - 1] = x.clone();
                    let state = checked_update(st, count, &n.history, &n.state, i, Some(a), false)?;
                    out.insert(HSummand { action: a.clone(), cont: Some(si(n.history.appended(i, count), state, rest)) });
                }
            }
        }
        Ok(vec![(out, Rat::one())])
    }

    fn comm_merge(&self, m: &HMenu, n: &HMenu) -> HMenu {
        let mut out = HMenu::new();
        for s in m {
            for u in n {
                let Some(c) = self.ctx.gamma(&s.action, &u.action) else {
                    continue;
                };
                let cont = match (&s.cont, &u.cont) {
                    (None, None) => None,
                    (Some(x), None) | (None, Some(x)) => Some(x.clone()),
                    (Some(x), Some(y)) => Some(Term::par(x.clone(), y.clone())),
                };
                out.insert(HSummand { action: c.clone(), cont });
            }
        }
        out
    }
}

fn seq(x: &Hnf, y: &Arc<Term>) -> Hnf {
    x.map_menus(|m| {
        m.iter()
            .map(|s| HSummand {
                action: s.action.clone(),
                cont: Some(match &s.cont {
                    None => (**y).clone(),
                    Some(c) => Term::Seq(Arc::new(c.clone()), y.clone()),
                }),
            })
            .collect()
    })
}

fn left_merge(m: &HMenu, y: &Term) -> HMenu {
    m.iter()
        .map(|s| HSummand {
            action: s.action.clone(),
            cont: Some(match &s.cont {
                None => y.clone(),
                Some(c) => Term::par(c.clone(), y.clone()),
            }),
        })
        .collect()
}

fn encap(h: &ActionSet, x: &Hnf) -> Hnf {
    x.map_menus(|m| {
        m.iter()
            .filter(|s| !h.contains(&s.action))
            .map(|s| HSummand {
                action: s.action.clone(),
                cont: s.cont.as_ref().map(|c| Term::Encap(h.clone(), Arc::new(c.clone()))),
            })
            .collect()
    })
}
