//! Structural operational semantics: probabilistic steps (as distributions),
//! action steps and termination, and reachable transition systems.

mod pts;

pub use pts::{Pts, PtsOptions, StepEdge, abstract_histories, build_pts, build_pts_joint, build_pts_shuffled};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::context::{Context, DeadlockMode};
use crate::error::{Error, Result};
use crate::meadow::Rat;
use crate::strategy::{checked_sched, checked_update};
use crate::syntax::{Action, Interleaving, Name, Term};

/// Finitely supported distribution over closed terms. Only positive entries
/// are stored; absence encodes probability zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution(BTreeMap<Term, Rat>);

impl Distribution {
    pub fn point(t: Term) -> Distribution {
        Distribution(BTreeMap::from([(t, Rat::one())]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Rat)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prob(&self, t: &Term) -> Rat {
        self.0.get(t).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn total(&self) -> Rat {
        Rat::sum(self.0.values())
    }

    /// The single support element of a point mass.
    pub fn as_point(&self) -> Option<&Term> {
        match self.0.iter().next() {
            Some((t, p)) if self.0.len() == 1 && p.is_one() => Some(t),
            _ => None,
        }
    }

    pub fn into_map(self) -> BTreeMap<Term, Rat> {
        self.0
    }

    fn map(self, f: impl Fn(Term) -> Term) -> Distribution {
        let mut out = BTreeMap::new();
        for (t, p) in self.0 {
            let prev = out.insert(f(t), p);
            debug_assert!(prev.is_none(), "distinct premises reached one target");
        }
        Distribution(out)
    }

    /// Product pairing: every pair of support elements combined by `f`.
    fn product(self, other: &Distribution, f: impl Fn(&Term, &Term) -> Term) -> Distribution {
        let mut out = BTreeMap::new();
        for (x, p) in &self.0 {
            for (y, q) in &other.0 {
                let prev = out.insert(f(x, y), p.mul(q));
                debug_assert!(prev.is_none(), "distinct premises reached one target");
            }
        }
        Distribution(out)
    }

    /// `π·self + (1−π)·other`, merged per target, zero entries dropped.
    fn mixture(self, pi: &Rat, other: Distribution) -> Distribution {
        let mut out: BTreeMap<Term, Rat> = BTreeMap::new();
        let rho = pi.complement();
        for (t, p) in self.0 {
            let w = pi.mul(&p);
            if !w.is_zero() {
                out.insert(t, w);
            }
        }
        for (t, p) in other.0 {
            let w = rho.mul(&p);
            if w.is_zero() {
                continue;
            }
            let e = out.entry(t).or_insert_with(Rat::zero);
            *e = e.add(&w);
        }
        Distribution(out)
    }
}

/// Result of an action step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Terminate,
    Next(Term),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub action: Action,
    pub outcome: Outcome,
}

impl Step {
    fn new(action: Action, outcome: Outcome) -> Step {
        Step { action, outcome }
    }
}

/// Recursion constants being unfolded; a repeat means unguarded recursion.
type Unfolding = Vec<(Name, Name)>;

fn enter(stack: &mut Unfolding, x: &Name, e: &Name) -> Result<()> {
    if stack.iter().any(|(y, f)| y == x && f == e) {
        return Err(Error::Unguarded(format!("<{x}|{e}> reached itself without performing an action")));
    }
    stack.push((x.clone(), e.clone()));
    Ok(())
}

/// One unfolding of a recursion constant: `⟨X|E⟩ ↦ ⟨t|E⟩`.
pub fn unfold_constant(x: &Name, spec: &crate::syntax::SpecRef) -> Result<Term> {
    spec.spec()
        .rhs(x)
        .map(|t| t.close_over(spec))
        .ok_or_else(|| Error::Config(format!("spec `{}` has no variable `{x}`", spec.name())))
}

/// The probabilistic-step distribution of a closed term.
pub fn dist(t: &Term, ctx: &Context) -> Result<Distribution> {
    dist_in(t, ctx, &mut Vec::new())
}

fn dist_in(t: &Term, ctx: &Context, stack: &mut Unfolding) -> Result<Distribution> {
    Ok(match t {
        Term::Action(_) | Term::Deadlock => Distribution::point(t.clone()),
        Term::Var(x) => return Err(Error::OpenTerm(x.to_string())),
        Term::Alt(l, r) => dist_in(l, ctx, stack)?.product(&dist_in(r, ctx, stack)?, |x, y| Term::alt(x.clone(), y.clone())),
        Term::Par(l, r) => dist_in(l, ctx, stack)?.product(&dist_in(r, ctx, stack)?, |x, y| Term::par(x.clone(), y.clone())),
        Term::LeftMerge(l, r) => {
            dist_in(l, ctx, stack)?.product(&dist_in(r, ctx, stack)?, |x, y| Term::left_merge(x.clone(), y.clone()))
        }
        Term::CommMerge(l, r) => {
            dist_in(l, ctx, stack)?.product(&dist_in(r, ctx, stack)?, |x, y| Term::comm_merge(x.clone(), y.clone()))
        }
        Term::Seq(l, r) => dist_in(l, ctx, stack)?.map(|x| Term::Seq(Arc::new(x), r.clone())),
        Term::PAlt(p, l, r) => {
            let dl = dist_in(l, ctx, stack)?;
            let dr = dist_in(r, ctx, stack)?;
            dl.mixture(p, dr)
        }
        Term::Encap(h, x) => dist_in(x, ctx, stack)?.map(|y| Term::Encap(h.clone(), Arc::new(y))),
        Term::Rec(x, e) => {
            enter(stack, x, e.name())?;
            let d = dist_in(&unfold_constant(x, e)?, ctx, stack)?;
            stack.pop();
            // A constant whose unfolding is not initially probabilistic
            // behaves as itself.
            if d.as_point().is_some() { Distribution::point(t.clone()) } else { d }
        }
        Term::Si(n) => {
            check_interleaving(n, ctx)?;
            let count = n.arity();
            let Some(sigma) = checked_sched(&*n.strategy.strategy, count, &n.history, &n.state)? else {
                return Ok(Distribution::point(Term::Deadlock));
            };
            let comps = component_dists(n, ctx, stack)?;
            let mut out = BTreeMap::new();
            for (i, w) in sigma.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for (procs, p) in combinations(&comps) {
                    let target = Term::Posm(i + 1, Arc::new(Interleaving { procs, ..(**n).clone() }));
                    let prev = out.insert(target, w.mul(&p));
                    debug_assert!(prev.is_none(), "distinct premises reached one target");
                }
            }
            Distribution(out)
        }
        Term::Posm(i, n) => {
            check_interleaving(n, ctx)?;
            let comps = component_dists(n, ctx, stack)?;
            let mut out = BTreeMap::new();
            for (procs, p) in combinations(&comps) {
                out.insert(Term::Posm(*i, Arc::new(Interleaving { procs, ..(**n).clone() })), p);
            }
            Distribution(out)
        }
    })
}

fn check_interleaving(n: &Interleaving, ctx: &Context) -> Result<()> {
    if ctx.deadlock_mode == DeadlockMode::Deferred {
        return Err(Error::Unsupported(
            "the operational semantics covers immediate deadlock mode only".into(),
        ));
    }
    if n.procs.is_empty() {
        return Err(Error::Contract("interleaving of no processes".into()));
    }
    if !n.history.admissible(n.arity()) {
        return Err(Error::Contract(format!("history {} is not valid for {} processes", n.history, n.arity())));
    }
    Ok(())
}

fn component_dists(n: &Interleaving, ctx: &Context, stack: &mut Unfolding) -> Result<Vec<Vec<(Term, Rat)>>> {
    n.procs
        .iter()
        .map(|p| Ok(dist_in(p, ctx, stack)?.into_map().into_iter().collect()))
        .collect()
}

/// All ways to pick one support element per component, with product weights.
fn combinations(comps: &[Vec<(Term, Rat)>]) -> Vec<(Vec<Term>, Rat)> {
    let mut acc: Vec<(Vec<Term>, Rat)> = vec![(Vec::new(), Rat::one())];
    for c in comps {
        let mut next = Vec::with_capacity(acc.len() * c.len());
        for (ts, p) in &acc {
            for (t, q) in c {
                let mut ts = ts.clone();
                ts.push(t.clone());
                next.push((ts, p.mul(q)));
            }
        }
        acc = next;
    }
    acc
}

/// A term is static when it behaves as itself with probability one.
pub fn is_static(t: &Term, ctx: &Context) -> Result<bool> {
    Ok(dist(t, ctx)?.as_point() == Some(t))
}

/// Action steps of a static term.
pub fn steps(t: &Term, ctx: &Context) -> Result<BTreeSet<Step>> {
    let mut out = BTreeSet::new();
    steps_in(t, ctx, &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn steps_in(t: &Term, ctx: &Context, stack: &mut Unfolding, out: &mut BTreeSet<Step>) -> Result<()> {
    let sub = |x: &Term, stack: &mut Unfolding| -> Result<BTreeSet<Step>> {
        let mut o = BTreeSet::new();
        steps_in(x, ctx, stack, &mut o)?;
        Ok(o)
    };
    match t {
        Term::Action(a) => {
            out.insert(Step::new(a.clone(), Outcome::Terminate));
        }
        Term::Deadlock => {}
        Term::Var(x) => return Err(Error::OpenTerm(x.to_string())),
        Term::PAlt(..) | Term::Si(_) => {
            return Err(Error::Contract(format!("action steps queried on non-static term {t}")));
        }
        Term::Alt(l, r) => {
            out.extend(sub(l, stack)?);
            out.extend(sub(r, stack)?);
        }
        Term::Seq(l, r) => {
            for s in sub(l, stack)? {
                let next = match s.outcome {
                    Outcome::Terminate => (**r).clone(),
                    Outcome::Next(x) => Term::Seq(Arc::new(x), r.clone()),
                };
                out.insert(Step::new(s.action, Outcome::Next(next)));
            }
        }
        Term::Par(l, r) => {
            let sl = sub(l, stack)?;
            let sr = sub(r, stack)?;
            for s in &sl {
                let next = match &s.outcome {
                    Outcome::Terminate => (**r).clone(),
                    Outcome::Next(x) => Term::Par(Arc::new(x.clone()), r.clone()),
                };
                out.insert(Step::new(s.action.clone(), Outcome::Next(next)));
            }
            for s in &sr {
                let next = match &s.outcome {
                    Outcome::Terminate => (**l).clone(),
                    Outcome::Next(y) => Term::Par(l.clone(), Arc::new(y.clone())),
                };
                out.insert(Step::new(s.action.clone(), Outcome::Next(next)));
            }
            communications(&sl, &sr, ctx, out);
        }
        Term::LeftMerge(l, r) => {
            for s in sub(l, stack)? {
                let next = match s.outcome {
                    Outcome::Terminate => (**r).clone(),
                    Outcome::Next(x) => Term::Par(Arc::new(x), r.clone()),
                };
                out.insert(Step::new(s.action, Outcome::Next(next)));
            }
        }
        Term::CommMerge(l, r) => {
            let sl = sub(l, stack)?;
            let sr = sub(r, stack)?;
            communications(&sl, &sr, ctx, out);
        }
        Term::Encap(h, x) => {
            for s in sub(x, stack)? {
                if h.contains(&s.action) {
                    continue;
                }
                let outcome = match s.outcome {
                    Outcome::Terminate => Outcome::Terminate,
                    Outcome::Next(y) => Outcome::Next(Term::Encap(h.clone(), Arc::new(y))),
                };
                out.insert(Step::new(s.action, outcome));
            }
        }
        Term::Rec(x, e) => {
            enter(stack, x, e.name())?;
            let u = unfold_constant(x, e)?;
            let d = dist_in(&u, ctx, stack)?;
            let Some(v) = d.as_point() else {
                return Err(Error::Contract(format!("action steps queried on non-static term {t}")));
            };
            let v = v.clone();
            steps_in(&v, ctx, stack, out)?;
            stack.pop();
        }
        Term::Posm(i, n) => posm_steps(*i, n, ctx, stack, out)?,
    }
    Ok(())
}

fn communications(sl: &BTreeSet<Step>, sr: &BTreeSet<Step>, ctx: &Context, out: &mut BTreeSet<Step>) {
    if ctx.comm.is_empty() {
        return;
    }
    for s in sl {
        for u in sr {
            let Some(c) = ctx.gamma(&s.action, &u.action) else {
                continue;
            };
            let outcome = match (&s.outcome, &u.outcome) {
                (Outcome::Terminate, Outcome::Terminate) => Outcome::Terminate,
                (Outcome::Terminate, Outcome::Next(y)) => Outcome::Next(y.clone()),
                (Outcome::Next(x), Outcome::Terminate) => Outcome::Next(x.clone()),
                (Outcome::Next(x), Outcome::Next(y)) => Outcome::Next(Term::par(x.clone(), y.clone())),
            };
            out.insert(Step::new(c.clone(), outcome));
        }
    }
}

fn posm_steps(i: usize, n: &Interleaving, ctx: &Context, stack: &mut Unfolding, out: &mut BTreeSet<Step>) -> Result<()> {
    check_interleaving(n, ctx)?;
    let count = n.arity();
    let st = &*n.strategy.strategy;
    let mut own = BTreeSet::new();
    steps_in(&n.procs[i - 1], ctx, stack, &mut own)?;
    let si = |history, state, procs| Term::si(n.strategy.clone(), history, state, procs);
    for s in own {
        match (&s.action, s.outcome) {
            (Action::Pcr(d), outcome) => {
                let body = ctx.creation_body(d)?.clone();
                let mut procs = n.procs.clone();
                let (pair_count, terminated) = match outcome {
                    Outcome::Terminate => {
                        procs.remove(i - 1);
                        (count, true)
                    }
                    Outcome::Next(x) => {
                        procs[i - 1] = x;
                        (count + 1, false)
                    }
                };
                procs.push(body);
                let state = checked_update(st, count, &n.history, &n.state, i, Some(&s.action), terminated)?;
                let next = si(n.history.appended(i, pair_count), state, procs);
                out.insert(Step::new(Action::Rcr(d.clone()), Outcome::Next(next)));
            }
            // No rule lets a component perform a creation act itself.
            (Action::Rcr(_), _) => {}
            (a, Outcome::Terminate) => {
                if count == 1 {
                    out.insert(Step::new(a.clone(), Outcome::Terminate));
                } else {
                    let mut procs = n.procs.clone();
                    procs.remove(i - 1);
                    let state = checked_update(st, count, &n.history, &n.state, i, Some(a), true)?;
                    let next = si(n.history.appended(i, count - 1), state, procs);
                    out.insert(Step::new(a.clone(), Outcome::Next(next)));
                }
            }
            (a, Outcome::Next(x)) => {
                let mut procs = n.procs.clone();
                procs[i - 1] = x;
                let state = checked_update(st, count, &n.history, &n.state, i, Some(a), false)?;
                let next = si(n.history.appended(i, count), state, procs);
                out.insert(Step::new(a.clone(), Outcome::Next(next)));
            }
        }
    }
    Ok(())
}
