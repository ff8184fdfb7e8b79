//! Repeated head-normal-form expansion with memoized continuations. Drives
//! both the elimination of strategic interleaving and the reduction of
//! recursive specifications to the basic theory.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::hnf::head_normal_form;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::semantics::abstract_histories;
use crate::syntax::{Name, RecSpec, SpecRef, Term, name};

/// Whether `t` mentions strategic interleaving, directly or through the
/// equations of a recursion constant it uses.
fn involves_si(t: &Term, seen: &mut BTreeSet<Name>) -> bool {
    match t {
        Term::Si(_) | Term::Posm(..) => true,
        Term::Rec(_, e) => {
            if !seen.insert(e.name().clone()) {
                return false;
            }
            e.spec().equations.values().any(|b| involves_si(b, seen))
        }
        _ => t.children().into_iter().any(|c| involves_si(c, seen)),
    }
}

struct Expander<'a> {
    ctx: &'a Context,
    /// Every continuation gets a variable, not only those with interleaving.
    all: bool,
    prefix: String,
    cap: usize,
    what: &'static str,
    index: HashMap<Term, Name>,
    order: Vec<Name>,
    bodies: BTreeMap<Name, Term>,
    work: VecDeque<(Name, Term)>,
}

impl Expander<'_> {
    fn var(&mut self, t: &Term) -> Result<Name> {
        let t = abstract_histories(t);
        if let Some(x) = self.index.get(&t) {
            return Ok(x.clone());
        }
        if self.index.len() >= self.cap {
            return Err(Error::CapExceeded { what: self.what, limit: self.cap });
        }
        let x = name(&format!("{}{}", self.prefix, self.index.len()));
        log::debug!("{x} := {t}");
        self.index.insert(t.clone(), x.clone());
        self.order.push(x.clone());
        self.work.push_back((x.clone(), t));
        Ok(x)
    }

    fn run(&mut self) -> Result<()> {
        while let Some((x, t)) = self.work.pop_front() {
            let h = head_normal_form(&t, self.ctx)?;
            let mut err = None;
            let body = h.to_term_with(&mut |c| {
                if !self.all && !involves_si(c, &mut BTreeSet::new()) {
                    return c.clone();
                }
                match self.var(c) {
                    Ok(y) => Term::Var(y),
                    Err(e) => {
                        err.get_or_insert(e);
                        Term::Deadlock
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            self.bodies.insert(x, body);
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Elimination {
    pub term: Term,
    /// Equations for the configurations that recur; `None` if none do.
    pub spec: Option<SpecRef>,
}

/// Rewrites `t` into a term without strategic interleaving. Configurations
/// that recur become variables of a fresh specification; all others are
/// inlined.
pub fn eliminate_si(t: &Term, ctx: &Context, max_states: usize) -> Result<Elimination> {
    if !involves_si(t, &mut BTreeSet::new()) {
        return Ok(Elimination { term: t.clone(), spec: None });
    }
    let mut ex = Expander {
        ctx,
        all: false,
        prefix: "S".into(),
        cap: max_states,
        what: "interleaving configuration",
        index: HashMap::new(),
        order: Vec::new(),
        bodies: BTreeMap::new(),
        work: VecDeque::new(),
    };
    let root = ex.var(t)?;
    ex.run()?;

    let deps: BTreeMap<Name, BTreeSet<Name>> = ex.bodies.iter().map(|(x, b)| (x.clone(), b.free_vars())).collect();
    let cyclic: BTreeSet<Name> = deps.keys().filter(|x| reaches(&deps, x, x)).cloned().collect();

    let mut inlined: BTreeMap<Name, Term> = BTreeMap::new();
    // Reverse creation order visits dependencies first in the acyclic part.
    for x in ex.order.iter().rev() {
        if cyclic.contains(x) {
            continue;
        }
        let body = inline(&ex.bodies[x], &cyclic, &inlined, &ex.bodies, &deps);
        inlined.insert(x.clone(), body);
    }
    let spec = (!cyclic.is_empty()).then(|| {
        let eqs = cyclic
            .iter()
            .map(|x| (x.clone(), inline(&ex.bodies[x], &cyclic, &inlined, &ex.bodies, &deps)))
            .collect();
        SpecRef::new(RecSpec::new("si_free", eqs))
    });
    let term = match &spec {
        Some(e) if cyclic.contains(&root) => Term::Rec(root, e.clone()),
        Some(e) => inlined[&root].close_over(e),
        None => inlined[&root].clone(),
    };
    Ok(Elimination { term, spec })
}

fn reaches(deps: &BTreeMap<Name, BTreeSet<Name>>, from: &Name, to: &Name) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&Name> = deps[from].iter().collect();
    while let Some(y) = stack.pop() {
        if y == to {
            return true;
        }
        if seen.insert(y) {
            stack.extend(deps[y].iter());
        }
    }
    false
}

fn inline(
    body: &Term,
    cyclic: &BTreeSet<Name>,
    inlined: &BTreeMap<Name, Term>,
    bodies: &BTreeMap<Name, Term>,
    deps: &BTreeMap<Name, BTreeSet<Name>>,
) -> Term {
    body.substitute(&|y| {
        if cyclic.contains(y) {
            None
        } else {
            Some(
                inlined
                    .get(y)
                    .cloned()
                    .unwrap_or_else(|| inline(&bodies[y], cyclic, inlined, bodies, deps)),
            )
        }
    })
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub spec: RecSpec,
    pub root: Name,
}

/// Worklist reduction of `⟨x|E⟩` to a specification over the basic theory:
/// each popped term is brought to head normal form and its continuations
/// are assigned variables, reusing the variable of any continuation seen
/// before. Fails once more than `max_equations` equations are needed.
pub fn reduce_recursion(spec: &SpecRef, x: &str, max_equations: usize, ctx: &Context) -> Result<Reduction> {
    if spec.spec().rhs(x).is_none() {
        return Err(Error::Config(format!("spec `{}` has no variable `{x}`", spec.name())));
    }
    let mut ex = Expander {
        ctx,
        all: true,
        prefix: format!("{x}_"),
        cap: max_equations,
        what: "equation",
        index: HashMap::new(),
        order: Vec::new(),
        bodies: BTreeMap::new(),
        work: VecDeque::new(),
    };
    let root = ex.var(&Term::Rec(name(x), spec.clone()))?;
    ex.run()?;
    Ok(Reduction { spec: RecSpec::new(&format!("{}_reduced", spec.name()), ex.bodies), root })
}
