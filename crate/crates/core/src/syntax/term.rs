use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::meadow::Rat;
use crate::strategy::Strategy;

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// An action from the alphabet. Deadlock is not an action; see [`Term::Deadlock`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Plain(Name),
    /// Process creation request `pcr(d)`.
    Pcr(Name),
    /// Process creation act `rcr(d)`.
    Rcr(Name),
    /// Control action, e.g. `P(r)` of the semaphore strategy.
    Control { op: Name, arg: Option<Name> },
    /// Barred trace of a control action, written `~P(r)`.
    ControlTrace { op: Name, arg: Option<Name> },
}

impl Action {
    pub fn plain(s: &str) -> Action {
        Action::Plain(name(s))
    }

    pub fn control(op: &str, arg: Option<&str>) -> Action {
        Action::Control { op: name(op), arg: arg.map(name) }
    }

    pub fn is_creation(&self) -> bool {
        matches!(self, Action::Pcr(_) | Action::Rcr(_))
    }

    /// The barred copy of a control action.
    pub fn barred(&self) -> Option<Action> {
        match self {
            Action::Control { op, arg } => Some(Action::ControlTrace { op: op.clone(), arg: arg.clone() }),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let call = |f: &mut fmt::Formatter<'_>, op: &str, arg: &Option<Name>| match arg {
            Some(a) => write!(f, "{op}({a})"),
            None => write!(f, "{op}"),
        };
        match self {
            Action::Plain(a) => write!(f, "{a}"),
            Action::Pcr(d) => write!(f, "pcr({d})"),
            Action::Rcr(d) => write!(f, "rcr({d})"),
            Action::Control { op, arg } => call(f, op, arg),
            Action::ControlTrace { op, arg } => {
                write!(f, "~")?;
                call(f, op, arg)
            }
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Interleaving history: pairs `(turn, count)`, meaning process `turn` had the
/// step and afterwards `count` processes remained.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History(Vec<(usize, usize)>);

impl History {
    pub fn empty() -> History {
        History(Vec::new())
    }

    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> History {
        History(pairs)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn last(&self) -> Option<(usize, usize)> {
        self.0.last().copied()
    }

    pub fn appended(&self, turn: usize, count: usize) -> History {
        let mut pairs = Vec::with_capacity(self.0.len() + 1);
        pairs.extend_from_slice(&self.0);
        pairs.push((turn, count));
        History(pairs)
    }

    /// Membership in `Hist_n` by the three inductive rules, read literally:
    /// the empty history is in every `Hist_n`; `⟨i,n⟩ ∈ Hist_n` if `i ≤ n`;
    /// `h⌢⟨i,n⟩⌢⟨j,m⟩ ∈ Hist_m` if `h⌢⟨i,n⟩ ∈ Hist_n`, `j ≤ n` and `n−1 ≤ m ≤ n+1`.
    pub fn in_hist(&self, n: usize) -> bool {
        self.check(n, 0)
    }

    /// Like [`History::in_hist`], but the first pair may name the process that
    /// just terminated (`i ≤ n + 1`). The interleaving rules produce such
    /// histories whenever the last of `n + 1` processes finishes first.
    pub fn admissible(&self, n: usize) -> bool {
        self.check(n, 1)
    }

    fn check(&self, n: usize, first_slack: usize) -> bool {
        let Some(&(_, last)) = self.0.last() else {
            return true;
        };
        if last != n {
            return false;
        }
        let (i0, n0) = self.0[0];
        if i0 == 0 || n0 == 0 || i0 > n0 + first_slack {
            return false;
        }
        self.0.windows(2).all(|w| {
            let (_, n) = w[0];
            let (j, m) = w[1];
            j >= 1 && j <= n && m + 1 >= n && m <= n + 1 && m >= 1
        })
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (k, (i, n)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({i},{n})")?;
        }
        write!(f, ">")
    }
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Strategy-owned control state.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlState {
    /// The single state of strategies that keep no data.
    Unit,
    /// Named first-in-first-out queues of process indices. The semaphore
    /// strategy keys this by semaphore; an absent key means the semaphore is free.
    Queues(BTreeMap<Name, Vec<usize>>),
}

impl ControlState {
    pub fn empty_queues() -> ControlState {
        ControlState::Queues(BTreeMap::new())
    }
}

impl fmt::Display for ControlState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlState::Unit => write!(f, "()"),
            ControlState::Queues(m) => {
                write!(f, "{{")?;
                for (k, (r, q)) in m.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{r}: [")?;
                    for (j, x) in q.iter().enumerate() {
                        if j > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{x}")?;
                    }
                    write!(f, "]")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl fmt::Debug for ControlState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A recursive specification `{X = t, ...}` registered under a name.
#[derive(Clone, Debug)]
pub struct RecSpec {
    pub name: Name,
    pub equations: BTreeMap<Name, Term>,
}

impl RecSpec {
    pub fn new(name: &str, equations: BTreeMap<Name, Term>) -> RecSpec {
        RecSpec { name: self::name(name), equations }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Name> {
        self.equations.keys()
    }

    pub fn rhs(&self, var: &str) -> Option<&Term> {
        self.equations.get(var)
    }
}

impl fmt::Display for RecSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "spec {} {{", self.name)?;
        for (x, t) in &self.equations {
            writeln!(f, "  {x} = {t};")?;
        }
        write!(f, "}}")
    }
}

/// Reference to a registered specification. Identity is the spec name.
#[derive(Clone)]
pub struct SpecRef(pub Arc<RecSpec>);

impl SpecRef {
    pub fn new(spec: RecSpec) -> SpecRef {
        SpecRef(Arc::new(spec))
    }

    pub fn name(&self) -> &Name {
        &self.0.name
    }

    pub fn spec(&self) -> &RecSpec {
        &self.0
    }
}

impl fmt::Debug for SpecRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpecRef({})", self.0.name)
    }
}

impl PartialEq for SpecRef {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name
    }
}
impl Eq for SpecRef {}
impl Hash for SpecRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.name.hash(state)
    }
}
impl PartialOrd for SpecRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SpecRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.name.cmp(&other.0.name)
    }
}

/// Reference to a registered interleaving strategy. Identity is the name.
#[derive(Clone)]
pub struct StrategyRef {
    pub name: Name,
    pub strategy: Arc<dyn Strategy>,
}

impl StrategyRef {
    pub fn new(name: &str, strategy: Arc<dyn Strategy>) -> StrategyRef {
        StrategyRef { name: self::name(name), strategy }
    }
}

impl PartialEq for StrategyRef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}
impl Eq for StrategyRef {}
impl Hash for StrategyRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state)
    }
}
impl PartialOrd for StrategyRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for StrategyRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name.cmp(&other.name)
    }
}

/// Payload shared by the strategic interleaving operator and its positional variant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interleaving {
    pub strategy: StrategyRef,
    pub history: History,
    pub state: ControlState,
    pub procs: Vec<Term>,
}

impl Interleaving {
    pub fn arity(&self) -> usize {
        self.procs.len()
    }
}

pub type ActionSet = Arc<BTreeSet<Action>>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Action(Action),
    Deadlock,
    Alt(Arc<Term>, Arc<Term>),
    Seq(Arc<Term>, Arc<Term>),
    PAlt(Rat, Arc<Term>, Arc<Term>),
    Par(Arc<Term>, Arc<Term>),
    LeftMerge(Arc<Term>, Arc<Term>),
    CommMerge(Arc<Term>, Arc<Term>),
    Encap(ActionSet, Arc<Term>),
    Var(Name),
    Rec(Name, SpecRef),
    Si(Arc<Interleaving>),
    /// Positional interleaving; the index is 1-based.
    Posm(usize, Arc<Interleaving>),
}

impl Term {
    pub fn act(a: &str) -> Term {
        Term::Action(Action::plain(a))
    }

    pub fn alt(l: Term, r: Term) -> Term {
        Term::Alt(Arc::new(l), Arc::new(r))
    }

    pub fn seq(l: Term, r: Term) -> Term {
        Term::Seq(Arc::new(l), Arc::new(r))
    }

    pub fn palt(p: Rat, l: Term, r: Term) -> Term {
        Term::PAlt(p, Arc::new(l), Arc::new(r))
    }

    pub fn par(l: Term, r: Term) -> Term {
        Term::Par(Arc::new(l), Arc::new(r))
    }

    pub fn left_merge(l: Term, r: Term) -> Term {
        Term::LeftMerge(Arc::new(l), Arc::new(r))
    }

    pub fn comm_merge(l: Term, r: Term) -> Term {
        Term::CommMerge(Arc::new(l), Arc::new(r))
    }

    pub fn encap(h: BTreeSet<Action>, t: Term) -> Term {
        Term::Encap(Arc::new(h), Arc::new(t))
    }

    pub fn rec(var: &str, spec: &SpecRef) -> Term {
        Term::Rec(name(var), spec.clone())
    }

    pub fn si(strategy: StrategyRef, history: History, state: ControlState, procs: Vec<Term>) -> Term {
        Term::Si(Arc::new(Interleaving { strategy, history, state, procs }))
    }

    pub fn posm(i: usize, strategy: StrategyRef, history: History, state: ControlState, procs: Vec<Term>) -> Term {
        Term::Posm(i, Arc::new(Interleaving { strategy, history, state, procs }))
    }

    /// `si[name](ts)` with the empty history and the strategy's initial state.
    pub fn si_init(strategy: StrategyRef, procs: Vec<Term>) -> Term {
        let state = strategy.strategy.initial_state();
        Term::si(strategy, History::empty(), state, procs)
    }

    /// Right-nested alternative composition; the empty sum is δ.
    pub fn sum(terms: Vec<Term>) -> Term {
        let mut it = terms.into_iter().rev();
        match it.next() {
            None => Term::Deadlock,
            Some(last) => it.fold(last, |acc, t| Term::alt(t, acc)),
        }
    }

    /// Right-nested probabilistic choice over weights that sum to one.
    /// Weights are turned into the conditional probabilities of the nesting.
    pub fn prob_sum(branches: Vec<(Rat, Term)>) -> Term {
        assert!(!branches.is_empty(), "probabilistic sum needs a branch");
        let mut rest = Rat::one();
        let mut conds = Vec::with_capacity(branches.len());
        let count = branches.len();
        for (k, (p, t)) in branches.into_iter().enumerate() {
            if k + 1 == count {
                conds.push((Rat::one(), t));
            } else {
                conds.push((p.div(&rest), t));
                rest = rest.sub(&p);
            }
        }
        let mut it = conds.into_iter().rev();
        let (_, last) = it.next().unwrap();
        it.fold(last, |acc, (p, t)| Term::palt(p, t, acc))
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Action(_) | Term::Deadlock | Term::Var(_) | Term::Rec(..) => vec![],
            Term::Alt(l, r)
            | Term::Seq(l, r)
            | Term::PAlt(_, l, r)
            | Term::Par(l, r)
            | Term::LeftMerge(l, r)
            | Term::CommMerge(l, r) => vec![l, r],
            Term::Encap(_, t) => vec![t],
            Term::Si(n) | Term::Posm(_, n) => n.procs.iter().collect(),
        }
    }

    fn any(&self, pred: &dyn Fn(&Term) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn has_interleaving(&self) -> bool {
        self.any(&|t| matches!(t, Term::Si(_) | Term::Posm(..)))
    }

    pub fn has_recursion(&self) -> bool {
        self.any(&|t| matches!(t, Term::Rec(..)))
    }

    pub fn has_vars(&self) -> bool {
        self.any(&|t| matches!(t, Term::Var(_)))
    }

    /// Closed term of the basic theory: no variables, recursion or interleaving.
    pub fn is_basic(&self) -> bool {
        !self.any(&|t| matches!(t, Term::Si(_) | Term::Posm(..) | Term::Rec(..) | Term::Var(_)))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        if let Term::Var(x) = self {
            out.insert(x.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Term::depth).max().unwrap_or(0)
    }

    /// Rebuilds the term bottom-up, applying `f` to every node after its children.
    pub fn map_bottom_up(&self, f: &mut dyn FnMut(Term) -> Term) -> Term {
        let rebuilt = match self {
            Term::Action(_) | Term::Deadlock | Term::Var(_) | Term::Rec(..) => self.clone(),
            Term::Alt(l, r) => Term::alt(l.map_bottom_up(f), r.map_bottom_up(f)),
            Term::Seq(l, r) => Term::seq(l.map_bottom_up(f), r.map_bottom_up(f)),
            Term::PAlt(p, l, r) => Term::palt(p.clone(), l.map_bottom_up(f), r.map_bottom_up(f)),
            Term::Par(l, r) => Term::par(l.map_bottom_up(f), r.map_bottom_up(f)),
            Term::LeftMerge(l, r) => Term::left_merge(l.map_bottom_up(f), r.map_bottom_up(f)),
            Term::CommMerge(l, r) => Term::comm_merge(l.map_bottom_up(f), r.map_bottom_up(f)),
            Term::Encap(h, t) => Term::Encap(h.clone(), Arc::new(t.map_bottom_up(f))),
            Term::Si(n) => Term::Si(Arc::new(Interleaving {
                procs: n.procs.iter().map(|p| p.map_bottom_up(f)).collect(),
                ..(**n).clone()
            })),
            Term::Posm(i, n) => Term::Posm(
                *i,
                Arc::new(Interleaving {
                    procs: n.procs.iter().map(|p| p.map_bottom_up(f)).collect(),
                    ..(**n).clone()
                }),
            ),
        };
        f(rebuilt)
    }

    /// Replaces variables by terms; unmapped variables are left alone.
    pub fn substitute(&self, map: &dyn Fn(&Name) -> Option<Term>) -> Term {
        self.map_bottom_up(&mut |t| match &t {
            Term::Var(x) => map(x).unwrap_or(t),
            _ => t,
        })
    }

    /// `⟨t|E⟩`: every variable of `E` in `t` becomes the constant `⟨X|E⟩`.
    pub fn close_over(&self, spec: &SpecRef) -> Term {
        self.substitute(&|x| {
            spec.spec()
                .equations
                .contains_key(x)
                .then(|| Term::Rec(x.clone(), spec.clone()))
        })
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_rules() {
        let h = |v: &[(usize, usize)]| History::from_pairs(v.to_vec());
        assert!(h(&[]).in_hist(1));
        assert!(h(&[(2, 2)]).in_hist(2));
        assert!(!h(&[(3, 2)]).in_hist(2));
        assert!(!h(&[(1, 2)]).in_hist(3));
        assert!(h(&[(1, 2), (2, 3)]).in_hist(3));
        assert!(!h(&[(1, 2), (3, 3)]).in_hist(3));
        assert!(!h(&[(1, 2), (1, 4)]).in_hist(4));
        assert!(h(&[(2, 2), (1, 1)]).in_hist(1));
        // first pair naming the finished last process
        assert!(!h(&[(2, 1)]).in_hist(1));
        assert!(h(&[(2, 1)]).admissible(1));
        assert!(!h(&[(3, 1)]).admissible(1));
    }

    #[test]
    fn prob_sum_conditional_weights() {
        let t = Term::prob_sum(vec![
            (Rat::new(1, 4), Term::act("a")),
            (Rat::new(1, 4), Term::act("b")),
            (Rat::new(1, 2), Term::act("c")),
        ]);
        match t {
            Term::PAlt(p, _, r) => {
                assert_eq!(p, Rat::new(1, 4));
                match &*r {
                    Term::PAlt(q, _, _) => assert_eq!(*q, Rat::new(1, 3)),
                    other => panic!("unexpected {other}"),
                }
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn sum_of_nothing_is_deadlock() {
        assert_eq!(Term::sum(vec![]), Term::Deadlock);
        assert_eq!(Term::sum(vec![Term::act("a")]), Term::act("a"));
    }
}
