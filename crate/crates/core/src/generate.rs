//! Seeded random generators for terms, probabilities and histories.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rand::seq::IndexedRandom;

use crate::meadow::Rat;
use crate::syntax::{Action, ControlState, History, Interleaving, StrategyRef, Term};

/// A random probability with a small denominator; 0 and 1 included.
pub fn prob<R: Rng>(rng: &mut R) -> Rat {
    let d = rng.random_range(1..=6i64);
    Rat::new(rng.random_range(0..=d), d)
}

/// A probability strictly between 0 and 1.
pub fn proper_prob<R: Rng>(rng: &mut R) -> Rat {
    let d = rng.random_range(2..=6i64);
    Rat::new(rng.random_range(1..d), d)
}

/// A random rational with numerator and denominator magnitudes up to `bound`.
pub fn rational<R: Rng>(rng: &mut R, bound: i64) -> Rat {
    Rat::new(rng.random_range(-bound..=bound), rng.random_range(1..=bound))
}

/// A random history valid for `n` processes at the end, built by the
/// inductive rules. `None` if no such history of length `len` was found.
pub fn history<R: Rng>(rng: &mut R, n: usize, len: usize) -> Option<History> {
    for _ in 0..100 {
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(len);
        let mut count = rng.random_range(1..=4usize);
        for _ in 0..len {
            let turn = rng.random_range(1..=count);
            let next = rng.random_range(count.saturating_sub(1).max(1)..=count + 1);
            pairs.push((turn, next));
            count = next;
        }
        if len == 0 || count == n {
            let h = History::from_pairs(pairs);
            if h.in_hist(n) {
                return Some(h);
            }
        }
    }
    None
}

#[derive(Clone)]
pub struct TermGen {
    pub actions: Vec<Action>,
    /// Closed constants to use as leaves, e.g. recursion constants.
    pub constants: Vec<Term>,
    /// Strategies for interleaving nodes; empty means none are generated.
    pub strategies: Vec<StrategyRef>,
    pub max_procs: usize,
    pub with_merges: bool,
    pub with_encap: bool,
}

impl TermGen {
    pub fn basic(actions: &[&str]) -> TermGen {
        TermGen {
            actions: actions.iter().map(|a| Action::plain(a)).collect(),
            constants: Vec::new(),
            strategies: Vec::new(),
            max_procs: 3,
            with_merges: true,
            with_encap: true,
        }
    }

    fn leaf<R: Rng>(&self, rng: &mut R) -> Term {
        let k = rng.random_range(0..self.actions.len() + 1 + self.constants.len());
        if k < self.actions.len() {
            Term::Action(self.actions[k].clone())
        } else if k == self.actions.len() {
            Term::Deadlock
        } else {
            self.constants[k - self.actions.len() - 1].clone()
        }
    }

    fn encap_set<R: Rng>(&self, rng: &mut R) -> BTreeSet<Action> {
        self.actions.iter().filter(|_| rng.random_bool(0.4)).cloned().collect()
    }

    /// Any term of nesting depth at most `depth`.
    pub fn term<R: Rng>(&self, rng: &mut R, depth: usize) -> Term {
        if depth <= 1 || rng.random_bool(0.2) {
            return self.leaf(rng);
        }
        let d = depth - 1;
        let mut choices = vec![0, 1, 2];
        if self.with_merges {
            choices.extend([3, 4, 5]);
        }
        if self.with_encap {
            choices.push(6);
        }
        if !self.strategies.is_empty() {
            choices.push(7);
        }
        match *choices.choose(rng).unwrap() {
            0 => Term::alt(self.term(rng, d), self.term(rng, d)),
            1 => Term::seq(self.term(rng, d), self.term(rng, d)),
            2 => Term::palt(prob(rng), self.term(rng, d), self.term(rng, d)),
            3 => Term::par(self.term(rng, d), self.term(rng, d)),
            4 => Term::left_merge(self.term(rng, d), self.term(rng, d)),
            5 => Term::comm_merge(self.term(rng, d), self.term(rng, d)),
            6 => Term::encap(self.encap_set(rng), self.term(rng, d)),
            _ => self.interleaving(rng, d),
        }
    }

    /// A term whose distribution is a point mass on itself.
    pub fn static_term<R: Rng>(&self, rng: &mut R, depth: usize) -> Term {
        if depth <= 1 || rng.random_bool(0.2) {
            let k = rng.random_range(0..=self.actions.len());
            return self.actions.get(k).cloned().map_or(Term::Deadlock, Term::Action);
        }
        let d = depth - 1;
        let ops = if self.with_merges { 5 } else { 2 };
        match rng.random_range(0..ops) {
            0 => Term::alt(self.static_term(rng, d), self.static_term(rng, d)),
            1 => Term::seq(self.static_term(rng, d), self.term(rng, d)),
            2 => Term::par(self.static_term(rng, d), self.static_term(rng, d)),
            3 => Term::left_merge(self.static_term(rng, d), self.static_term(rng, d)),
            _ => Term::comm_merge(self.static_term(rng, d), self.static_term(rng, d)),
        }
    }

    /// `si[s](x₁,…,xₙ)` from the initial configuration over random components.
    pub fn interleaving<R: Rng>(&self, rng: &mut R, depth: usize) -> Term {
        let s = self.strategies.choose(rng).expect("a strategy").clone();
        let n = rng.random_range(1..=self.max_procs.max(1));
        let inner = TermGen { strategies: Vec::new(), ..self.clone() };
        let procs = (0..n).map(|_| inner.term(rng, depth.max(1))).collect();
        Term::si_init(s, procs)
    }

    /// A positional or plain interleaving with a random valid history.
    pub fn interleaving_with_history<R: Rng>(&self, rng: &mut R, depth: usize, state: ControlState) -> Term {
        let s = self.strategies.choose(rng).expect("a strategy").clone();
        let n = rng.random_range(1..=self.max_procs.max(1));
        let len = rng.random_range(0..4);
        let h = history(rng, n, len).unwrap_or_default();
        let inner = TermGen { strategies: Vec::new(), ..self.clone() };
        let procs = (0..n).map(|_| inner.term(rng, depth.max(1))).collect();
        let body = Arc::new(Interleaving { strategy: s, history: h, state, procs });
        if rng.random_bool(0.5) { Term::Si(body) } else { Term::Posm(rng.random_range(1..=n), body) }
    }
}
