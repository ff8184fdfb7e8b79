//! Seeded Monte-Carlo runs through the operational semantics.
//!
//! Randomness comes from `ChaCha8Rng` seeded with the run seed. A
//! probabilistic step draws `k` uniformly from `0..2^64` and picks the first
//! support element (in term order) whose cumulative probability exceeds
//! `k / 2^64`, compared exactly.

use std::collections::BTreeMap;
use std::ops::Range;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::context::Context;
use crate::error::{Error, Result};
use crate::meadow::Rat;
use crate::semantics::{Outcome, dist, steps};
use crate::syntax::Term;

/// How to choose among several enabled action steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Nondet {
    #[default]
    Uniform,
    First,
    Error,
}

impl FromStr for Nondet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Nondet> {
        match s {
            "uniform" => Ok(Nondet::Uniform),
            "first" => Ok(Nondet::First),
            "error" => Ok(Nondet::Error),
            _ => Err(Error::Config(format!("unknown nondeterminism policy `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Terminated,
    Deadlocked,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Event {
    pub action: String,
    /// Printed successor, or `None` after termination.
    pub state: Option<String>,
    /// Process that took the turn, when the successor is an interleaving.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turn: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub seed: u64,
    pub events: Vec<Event>,
    pub outcome: RunOutcome,
}

/// Samples an element of `dist` with the exact threshold rule.
fn sample<'a>(items: &'a [(Term, Rat)], rng: &mut ChaCha8Rng) -> &'a Term {
    let k = Rat::from_big(BigInt::from(rng.next_u64()), BigInt::from(1u128 << 64));
    let mut cum = Rat::zero();
    for (t, p) in items {
        cum = cum.add(p);
        if k.lt(&cum) {
            return t;
        }
    }
    &items[items.len() - 1].0
}

pub fn run(t: &Term, ctx: &Context, seed: u64, max_steps: usize, nondet: Nondet) -> Result<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = t.clone();
    let mut events = Vec::new();
    for _ in 0..max_steps {
        let d: Vec<(Term, Rat)> = dist(&current, ctx)?.into_map().into_iter().collect();
        let s = sample(&d, &mut rng).clone();
        let options: Vec<_> = steps(&s, ctx)?.into_iter().collect();
        let chosen = match (options.len(), nondet) {
            (0, _) => return Ok(Trace { seed, events, outcome: RunOutcome::Deadlocked }),
            (1, _) | (_, Nondet::First) => options[0].clone(),
            (n, Nondet::Error) => return Err(Error::Nondeterminism(n)),
            (n, Nondet::Uniform) => options[rng.random_range(0..n)].clone(),
        };
        match chosen.outcome {
            Outcome::Terminate => {
                events.push(Event { action: chosen.action.to_string(), state: None, turn: None });
                return Ok(Trace { seed, events, outcome: RunOutcome::Terminated });
            }
            Outcome::Next(next) => {
                let turn = match &next {
                    Term::Si(n) => n.history.last().map(|(i, _)| i),
                    _ => None,
                };
                events.push(Event { action: chosen.action.to_string(), state: Some(next.to_string()), turn });
                current = next;
            }
        }
    }
    Ok(Trace { seed, events, outcome: RunOutcome::BudgetExhausted })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub runs: usize,
    pub outcomes: BTreeMap<RunOutcome, usize>,
    /// Occurrences of each action over all runs.
    pub actions: BTreeMap<String, usize>,
    pub first_actions: BTreeMap<String, usize>,
    /// Turns taken per process index, for interleaving roots.
    pub turns: BTreeMap<usize, usize>,
    pub first_turns: BTreeMap<usize, usize>,
}

impl Stats {
    fn add(&mut self, t: &Trace) {
        self.runs += 1;
        *self.outcomes.entry(t.outcome).or_default() += 1;
        for e in &t.events {
            *self.actions.entry(e.action.clone()).or_default() += 1;
            if let Some(i) = e.turn {
                *self.turns.entry(i).or_default() += 1;
            }
        }
        if let Some(e) = t.events.first() {
            *self.first_actions.entry(e.action.clone()).or_default() += 1;
            if let Some(i) = e.turn {
                *self.first_turns.entry(i).or_default() += 1;
            }
        }
    }

    fn merge(mut self, other: Stats) -> Stats {
        self.runs += other.runs;
        for (k, v) in other.outcomes {
            *self.outcomes.entry(k).or_default() += v;
        }
        for (map, o) in [(&mut self.actions, other.actions), (&mut self.first_actions, other.first_actions)] {
            for (k, v) in o {
                *map.entry(k).or_default() += v;
            }
        }
        for (map, o) in [(&mut self.turns, other.turns), (&mut self.first_turns, other.first_turns)] {
            for (k, v) in o {
                *map.entry(k).or_default() += v;
            }
        }
        self
    }
}

/// Runs every seed in `seeds` (in parallel) and aggregates the traces.
pub fn stats(t: &Term, ctx: &Context, seeds: Range<u64>, max_steps: usize, nondet: Nondet) -> Result<Stats> {
    seeds
        .into_par_iter()
        .map(|seed| {
            let trace = run(t, ctx, seed, max_steps, nondet)?;
            let mut s = Stats::default();
            s.add(&trace);
            Ok(s)
        })
        .try_reduce(Stats::default, |a, b| Ok(a.merge(b)))
}
