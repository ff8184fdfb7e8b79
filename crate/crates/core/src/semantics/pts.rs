//! Reachable probabilistic transition systems.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{Value, json};

use super::{Outcome, dist, steps};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::meadow::Rat;
use crate::strategy::fingerprint;
use crate::syntax::{Action, Interleaving, Term};

#[derive(Clone, Debug)]
pub struct PtsOptions {
    pub max_states: usize,
    /// Replace every interleaving history by its strategy fingerprint, so
    /// regular behaviour under an abstracting strategy yields a finite system.
    pub abstract_histories: bool,
}

impl PtsOptions {
    pub fn new(max_states: usize) -> PtsOptions {
        PtsOptions { max_states, abstract_histories: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StepEdge {
    pub action: Action,
    /// `None` encodes successful termination.
    pub target: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Pts {
    pub states: Vec<Term>,
    /// Probabilistic edges per state; a static state has a single self-loop.
    pub dist: Vec<Vec<(usize, Rat)>>,
    /// Action edges; empty for non-static states.
    pub steps: Vec<Vec<StepEdge>>,
    pub is_static: Vec<bool>,
    pub roots: Vec<usize>,
    index: HashMap<Term, usize>,
}

struct Expansion {
    dist: Vec<(Term, Rat)>,
    is_static: bool,
    steps: Vec<(Action, Option<Term>)>,
}

fn expand(t: &Term, ctx: &Context, abstracted: bool) -> Result<Expansion> {
    let d = dist(t, ctx)?;
    let is_static = d.as_point() == Some(t);
    let norm = |x: Term| if abstracted { abstract_histories(&x) } else { x };
    let steps = if is_static {
        steps(t, ctx)?
            .into_iter()
            .map(|s| {
                let target = match s.outcome {
                    Outcome::Terminate => None,
                    Outcome::Next(x) => Some(norm(x)),
                };
                (s.action, target)
            })
            .collect()
    } else {
        Vec::new()
    };
    let dist = d.into_map().into_iter().map(|(x, p)| (norm(x), p)).collect::<Vec<_>>();
    Ok(Expansion { dist, is_static, steps })
}

/// Replaces interleaving histories throughout `t` by their fingerprints.
pub fn abstract_histories(t: &Term) -> Term {
    t.map_bottom_up(&mut |x| match &x {
        Term::Si(n) => Term::Si(Arc::new(abstract_one(n))),
        Term::Posm(i, n) => Term::Posm(*i, Arc::new(abstract_one(n))),
        _ => x,
    })
}

fn abstract_one(n: &Interleaving) -> Interleaving {
    Interleaving { history: fingerprint(&*n.strategy.strategy, &n.history), ..n.clone() }
}

impl Pts {
    fn with_roots(roots: &[Term], opts: &PtsOptions) -> Pts {
        let mut pts = Pts {
            states: Vec::new(),
            dist: Vec::new(),
            steps: Vec::new(),
            is_static: Vec::new(),
            roots: Vec::new(),
            index: HashMap::new(),
        };
        for r in roots {
            let r = if opts.abstract_histories { abstract_histories(r) } else { r.clone() };
            let i = pts.intern(r);
            pts.roots.push(i);
        }
        pts
    }

    fn intern(&mut self, t: Term) -> usize {
        if let Some(&i) = self.index.get(&t) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(t.clone(), i);
        self.states.push(t);
        self.dist.push(Vec::new());
        self.steps.push(Vec::new());
        self.is_static.push(false);
        i
    }

    pub fn initial(&self) -> usize {
        self.roots[0]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// P(s, B): probability mass from `s` into the state set `block`.
    pub fn prob_into(&self, s: usize, block: &BTreeSet<usize>) -> Rat {
        Rat::sum(self.dist[s].iter().filter(|(t, _)| block.contains(t)).map(|(_, p)| p))
    }

    pub fn terminates(&self, s: usize) -> bool {
        self.steps[s].iter().any(|e| e.target.is_none())
    }

    /// Index-free description, equal for two systems iff they coincide up
    /// to a renumbering of states.
    pub fn signature(&self) -> BTreeMap<String, (Vec<(String, Rat)>, Vec<(String, Option<String>)>)> {
        let name = |i: usize| self.states[i].to_string();
        self.states
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut d: Vec<_> = self.dist[i].iter().map(|(j, p)| (name(*j), p.clone())).collect();
                d.sort();
                let mut s: Vec<_> =
                    self.steps[i].iter().map(|e| (e.action.to_string(), e.target.map(name))).collect();
                s.sort();
                (t.to_string(), (d, s))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let states: Vec<Value> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, t)| {
                json!({
                    "id": i,
                    "term": t.to_string(),
                    "static": self.is_static[i],
                    "dist": self.dist[i].iter().map(|(j, p)| json!({"to": j, "p": p.to_string()})).collect::<Vec<_>>(),
                    "steps": self.steps[i].iter().map(|e| match e.target {
                        Some(j) => json!({"action": e.action.to_string(), "to": j, "terminate": false}),
                        None => json!({"action": e.action.to_string(), "terminate": true}),
                    }).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "initial": self.initial(), "roots": self.roots, "states": states })
    }

    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph pts {\n  rankdir=LR;\n");
        for (i, t) in self.states.iter().enumerate() {
            let shape = if self.terminates(i) { "doublecircle" } else { "circle" };
            let root = if self.roots.contains(&i) { ", penwidth=2" } else { "" };
            let _ = writeln!(out, "  s{i} [shape={shape}, label=\"{}\"{root}];", esc(&t.to_string()));
        }
        for i in 0..self.len() {
            if !self.is_static[i] {
                for (j, p) in &self.dist[i] {
                    let _ = writeln!(out, "  s{i} -> s{j} [style=dashed, label=\"{p}\"];");
                }
            }
            for e in &self.steps[i] {
                if let Some(j) = e.target {
                    let _ = writeln!(out, "  s{i} -> s{j} [label=\"{}\"];", esc(&e.action.to_string()));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Reachable system of `t` under `dist` and `steps`.
pub fn build_pts(t: &Term, ctx: &Context, opts: &PtsOptions) -> Result<Pts> {
    build(std::slice::from_ref(t), ctx, opts, None)
}

/// One system reachable from several roots (used to compare terms).
pub fn build_pts_joint(roots: &[Term], ctx: &Context, opts: &PtsOptions) -> Result<Pts> {
    build(roots, ctx, opts, None)
}

/// As [`build_pts`], but each frontier is expanded and registered in an
/// order shuffled by `seed`. The result must not depend on the order.
pub fn build_pts_shuffled(t: &Term, ctx: &Context, opts: &PtsOptions, seed: u64) -> Result<Pts> {
    build(std::slice::from_ref(t), ctx, opts, Some(ChaCha8Rng::seed_from_u64(seed)))
}

fn build(roots: &[Term], ctx: &Context, opts: &PtsOptions, mut rng: Option<ChaCha8Rng>) -> Result<Pts> {
    let mut pts = Pts::with_roots(roots, opts);
    let mut frontier: Vec<usize> = {
        let set: BTreeSet<usize> = pts.roots.iter().copied().collect();
        set.into_iter().collect()
    };
    while !frontier.is_empty() {
        if pts.len() > opts.max_states {
            return Err(Error::CapExceeded { what: "state", limit: opts.max_states });
        }
        if let Some(rng) = rng.as_mut() {
            frontier.shuffle(rng);
        }
        let expansions: Vec<Result<Expansion>> =
            frontier.par_iter().map(|&i| expand(&pts.states[i], ctx, opts.abstract_histories)).collect();
        let mut next = Vec::new();
        for (&i, e) in frontier.iter().zip(expansions) {
            let e = e?;
            let mut reg = |pts: &mut Pts, t: Term| {
                let before = pts.len();
                let j = pts.intern(t);
                if j == before {
                    next.push(j);
                }
                j
            };
            let mut d = Vec::with_capacity(e.dist.len());
            for (t, p) in e.dist {
                d.push((reg(&mut pts, t), p));
            }
            let mut s = Vec::with_capacity(e.steps.len());
            for (a, t) in e.steps {
                let target = t.map(|t| reg(&mut pts, t));
                s.push(StepEdge { action: a, target });
            }
            s.sort();
            s.dedup();
            pts.dist[i] = d;
            pts.steps[i] = s;
            pts.is_static[i] = e.is_static;
        }
        frontier = next;
    }
    if pts.len() > opts.max_states {
        return Err(Error::CapExceeded { what: "state", limit: opts.max_states });
    }
    Ok(pts)
}
