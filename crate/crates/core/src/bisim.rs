//! Probabilistic bisimulation on finite transition systems.
//!
//! Static states are refined by their termination actions and by the
//! classes their action steps lead to; every state is then classified by the
//! probability it assigns to each block of static states. Two states are
//! bisimilar iff they end with equal probability vectors. A non-static state
//! therefore meets a static one exactly when it moves into that state's
//! block with probability one.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde_json::{Value, json};

use crate::context::Context;
use crate::error::Result;
use crate::meadow::Rat;
use crate::semantics::{Pts, PtsOptions, build_pts_joint};
use crate::syntax::{Action, Term};

/// Blocks of states; `block_of[s]` indexes `blocks`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub block_of: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    fn from_ids(ids: &[usize]) -> Partition {
        let mut renum: HashMap<usize, usize> = HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let block_of = ids
            .iter()
            .enumerate()
            .map(|(s, id)| {
                let b = *renum.entry(*id).or_insert_with(|| {
                    blocks.push(Vec::new());
                    blocks.len() - 1
                });
                blocks[b].push(s);
                b
            })
            .collect();
        Partition { block_of, blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn same(&self, s: usize, t: usize) -> bool {
        self.block_of[s] == self.block_of[t]
    }

    /// Numbering-independent form for comparing partitions.
    pub fn as_sets(&self) -> BTreeSet<BTreeSet<usize>> {
        self.blocks.iter().map(|b| b.iter().copied().collect()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitter {
    /// Static states differ in termination or enabled actions.
    Action,
    /// States differ in the mass they assign to some block.
    Probability,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reason {
    pub splitter: Splitter,
    pub round: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Distinguished(Reason),
}

#[derive(Clone, Debug)]
pub struct EquivReport {
    pub verdict: Verdict,
    pub states_explored: usize,
    pub classes: usize,
    pub partition: Partition,
    pts: Pts,
}

impl EquivReport {
    pub fn equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }

    pub fn pts(&self) -> &Pts {
        &self.pts
    }

    pub fn to_json(&self, with_partition: bool) -> Value {
        let mut v = json!({
            "verdict": if self.equivalent() { "equivalent" } else { "distinguished" },
            "states_explored": self.states_explored,
            "classes": self.classes,
        });
        if let Verdict::Distinguished(r) = &self.verdict {
            v["reason"] = json!({
                "splitter": match r.splitter { Splitter::Action => "action", Splitter::Probability => "probability" },
                "round": r.round,
                "detail": r.detail,
            });
        }
        if with_partition {
            v["witness_partition"] = json!(
                self.partition
                    .blocks
                    .iter()
                    .map(|b| b.iter().map(|&s| self.pts.states[s].to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            );
        }
        v
    }
}

type StepSig = (BTreeSet<Action>, BTreeSet<(Action, usize)>);

/// Partition refinement state: a block id per static state.
struct Refiner<'a> {
    pts: &'a Pts,
    statics: Vec<usize>,
    block: Vec<usize>,
}

impl<'a> Refiner<'a> {
    fn new(pts: &'a Pts, trivial: bool) -> Refiner<'a> {
        let statics: Vec<usize> = (0..pts.len()).filter(|&s| pts.is_static[s]).collect();
        let mut block = vec![usize::MAX; pts.len()];
        let mut ids: HashMap<(BTreeSet<Action>, BTreeSet<Action>), usize> = HashMap::new();
        for &s in &statics {
            let key = if trivial {
                Default::default()
            } else {
                let term = pts.steps[s].iter().filter(|e| e.target.is_none()).map(|e| e.action.clone()).collect();
                let enabled = pts.steps[s].iter().map(|e| e.action.clone()).collect();
                (term, enabled)
            };
            let n = ids.len();
            block[s] = *ids.entry(key).or_insert(n);
        }
        Refiner { pts, statics, block }
    }

    fn block_count(&self) -> usize {
        self.statics.iter().map(|&s| self.block[s]).collect::<BTreeSet<_>>().len()
    }

    /// Mass per block of static states.
    fn pkey(&self, s: usize) -> Vec<(usize, Rat)> {
        let mut m: BTreeMap<usize, Rat> = BTreeMap::new();
        for (t, p) in &self.pts.dist[s] {
            let e = m.entry(self.block[*t]).or_insert_with(Rat::zero);
            *e = e.add(p);
        }
        m.into_iter().collect()
    }

    fn pclasses(&self) -> Vec<usize> {
        let mut ids: HashMap<Vec<(usize, Rat)>, usize> = HashMap::new();
        (0..self.pts.len())
            .map(|s| {
                let n = ids.len();
                *ids.entry(self.pkey(s)).or_insert(n)
            })
            .collect()
    }

    fn step_sig(&self, s: usize, pclass: &[usize]) -> StepSig {
        let mut term = BTreeSet::new();
        let mut moves = BTreeSet::new();
        for e in &self.pts.steps[s] {
            match e.target {
                None => {
                    term.insert(e.action.clone());
                }
                Some(t) => {
                    moves.insert((e.action.clone(), pclass[t]));
                }
            }
        }
        (term, moves)
    }

    /// One simultaneous split of every block. Returns whether anything split.
    fn round(&mut self) -> bool {
        let pclass = self.pclasses();
        let before = self.block_count();
        let mut ids: HashMap<(usize, StepSig), usize> = HashMap::new();
        let mut next = self.block.clone();
        for &s in &self.statics {
            let key = (self.block[s], self.step_sig(s, &pclass));
            let n = ids.len();
            next[s] = *ids.entry(key).or_insert(n);
        }
        self.block = next;
        self.block_count() != before
    }

    /// Splits one block at a time, visiting blocks in a seeded random order.
    fn one_split(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let pclass = self.pclasses();
        let mut blocks: Vec<usize> = self.statics.iter().map(|&s| self.block[s]).collect::<BTreeSet<_>>().into_iter().collect();
        blocks.shuffle(rng);
        let fresh = self.block.iter().filter(|&&b| b != usize::MAX).max().map_or(0, |b| b + 1);
        for b in blocks {
            let members: Vec<usize> = self.statics.iter().copied().filter(|&s| self.block[s] == b).collect();
            let mut ids: HashMap<StepSig, usize> = HashMap::new();
            let sub: Vec<usize> = members
                .iter()
                .map(|&s| {
                    let n = ids.len();
                    *ids.entry(self.step_sig(s, &pclass)).or_insert(n)
                })
                .collect();
            if ids.len() > 1 {
                for (&s, &k) in members.iter().zip(&sub) {
                    if k > 0 {
                        self.block[s] = fresh + k - 1;
                    }
                }
                return true;
            }
        }
        false
    }

    fn partition(&self) -> Partition {
        Partition::from_ids(&self.pclasses())
    }
}

/// The coarsest bisimulation on the states of `pts`.
pub fn bisim_classes(pts: &Pts) -> Partition {
    let mut r = Refiner::new(pts, false);
    while r.round() {}
    r.partition()
}

/// As [`bisim_classes`], refining one block at a time in a seeded order.
pub fn bisim_classes_seeded(pts: &Pts, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Refiner::new(pts, false);
    while r.one_split(&mut rng) {}
    r.partition()
}

/// Rechecks the bisimulation conditions on a partition: static states in a
/// class agree on termination actions and on (action, target class) pairs,
/// and all states in a class agree on the mass sent into every class.
pub fn audit(pts: &Pts, p: &Partition) -> std::result::Result<(), String> {
    for block in &p.blocks {
        let mut step_sig: Option<(usize, StepSig)> = None;
        let mut mass: Option<(usize, BTreeMap<usize, Rat>)> = None;
        for &s in block {
            let mut m: BTreeMap<usize, Rat> = BTreeMap::new();
            for (t, q) in &pts.dist[s] {
                let e = m.entry(p.block_of[*t]).or_insert_with(Rat::zero);
                *e = e.add(q);
            }
            match &mass {
                None => mass = Some((s, m)),
                Some((r, m0)) if *m0 != m => {
                    return Err(format!("states {r} and {s} send different mass into classes"));
                }
                _ => {}
            }
            if pts.is_static[s] {
                let mut term = BTreeSet::new();
                let mut moves = BTreeSet::new();
                for e in &pts.steps[s] {
                    match e.target {
                        None => {
                            term.insert(e.action.clone());
                        }
                        Some(t) => {
                            moves.insert((e.action.clone(), p.block_of[t]));
                        }
                    }
                }
                let sig = (term, moves);
                match &step_sig {
                    None => step_sig = Some((s, sig)),
                    Some((r, s0)) if *s0 != sig => {
                        return Err(format!("static states {r} and {s} differ in their action steps"));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

/// Decides `t1 ∼ t2` on their joint reachable system.
pub fn bisim_equiv(t1: &Term, t2: &Term, ctx: &Context, opts: &PtsOptions) -> Result<EquivReport> {
    let pts = build_pts_joint(&[t1.clone(), t2.clone()], ctx, opts)?;
    let (r1, r2) = (pts.roots[0], pts.roots[1]);
    let mut r = Refiner::new(&pts, false);
    let mut round = 0;
    let mut reason = None;
    loop {
        if reason.is_none() {
            let (k1, k2) = (r.pkey(r1), r.pkey(r2));
            if k1 != k2 {
                reason = Some(explain(&r, r1, r2, &k1, &k2, round));
            }
        }
        if !r.round() {
            break;
        }
        round += 1;
    }
    let partition = r.partition();
    debug_assert!(audit(&pts, &partition).is_ok());
    let verdict = match reason {
        None => Verdict::Equivalent,
        Some(why) => Verdict::Distinguished(why),
    };
    Ok(EquivReport { verdict, states_explored: pts.len(), classes: partition.len(), partition, pts })
}

fn explain(r: &Refiner, r1: usize, r2: usize, k1: &[(usize, Rat)], k2: &[(usize, Rat)], round: usize) -> Reason {
    let pts = r.pts;
    if pts.is_static[r1] && pts.is_static[r2] {
        let a1: BTreeSet<String> = pts.steps[r1].iter().map(|e| e.action.to_string()).collect();
        let a2: BTreeSet<String> = pts.steps[r2].iter().map(|e| e.action.to_string()).collect();
        let detail = if round == 0 {
            format!("enabled or terminating actions differ: {a1:?} vs {a2:?}")
        } else {
            "their action steps lead to different classes".to_string()
        };
        return Reason { splitter: Splitter::Action, round, detail };
    }
    let m1: BTreeMap<usize, Rat> = k1.iter().cloned().collect();
    let m2: BTreeMap<usize, Rat> = k2.iter().cloned().collect();
    let b = m1.keys().chain(m2.keys()).find(|b| m1.get(b) != m2.get(b)).copied().unwrap_or(0);
    let rep = r.statics.iter().find(|&&s| r.block[s] == b).map(|&s| pts.states[s].to_string()).unwrap_or_default();
    let p = |m: &BTreeMap<usize, Rat>| m.get(&b).cloned().unwrap_or_else(Rat::zero);
    Reason {
        splitter: Splitter::Probability,
        round,
        detail: format!("mass into the class of `{rep}` is {} vs {}", p(&m1), p(&m2)),
    }
}

/// Depth-bounded bisimilarity: `depth` rounds of refinement from the
/// single-block partition.
pub fn bounded_bisim_equiv(t1: &Term, t2: &Term, ctx: &Context, depth: usize, opts: &PtsOptions) -> Result<bool> {
    let pts = build_pts_joint(&[t1.clone(), t2.clone()], ctx, opts)?;
    Ok(bounded_on(&pts, pts.roots[0], pts.roots[1], depth))
}

pub fn bounded_on(pts: &Pts, s: usize, t: usize, depth: usize) -> bool {
    let mut r = Refiner::new(pts, true);
    for _ in 0..depth {
        if !r.round() {
            break;
        }
    }
    r.pkey(s) == r.pkey(t)
}
