use std::collections::{BTreeMap, BTreeSet};

use super::{Strategy, point_mass};
use crate::error::{Error, Result};
use crate::meadow::Rat;
use crate::syntax::{Action, ControlState, History, Name, name};

/// Uniform random choice of the next process, which then gets `k`
/// consecutive turns, with binary semaphores for mutual exclusion.
#[derive(Debug, Clone)]
pub struct Semaphore {
    k: usize,
    semaphores: BTreeSet<Name>,
}

/// Number of consecutive turns of process `i` at the end of `h`.
pub fn turns(h: &History, i: usize) -> usize {
    h.pairs().iter().rev().take_while(|&&(j, _)| j == i).count()
}

/// Processes suspended on some semaphore.
pub fn waiting(s: &ControlState) -> BTreeSet<usize> {
    match s {
        ControlState::Unit => BTreeSet::new(),
        ControlState::Queues(m) => m.values().flatten().copied().collect(),
    }
}

/// Adapts `s` to the termination of process `i`: `i` leaves every queue and
/// larger indices shift down by one.
pub fn remove_index(s: &ControlState, i: usize) -> ControlState {
    match s {
        ControlState::Unit => ControlState::Unit,
        ControlState::Queues(m) => ControlState::Queues(
            m.iter()
                .map(|(r, q)| {
                    let q = q
                        .iter()
                        .filter(|&&j| j != i)
                        .map(|&j| if j > i { j - 1 } else { j })
                        .collect();
                    (r.clone(), q)
                })
                .collect(),
        ),
    }
}

impl Semaphore {
    pub fn new(k: usize, semaphores: impl IntoIterator<Item = Name>) -> Result<Semaphore> {
        if k == 0 {
            return Err(Error::Config("semaphore strategy needs k >= 1".into()));
        }
        Ok(Semaphore { k, semaphores: semaphores.into_iter().collect() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn semaphores(&self) -> &BTreeSet<Name> {
        &self.semaphores
    }

    pub fn ready(&self, n: usize, h: &History, s: &ControlState) -> bool {
        let w = waiting(s);
        let total: usize = (1..=n).filter(|i| !w.contains(i)).map(|i| turns(h, i)).sum();
        total == 0 || total == self.k
    }

    fn semaphore_op<'a>(&self, a: &'a Action) -> Option<(&'a str, &'a Name)> {
        match a {
            Action::Control { op, arg: Some(r) } if self.semaphores.contains(r) && (&**op == "P" || &**op == "V") => {
                Some((op, r))
            }
            _ => None,
        }
    }
}

impl Strategy for Semaphore {
    fn describe(&self) -> String {
        let names: Vec<&str> = self.semaphores.iter().map(|r| &**r).collect();
        format!("semaphore(k={}, semaphores={{{}}})", self.k, names.join(","))
    }

    fn initial_state(&self) -> ControlState {
        ControlState::empty_queues()
    }

    fn sched(&self, n: usize, h: &History, s: &ControlState) -> Option<Vec<Rat>> {
        let w = waiting(s);
        let free: Vec<usize> = (1..=n).filter(|i| !w.contains(i)).collect();
        if free.is_empty() {
            return None;
        }
        if self.ready(n, h, s) {
            let p = Rat::new(1, free.len() as i64);
            return Some((1..=n).map(|i| if w.contains(&i) { Rat::zero() } else { p.clone() }).collect());
        }
        let holder = (1..=n).find(|&i| turns(h, i) != 0)?;
        Some(point_mass(n, holder))
    }

    fn update(&self, _n: usize, h: &History, s: &ControlState, i: usize, a: Option<&Action>, terminated: bool) -> ControlState {
        if terminated {
            return remove_index(s, i);
        }
        let queues = match s {
            ControlState::Queues(m) => m.clone(),
            ControlState::Unit => BTreeMap::new(),
        };
        let Some((op, r)) = a.and_then(|a| self.semaphore_op(a)) else {
            return if h.is_empty() { ControlState::empty_queues() } else { s.clone() };
        };
        let mut out = queues;
        if op == "P" {
            if h.is_empty() {
                return ControlState::Queues(BTreeMap::from([(r.clone(), Vec::new())]));
            }
            match out.get_mut(r) {
                None => {
                    out.insert(r.clone(), Vec::new());
                }
                Some(q) => q.push(i),
            }
        } else {
            if h.is_empty() {
                return ControlState::empty_queues();
            }
            match out.get_mut(r) {
                None => {}
                Some(q) if q.is_empty() => {
                    out.remove(r);
                }
                Some(q) => {
                    q.remove(0);
                }
            }
        }
        ControlState::Queues(out)
    }

    fn control_actions(&self) -> BTreeSet<Action> {
        self.semaphores
            .iter()
            .flat_map(|r| {
                ["P", "V"].map(|op| Action::Control { op: name(op), arg: Some(r.clone()) })
            })
            .collect()
    }

    /// Keeps the trailing run of the last turn-holder, capped at `k + 1` pairs.
    fn history_abstraction(&self, h: &History) -> Option<History> {
        let Some((j, _)) = h.last() else {
            return Some(History::empty());
        };
        let run = turns(h, j).min(self.k + 1);
        let pairs = h.pairs();
        Some(History::from_pairs(pairs[pairs.len() - run..].to_vec()))
    }
}
