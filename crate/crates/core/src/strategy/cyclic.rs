use std::collections::BTreeSet;

use super::{Strategy, point_mass};
use crate::meadow::Rat;
use crate::syntax::{Action, ControlState, History};

/// Round-robin: the first turn goes to process 1, then to the successor of
/// the last turn-holder.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cyclic;

impl Strategy for Cyclic {
    fn describe(&self) -> String {
        "cyclic".into()
    }

    fn initial_state(&self) -> ControlState {
        ControlState::Unit
    }

    fn sched(&self, n: usize, h: &History, _s: &ControlState) -> Option<Vec<Rat>> {
        let next = match h.last() {
            None => 1,
            Some((j, _)) => (j % n) + 1,
        };
        Some(point_mass(n, next))
    }

    fn update(&self, _n: usize, _h: &History, s: &ControlState, _i: usize, _a: Option<&Action>, _t: bool) -> ControlState {
        s.clone()
    }

    fn control_actions(&self) -> BTreeSet<Action> {
        BTreeSet::new()
    }

    fn history_abstraction(&self, h: &History) -> Option<History> {
        Some(match h.last() {
            None => History::empty(),
            Some(p) => History::from_pairs(vec![p]),
        })
    }
}
