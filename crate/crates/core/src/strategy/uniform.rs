use std::collections::BTreeSet;

use super::Strategy;
use crate::meadow::Rat;
use crate::syntax::{Action, ControlState, History};

/// Every process gets the next turn with probability `1/n`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl Strategy for Uniform {
    fn describe(&self) -> String {
        "uniform".into()
    }

    fn initial_state(&self) -> ControlState {
        ControlState::Unit
    }

    fn sched(&self, n: usize, _h: &History, _s: &ControlState) -> Option<Vec<Rat>> {
        let p = Rat::new(1, n as i64);
        Some(vec![p; n])
    }

    fn update(&self, _n: usize, _h: &History, s: &ControlState, _i: usize, _a: Option<&Action>, _t: bool) -> ControlState {
        s.clone()
    }

    fn control_actions(&self) -> BTreeSet<Action> {
        BTreeSet::new()
    }

    fn history_abstraction(&self, _h: &History) -> Option<History> {
        Some(History::empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_vectors() {
        let s = ControlState::Unit;
        let e = History::empty();
        assert_eq!(Uniform.sched(3, &e, &s), Some(vec![Rat::new(1, 3); 3]));
        assert_eq!(Uniform.sched(1, &e, &s), Some(vec![Rat::one()]));
        assert!(Rat::sum(&Uniform.sched(7, &e, &s).unwrap()).is_one());
    }
}
