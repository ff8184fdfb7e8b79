//! Interleaving strategies: control states, abstract schedulers and control
//! state transformers.

mod cyclic;
mod semaphore;
mod uniform;

pub use cyclic::Cyclic;
pub use semaphore::{Semaphore, remove_index, turns, waiting};
pub use uniform::Uniform;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::meadow::Rat;
use crate::syntax::{Action, ControlState, History};

/// The interface every interleaving strategy implements. Implementations must
/// be pure functions of their arguments.
pub trait Strategy: Send + Sync {
    /// Short description used when printing configurations.
    fn describe(&self) -> String;

    fn initial_state(&self) -> ControlState;

    /// Scheduling probabilities for processes `1..=n` (index 0 is process 1),
    /// or `None` when no process can be given a turn.
    fn sched(&self, n: usize, h: &History, s: &ControlState) -> Option<Vec<Rat>>;

    /// Control state after process `i` did `a`. `a = None` stands for δ and is
    /// only passed in deferred deadlock mode.
    fn update(
        &self,
        n: usize,
        h: &History,
        s: &ControlState,
        i: usize,
        a: Option<&Action>,
        terminated: bool,
    ) -> ControlState;

    fn control_actions(&self) -> BTreeSet<Action>;

    /// A history on which `sched` and `update` behave as on `h`, and for which
    /// appending commutes with abstraction. `None` means no abstraction.
    fn history_abstraction(&self, _h: &History) -> Option<History> {
        None
    }
}

/// `sched` with its contract checked: entries are probabilities summing to 1.
pub fn checked_sched(st: &dyn Strategy, n: usize, h: &History, s: &ControlState) -> Result<Option<Vec<Rat>>> {
    let Some(v) = st.sched(n, h, s) else {
        return Ok(None);
    };
    if v.len() != n {
        return Err(Error::Contract(format!(
            "{} scheduler returned {} entries for {n} processes",
            st.describe(),
            v.len()
        )));
    }
    if let Some(p) = v.iter().find(|p| !p.is_prob()) {
        return Err(Error::Contract(format!("{} scheduler returned non-probability {p}", st.describe())));
    }
    let total = Rat::sum(&v);
    if !total.is_one() {
        return Err(Error::Contract(format!(
            "{} scheduler probabilities sum to {total} at history {h}",
            st.describe()
        )));
    }
    Ok(Some(v))
}

/// `update` with the identity constraint for non-control actions checked.
pub fn checked_update(
    st: &dyn Strategy,
    n: usize,
    h: &History,
    s: &ControlState,
    i: usize,
    a: Option<&Action>,
    terminated: bool,
) -> Result<ControlState> {
    let out = st.update(n, h, s, i, a, terminated);
    if !terminated {
        if let Some(a) = a {
            if !st.control_actions().contains(a) && out != *s {
                return Err(Error::Contract(format!(
                    "{} changed control state {s} to {out} on non-control action {a}",
                    st.describe()
                )));
            }
        }
    }
    Ok(out)
}

/// Abstracted history if the strategy offers an abstraction, else `h` itself.
pub fn fingerprint(st: &dyn Strategy, h: &History) -> History {
    st.history_abstraction(h).unwrap_or_else(|| h.clone())
}

/// Point mass on process `i` (1-based) among `n`.
pub(crate) fn point_mass(n: usize, i: usize) -> Vec<Rat> {
    (1..=n).map(|j| if j == i { Rat::one() } else { Rat::zero() }).collect()
}
