use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::syntax::Action;

/// Communication function γ. Stored with normalized keys so it is
/// commutative by construction; a missing entry means γ(a, b) = δ.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommFunction {
    table: BTreeMap<(Action, Action), Action>,
}

impl CommFunction {
    pub fn new() -> CommFunction {
        CommFunction::default()
    }

    fn key(a: &Action, b: &Action) -> (Action, Action) {
        if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) }
    }

    /// Adds `a * b -> c`. Conflicting redefinition is an error.
    pub fn insert(&mut self, a: Action, b: Action, c: Action) -> Result<()> {
        let key = Self::key(&a, &b);
        match self.table.get(&key) {
            Some(old) if *old != c => Err(Error::Comm(format!("{a} * {b} defined as both {old} and {c}"))),
            _ => {
                self.table.insert(key, c);
                Ok(())
            }
        }
    }

    pub fn gamma(&self, a: &Action, b: &Action) -> Option<&Action> {
        self.table.get(&Self::key(a, b))
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Action, &Action, &Action)> {
        self.table.iter().map(|((a, b), c)| (a, b, c))
    }

    /// Actions mentioned anywhere in the table.
    pub fn mentioned(&self) -> BTreeSet<Action> {
        self.entries().flat_map(|(a, b, c)| [a.clone(), b.clone(), c.clone()]).collect()
    }

    /// Checks associativity over `alphabet` (plus every action the table
    /// mentions) and the constraints tying γ to control and creation actions.
    /// Reports the first violation found.
    pub fn validate(&self, alphabet: &BTreeSet<Action>, control: &BTreeSet<Action>) -> Result<()> {
        for (a, b, c) in self.entries() {
            for x in [a, b] {
                if control.contains(x) {
                    return Err(Error::Comm(format!("γ(a,c) = δ required for control action c = {x} (entry {a} * {b})")));
                }
                if matches!(x, Action::ControlTrace { .. }) {
                    return Err(Error::Comm(format!("γ({a},{b}) = δ required: {x} is a control trace")));
                }
                if matches!(x, Action::Pcr(_)) {
                    return Err(Error::Comm(format!("γ({a},{b}) = δ required: {x} is a creation request")));
                }
            }
            if control.contains(c) || matches!(c, Action::ControlTrace { .. }) {
                return Err(Error::Comm(format!("γ({a},{b}) = {c} may not yield a control action or its trace")));
            }
            if matches!(c, Action::Pcr(_)) {
                return Err(Error::Comm(format!("γ({a},{b}) = {c} may not yield a creation request")));
            }
        }
        let mut universe: BTreeSet<Action> = alphabet.clone();
        universe.extend(self.mentioned());
        let universe: Vec<Action> = universe.into_iter().collect();
        let g = |x: Option<&Action>, y: Option<&Action>| -> Option<Action> {
            match (x, y) {
                (Some(x), Some(y)) => self.gamma(x, y).cloned(),
                _ => None,
            }
        };
        for a in &universe {
            for b in &universe {
                let ab = self.gamma(a, b).cloned();
                for c in &universe {
                    let left = g(ab.as_ref(), Some(c));
                    let bc = self.gamma(b, c).cloned();
                    let right = g(Some(a), bc.as_ref());
                    if left != right {
                        let show = |x: &Option<Action>| x.as_ref().map_or("delta".to_string(), |x| x.to_string());
                        return Err(Error::Comm(format!(
                            "associativity fails on ({a}, {b}, {c}): γ(γ(a,b),c) = {} but γ(a,γ(b,c)) = {}",
                            show(&left),
                            show(&right)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
