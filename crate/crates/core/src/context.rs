//! Everything a term is interpreted against: alphabet, communication,
//! control actions, process creation, registered specs and strategies.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::strategy::{Cyclic, Strategy, Uniform};
use crate::syntax::guard::{GuardVerdict, check_guarded};
use crate::syntax::{Action, CommFunction, Name, RecSpec, SpecRef, StrategyRef, Term, name};

/// What happens when the process whose turn it is cannot act.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DeadlockMode {
    /// The whole interleaving deadlocks at once.
    #[default]
    Immediate,
    /// The interleaving deadlocks after the remaining processes are done.
    Deferred,
}

/// Default inlining bound for guardedness checks.
pub const DEFAULT_GUARD_BOUND: usize = 16;

#[derive(Clone)]
pub struct Context {
    /// Declared plain actions; `None` accepts any identifier.
    pub alphabet: Option<BTreeSet<Name>>,
    /// Declared data for process creation; `None` accepts any identifier.
    pub data: Option<BTreeSet<Name>>,
    pub control: BTreeSet<Action>,
    pub comm: CommFunction,
    pub creation: BTreeMap<Name, Term>,
    pub deadlock_mode: DeadlockMode,
    pub guard_bound: usize,
    specs: BTreeMap<Name, SpecRef>,
    strategies: BTreeMap<Name, StrategyRef>,
}

impl std::fmt::Debug for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Context")
            .field("alphabet", &self.alphabet)
            .field("data", &self.data)
            .field("control", &self.control)
            .field("specs", &self.specs.keys().collect::<Vec<_>>())
            .field("strategies", &self.strategies.keys().collect::<Vec<_>>())
            .field("deadlock_mode", &self.deadlock_mode)
            .finish_non_exhaustive()
    }
}

impl Default for Context {
    fn default() -> Self {
        Context::new()
    }
}

impl Context {
    /// Open alphabet, no communication, no strategies.
    pub fn new() -> Context {
        Context {
            alphabet: None,
            data: None,
            control: BTreeSet::new(),
            comm: CommFunction::new(),
            creation: BTreeMap::new(),
            deadlock_mode: DeadlockMode::Immediate,
            guard_bound: DEFAULT_GUARD_BOUND,
            specs: BTreeMap::new(),
            strategies: BTreeMap::new(),
        }
    }

    /// [`Context::new`] with `cyclic` and `uniform` registered.
    pub fn with_builtins() -> Context {
        let mut ctx = Context::new();
        ctx.register_strategy("cyclic", Arc::new(Cyclic)).unwrap();
        ctx.register_strategy("uniform", Arc::new(Uniform)).unwrap();
        ctx
    }

    pub fn declare_actions<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) {
        self.alphabet.get_or_insert_with(BTreeSet::new).extend(names.into_iter().map(name));
    }

    pub fn declare_data<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) {
        self.data.get_or_insert_with(BTreeSet::new).extend(names.into_iter().map(name));
    }

    pub fn knows_action(&self, a: &str) -> bool {
        self.alphabet.as_ref().is_none_or(|s| s.contains(a))
    }

    pub fn knows_datum(&self, d: &str) -> bool {
        self.data.as_ref().is_none_or(|s| s.contains(d))
    }

    pub fn gamma(&self, a: &Action, b: &Action) -> Option<&Action> {
        self.comm.gamma(a, b)
    }

    pub fn register_strategy(&mut self, strategy_name: &str, strategy: Arc<dyn Strategy>) -> Result<StrategyRef> {
        if self.strategies.contains_key(strategy_name) {
            return Err(Error::Config(format!("strategy `{strategy_name}` is already registered")));
        }
        let controls = strategy.control_actions();
        for c in &controls {
            if let Action::Control { op, .. } = c {
                if self.alphabet.as_ref().is_some_and(|s| s.contains(op)) {
                    return Err(Error::Config(format!(
                        "control action {c} of strategy `{strategy_name}` collides with plain action `{op}`"
                    )));
                }
            }
        }
        self.control.extend(controls);
        let r = StrategyRef::new(strategy_name, strategy);
        self.strategies.insert(r.name.clone(), r.clone());
        Ok(r)
    }

    pub fn strategy(&self, strategy_name: &str) -> Option<&StrategyRef> {
        self.strategies.get(strategy_name)
    }

    pub fn strategies(&self) -> impl Iterator<Item = &StrategyRef> {
        self.strategies.values()
    }

    /// Registers a specification after checking every right-hand side only
    /// uses the spec's own variables and that the spec is shown guarded.
    pub fn register_spec(&mut self, spec: RecSpec) -> Result<SpecRef> {
        if self.specs.contains_key(&spec.name) {
            return Err(Error::Config(format!("spec `{}` is already defined", spec.name)));
        }
        for (x, t) in &spec.equations {
            if let Some(y) = t.free_vars().into_iter().find(|y| !spec.equations.contains_key(y)) {
                return Err(Error::Config(format!("spec `{}`: equation for {x} uses unknown variable {y}", spec.name)));
            }
        }
        if let GuardVerdict::NotShownGuarded(x) = check_guarded(&spec, self.guard_bound) {
            return Err(Error::Unguarded(format!("spec `{}`: variable {x} is not shown guarded", spec.name)));
        }
        let r = SpecRef::new(spec);
        self.specs.insert(r.name().clone(), r.clone());
        Ok(r)
    }

    pub fn spec(&self, spec_name: &str) -> Option<&SpecRef> {
        self.specs.get(spec_name)
    }

    pub fn specs(&self) -> impl Iterator<Item = &SpecRef> {
        self.specs.values()
    }

    pub fn creation_body(&self, d: &str) -> Result<&Term> {
        self.creation
            .get(d)
            .ok_or_else(|| Error::Config(format!("no creation body for datum `{d}`")))
    }

    /// Validates the communication table against the declared alphabet and C.
    pub fn validate_comm(&self) -> Result<()> {
        let alphabet: BTreeSet<Action> = self
            .alphabet
            .iter()
            .flatten()
            .map(|a| Action::Plain(a.clone()))
            .collect();
        if let Some(decl) = &self.alphabet {
            for (_, _, c) in self.comm.entries() {
                if let Action::Plain(n) = c {
                    if !decl.contains(n) {
                        return Err(Error::Comm(format!("result {c} is not in the declared alphabet")));
                    }
                }
            }
        }
        self.comm.validate(&alphabet, &self.control)
    }
}
