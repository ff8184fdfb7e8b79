//! A workbench for probabilistic ACP with guarded recursion and
//! probabilistic strategic interleaving.
//!
//! * [`meadow`]: exact rationals with total inverse and signum.
//! * [`syntax`]: terms, parser, printer, guardedness, configuration files.
//! * [`rewrite`]: canonical forms, head normal forms, elimination of
//!   strategic interleaving and reduction of recursive specifications.
//! * [`semantics`]: probabilistic and action steps, transition systems.
//! * [`bisim`]: probabilistic bisimulation by partition refinement.
//! * [`strategy`]: interleaving strategies.
//! * [`simulate`]: seeded Monte-Carlo runs.

pub mod bisim;
pub mod context;
pub mod error;
pub mod generate;
pub mod meadow;
pub mod rewrite;
pub mod semantics;
pub mod simulate;
pub mod strategy;
pub mod syntax;

pub use context::{Context, DeadlockMode};
pub use error::{Error, Result};
pub use meadow::Rat;
pub use syntax::{Action, Term};
