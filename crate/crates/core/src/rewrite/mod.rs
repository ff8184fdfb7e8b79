//! Axiom-driven normalization: canonical forms, summand relations, head
//! normal forms, elimination of strategic interleaving and reduction of
//! recursive specifications.

mod canon;
mod expand;
mod hnf;
mod summand;

pub use canon::{CanonTerm, Menu, Summand, denote_menu, is_proper_basic, normalize};
pub use expand::{Elimination, Reduction, eliminate_si, reduce_recursion};
pub use hnf::{HMenu, HSummand, Hnf, head_normal_form, menu_term, unfold};
pub use summand::{psummand, summand};
