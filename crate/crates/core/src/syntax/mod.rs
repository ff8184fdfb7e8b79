//! Term syntax: abstract syntax, parser, printer, communication function,
//! guardedness and configuration files.

pub mod comm;
pub mod config;
pub mod guard;
pub mod lexer;
pub mod parser;
pub mod printer;
mod term;

pub use comm::CommFunction;
pub use parser::{parse_term, parse_term_with_vars};
pub use printer::print_term;
pub use term::*;
