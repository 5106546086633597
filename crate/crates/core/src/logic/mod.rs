//! Formulas and the satisfaction relation.
//!
//! `M ⊨ φ` is an element of the truth space. Since effect trees are only
//! explored up to a fuel bound, [`Logic::satisfies`] returns an interval
//! that is certified to contain it.

mod formula;
mod parse;
mod sat;

pub use formula::{Family, Formula, Generated};
pub use parse::{formula, parse_formula};
pub use sat::{scheduler_grid, space_for, Logic, LogicError, SatResult};

#[cfg(test)]
mod tests;
