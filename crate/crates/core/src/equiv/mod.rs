//! Bounded behavioural comparison: formula suites, distinguishing formulas,
//! the relator, bounded simulation checks and randomized law suites.

mod compare;
mod gen;
mod laws;
mod relator;
mod suite;

pub use compare::{
    compare, compare_both, describe, find_distinguishing_formula, Bounds, Direction, Verdict, Witness,
};
pub use gen::{random_tree, random_tree_with, sample_truth, ProgramGen};
pub use laws::{
    congruence_spot_check, law_modality, law_suite, relator_laws, CongruenceParams, LawParams, LawResult,
};
pub use relator::{
    check_simulation_bounded, relator_check, right_set, ClauseOutcome, ClauseResult, Provenance, Relation,
    RelationError, RelatorError, RelatorOutcome, SimulationBounds, SimulationReport, Valuation, ValuationFamily,
};
pub use suite::{enumerate_basic_formulas, FormulaSuite, Pools, SuiteError};

#[cfg(test)]
mod tests;
