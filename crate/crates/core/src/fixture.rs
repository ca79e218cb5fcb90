//! The six-row football table used throughout the tests, examples and
//! benchmarks.

use crate::dc::{parse_dcs, DenialConstraint};
use crate::table::{parse_table, CellRef, Table};

pub const DIRTY_CSV: &str = include_str!("../fixtures/laliga/dirty.csv");
pub const CLEAN_CSV: &str = include_str!("../fixtures/laliga/clean.csv");
pub const CONSTRAINTS_DC: &str = include_str!("../fixtures/laliga/constraints.dc");

pub fn dirty() -> Table {
    parse_table(DIRTY_CSV).expect("fixture parses")
}

pub fn clean() -> Table {
    parse_table(CLEAN_CSV).expect("fixture parses")
}

pub fn constraints() -> Vec<DenialConstraint> {
    parse_dcs(CONSTRAINTS_DC).expect("fixture parses")
}

/// `t5[Country]`, the cell the repair turns from "España" into "Spain".
pub fn target() -> CellRef {
    CellRef::new(5, "Country")
}

/// A corpus of constraints in assorted styles, including both the printed
/// and the two-tuple form of the place constraint.
pub const CORPUS_DC: &str = include_str!("../fixtures/corpus.dc");
