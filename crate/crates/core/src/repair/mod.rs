//! Repair algorithms are black boxes: `(constraints, dirty table) -> table`.
//!
//! The explanation engine only ever calls [`RepairAlgorithm::repair`]; it
//! never looks inside. Two implementations ship here: the rule-based
//! [`ReferenceRepair`] and [`ExternalRepair`], which drives any executable
//! speaking the line-delimited adapter protocol.

mod adapter;
mod reference;
mod task;

use thiserror::Error;

use crate::dc::{DcError, DenialConstraint};
use crate::table::{Table, TableError};

pub use adapter::{serve_adapter, AdapterConfig, AdapterRequest, AdapterResponse, ExternalRepair};
pub use reference::{reference_repair, ReferenceRepair, Rule};
pub use task::{indicator, RepairTask, TaskError};

#[derive(Debug, Clone, Error)]
pub enum RepairError {
    #[error(transparent)]
    Constraint(#[from] DcError),
    #[error("rule for {constraint}: {message}")]
    Rule { constraint: String, message: String },
    #[error("no fixpoint after {sweeps} sweeps")]
    Fixpoint { sweeps: usize, last: Box<Table> },
    #[error("black-box failure: {0}")]
    BlackBox(BlackBoxFailure),
    #[error("repair contract violated: {0}")]
    Contract(String),
}

#[derive(Debug, Clone, Error)]
pub enum BlackBoxFailure {
    #[error("could not start adapter: {0}")]
    Spawn(String),
    #[error("timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("adapter exited ({status}); stderr: {stderr}")]
    Exited { status: String, stderr: String },
    #[error("malformed adapter output: {0}")]
    Malformed(String),
    #[error("adapter reported: {0}")]
    Reported(String),
    #[error("i/o error talking to adapter: {0}")]
    Io(String),
}

impl From<BlackBoxFailure> for RepairError {
    fn from(f: BlackBoxFailure) -> Self {
        RepairError::BlackBox(f)
    }
}

/// A deterministic repair algorithm. Implementations must return a table
/// with the input's schema and row count, and must return the input
/// unchanged when given no constraints.
pub trait RepairAlgorithm: Send + Sync {
    fn name(&self) -> &str;

    fn repair(&self, constraints: &[DenialConstraint], dirty: &Table)
        -> Result<Table, RepairError>;
}

impl<A: RepairAlgorithm + ?Sized> RepairAlgorithm for &A {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn repair(
        &self,
        constraints: &[DenialConstraint],
        dirty: &Table,
    ) -> Result<Table, RepairError> {
        (**self).repair(constraints, dirty)
    }
}

impl<A: RepairAlgorithm + ?Sized> RepairAlgorithm for std::sync::Arc<A> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn repair(
        &self,
        constraints: &[DenialConstraint],
        dirty: &Table,
    ) -> Result<Table, RepairError> {
        (**self).repair(constraints, dirty)
    }
}

/// Runs `alg` and checks the shape half of the contract.
pub fn checked_repair(
    alg: &dyn RepairAlgorithm,
    constraints: &[DenialConstraint],
    dirty: &Table,
) -> Result<Table, RepairError> {
    let out = alg.repair(constraints, dirty)?;
    if out.schema() != dirty.schema() {
        return Err(RepairError::Contract(format!(
            "{} changed the schema",
            alg.name()
        )));
    }
    if out.row_count() != dirty.row_count() {
        return Err(RepairError::Contract(format!(
            "{} returned {} rows for {} input rows",
            alg.name(),
            out.row_count(),
            dirty.row_count()
        )));
    }
    Ok(out)
}

/// Runs `alg` twice on the same inputs and fails if the outputs differ.
pub fn probe_determinism(
    alg: &dyn RepairAlgorithm,
    constraints: &[DenialConstraint],
    probe: &Table,
) -> Result<(), RepairError> {
    let first = checked_repair(alg, constraints, probe)?;
    let second = checked_repair(alg, constraints, probe)?;
    if first != second {
        return Err(RepairError::Contract(format!(
            "{} is not deterministic: two runs on the probe table differ",
            alg.name()
        )));
    }
    Ok(())
}

impl From<TableError> for RepairError {
    fn from(e: TableError) -> Self {
        RepairError::Contract(e.to_string())
    }
}
