use serde::Serialize;
use thiserror::Error;

use super::{checked_repair, RepairAlgorithm, RepairError};
use crate::dc::DenialConstraint;
use crate::table::{CellPos, CellRef, Table, TableError};
use crate::value::Value;

#[derive(Debug, Clone, Error)]
pub enum TaskError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Repair(#[from] RepairError),
    #[error("{0} was not changed by the repair; only changed cells are explainable")]
    NotRepaired(CellRef),
}

/// Everything that pins down the repair indicator for one cell: the full
/// constraint set, the dirty table, the target cell and the value the full
/// repair gave it.
#[derive(Debug, Clone, Serialize)]
pub struct RepairTask {
    #[serde(serialize_with = "ser_dcs")]
    pub constraints: Vec<DenialConstraint>,
    #[serde(skip)]
    pub dirty: Table,
    pub target: CellRef,
    pub dirty_value: Value,
    pub expected: Value,
    #[serde(skip)]
    target_pos: CellPos,
}

fn ser_dcs<S: serde::Serializer>(dcs: &[DenialConstraint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(dcs.iter().map(ToString::to_string))
}

impl RepairTask {
    pub fn new(
        constraints: Vec<DenialConstraint>,
        dirty: Table,
        target: CellRef,
        expected: Value,
    ) -> Result<RepairTask, TaskError> {
        let target_pos = dirty.resolve(&target)?;
        let dirty_value = dirty.get(target_pos).clone();
        if dirty_value == expected {
            return Err(TaskError::NotRepaired(target));
        }
        Ok(RepairTask {
            constraints,
            dirty,
            target,
            dirty_value,
            expected,
            target_pos,
        })
    }

    /// Runs the full repair and builds the task for `target` from its output.
    pub fn from_repair(
        alg: &dyn RepairAlgorithm,
        constraints: Vec<DenialConstraint>,
        dirty: Table,
        target: CellRef,
    ) -> Result<RepairTask, TaskError> {
        let pos = dirty.resolve(&target)?;
        let clean = checked_repair(alg, &constraints, &dirty)?;
        let expected = clean.get(pos).clone();
        RepairTask::new(constraints, dirty, target, expected)
    }

    pub fn target_pos(&self) -> CellPos {
        self.target_pos
    }
}

/// 1 iff running `alg` on `(constraints, table)` leaves the task's target
/// cell holding the task's expected value, else 0.
pub fn indicator(
    alg: &dyn RepairAlgorithm,
    task: &RepairTask,
    constraints: &[DenialConstraint],
    table: &Table,
) -> Result<u8, RepairError> {
    let out = checked_repair(alg, constraints, table)?;
    Ok(u8::from(out.get(task.target_pos) == &task.expected))
}
