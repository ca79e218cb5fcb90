use std::fmt;
use std::process::ExitCode;

use xrepair_core::repair::{RepairError, TaskError};
use xrepair_core::shapley::ShapleyError;
use xrepair_core::{DcError, TableError};

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input: exit 2.
    Input(String),
    /// The repair algorithm failed: exit 3.
    Repair(String),
    /// The requested cell was not changed by the repair: exit 4.
    NotRepaired(String),
    /// Ports, directories and the like: exit 5.
    Environment(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) => 2,
            CliError::Repair(_) => 3,
            CliError::NotRepaired(_) => 4,
            CliError::Environment(_) => 5,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m)
            | CliError::Repair(m)
            | CliError::NotRepaired(m)
            | CliError::Environment(m) => f.write_str(m),
        }
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        CliError::Input(format!("table: {e}"))
    }
}

impl From<DcError> for CliError {
    fn from(e: DcError) -> Self {
        CliError::Input(format!("constraints: {e}"))
    }
}

impl From<RepairError> for CliError {
    fn from(e: RepairError) -> Self {
        match e {
            RepairError::Constraint(dc) => dc.into(),
            RepairError::Rule { .. } => CliError::Input(e.to_string()),
            _ => CliError::Repair(e.to_string()),
        }
    }
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::Table(t) => t.into(),
            TaskError::Repair(r) => r.into(),
            TaskError::NotRepaired(_) => CliError::NotRepaired(e.to_string()),
        }
    }
}

impl From<ShapleyError> for CliError {
    fn from(e: ShapleyError) -> Self {
        match e {
            ShapleyError::Repair(r) => r.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}
