use std::sync::Arc;

use serde::{Deserialize, Serialize};
use xrepair_core::repair::{RepairAlgorithm, RepairTask};
use xrepair_core::shapley::{
    shapley_cells_exact_with, shapley_cells_sampled, shapley_constraints_with, ExactOptions,
    Imputation, Mode, SamplerConfig, ShapleyReport,
};
use xrepair_core::{parse_dcs, CellRef, Table, Value};

pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellMethod {
    Exact,
    #[default]
    Sampling,
}

/// Explanation options. Everything but `mode` only applies to cell mode.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExplainParams {
    pub mode: Mode,
    #[serde(default)]
    pub method: CellMethod,
    #[serde(default = "default_samples")]
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub imputation: Imputation,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Pending,
    Running,
    Done,
    Failed,
}

/// A persisted explanation job. It carries a frozen copy of everything the
/// computation needs, so later edits to the session cannot reach it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub session: String,
    pub revision: u64,
    pub target: CellRef,
    pub params: ExplainParams,
    pub status: JobStatus,
    #[serde(default)]
    pub result: Option<serde_json::Value>,
    #[serde(default)]
    pub error: Option<String>,
    pub algorithm: String,
    pub table: Table,
    pub constraints: Vec<String>,
    pub expected: Value,
}

/// What clients see of a job.
#[derive(Debug, Clone, Serialize)]
pub struct JobView<'a> {
    pub id: &'a str,
    pub session: &'a str,
    pub revision: u64,
    pub target: &'a CellRef,
    pub mode: Mode,
    pub params: &'a ExplainParams,
    pub status: JobStatus,
    pub stale: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<&'a serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<&'a str>,
}

impl JobRecord {
    pub fn view(&self, stale: bool) -> JobView<'_> {
        JobView {
            id: &self.id,
            session: &self.session,
            revision: self.revision,
            target: &self.target,
            mode: self.params.mode,
            params: &self.params,
            status: self.status,
            stale,
            result: self.result.as_ref(),
            error: self.error.as_deref(),
        }
    }

    pub fn task(&self) -> Result<RepairTask, String> {
        let dcs = parse_dcs(&self.constraints.join("\n")).map_err(|e| e.to_string())?;
        RepairTask::new(
            dcs,
            self.table.clone(),
            self.target.clone(),
            self.expected.clone(),
        )
        .map_err(|e| e.to_string())
    }
}

/// Runs a job to completion on the calling thread.
pub fn compute(
    alg: Arc<dyn RepairAlgorithm>,
    job: &JobRecord,
    workers: usize,
) -> Result<ShapleyReport, String> {
    let task = job.task()?;
    let p = &job.params;
    let exact = ExactOptions {
        workers,
        ..ExactOptions::default()
    };
    let report = match (p.mode, p.method) {
        (Mode::Constraints, _) => shapley_constraints_with(&*alg, &task, exact),
        (Mode::Cells, CellMethod::Exact) => shapley_cells_exact_with(&*alg, &task, exact),
        (Mode::Cells, CellMethod::Sampling) => shapley_cells_sampled(
            &*alg,
            &task,
            SamplerConfig::new(p.m, p.seed)
                .imputation(p.imputation)
                .workers(workers),
        ),
    };
    report.map_err(|e| e.to_string())
}
