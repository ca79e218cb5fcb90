use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use xrepair_core::repair::{
    checked_repair, serve_adapter, AdapterConfig, ExternalRepair, ReferenceRepair, RepairAlgorithm,
    RepairTask,
};
use xrepair_core::shapley::{
    shapley_cells_exact_with, shapley_cells_sampled, shapley_constraints_with, ExactOptions,
    Imputation, SamplerConfig,
};
use xrepair_core::{
    diff_tables, parse_dcs, parse_table, violations, CellRef, DenialConstraint, Table,
};
use xrepair_service::{ServeError, ServiceConfig};

use crate::error::CliError;
use crate::render;
use crate::Inputs;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load(table: &Path, constraints: &Path) -> Result<(Table, Vec<DenialConstraint>), CliError> {
    let t = parse_table(&read(table)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", table.display())))?;
    let dcs = parse_dcs(&read(constraints)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", constraints.display())))?;
    for dc in &dcs {
        dc.bind(t.schema())?;
    }
    Ok((t, dcs))
}

fn load_adapters(path: Option<&Path>) -> Result<Vec<AdapterConfig>, CliError> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => AdapterConfig::load_registry(&read(p)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
    }
}

fn algorithm(inputs: &Inputs) -> Result<Arc<dyn RepairAlgorithm>, CliError> {
    if inputs.algorithm == "reference" {
        return Ok(Arc::new(ReferenceRepair::default()));
    }
    let config = load_adapters(inputs.adapters.as_deref())?
        .into_iter()
        .find(|a| a.name == inputs.algorithm)
        .ok_or_else(|| CliError::Input(format!("unknown algorithm {:?}", inputs.algorithm)))?;
    Ok(Arc::new(ExternalRepair::spawn(config)?))
}

pub fn repair(inputs: &Inputs, out: Option<&Path>) -> Result<(), CliError> {
    let (dirty, dcs) = load(&inputs.table, &inputs.constraints)?;
    let alg = algorithm(inputs)?;
    let clean = checked_repair(&*alg, &dcs, &dirty)?;
    let changes = diff_tables(&dirty, &clean)?;
    match out {
        Some(path) => {
            let io_err = |e: io::Error| CliError::Environment(format!("{}: {e}", path.display()));
            fs::write(path, clean.to_csv()).map_err(io_err)?;
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".changes.json");
            let json = serde_json::to_string_pretty(&changes).expect("changes serialize");
            fs::write(PathBuf::from(sidecar), json + "\n").map_err(io_err)?;
        }
        None => {
            print!("{}", clean.to_csv());
            for c in &changes {
                eprintln!("{}: {} -> {}", c.cell, c.before, c.after);
            }
        }
    }
    Ok(())
}

pub struct ExplainArgs {
    pub cell: String,
    pub cells: bool,
    pub exact: bool,
    pub m: usize,
    pub seed: u64,
    pub imputation: Imputation,
    pub workers: usize,
    pub json: bool,
}

pub fn explain(inputs: &Inputs, args: &ExplainArgs) -> Result<(), CliError> {
    let (dirty, dcs) = load(&inputs.table, &inputs.constraints)?;
    let target = CellRef::parse(&args.cell)?;
    let alg = algorithm(inputs)?;
    let task = RepairTask::from_repair(&*alg, dcs, dirty, target)?;
    let opts = ExactOptions {
        workers: args.workers,
        ..ExactOptions::default()
    };
    let report = if !args.cells {
        shapley_constraints_with(&*alg, &task, opts)?
    } else if args.exact {
        shapley_cells_exact_with(&*alg, &task, opts)?
    } else {
        let cfg = SamplerConfig::new(args.m, args.seed)
            .imputation(args.imputation)
            .workers(args.workers);
        shapley_cells_sampled(&*alg, &task, cfg)?
    };
    let text = if args.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        render::report(&report)
    };
    io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| CliError::Environment(e.to_string()))
}

pub fn validate(table: &Path, constraints: &Path) -> Result<(), CliError> {
    let (t, dcs) = load(table, constraints)?;
    let mut rows = Vec::new();
    for dc in &dcs {
        rows.push((dc.id.clone(), violations(dc, &t)?.len()));
    }
    print!("{}", render::violation_counts(&rows));
    Ok(())
}

pub fn serve(
    bind: SocketAddr,
    data_dir: PathBuf,
    workers: usize,
    adapters: Option<&Path>,
) -> Result<(), CliError> {
    let mut config = ServiceConfig::new(data_dir);
    config.workers = workers;
    config.adapters = load_adapters(adapters)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Environment(e.to_string()))?;
    rt.block_on(xrepair_service::serve(config, bind, |addr| {
        eprintln!("xrepair: listening on http://{addr}");
    }))
    .map_err(|e| match e {
        ServeError::Startup(xrepair_service::StartupError::Adapter { .. }) => {
            CliError::Repair(e.to_string())
        }
        other => CliError::Environment(other.to_string()),
    })
}

pub fn adapter() -> Result<(), CliError> {
    let stdin = io::stdin().lock();
    let stdout = io::stdout().lock();
    serve_adapter(&ReferenceRepair::default(), stdin, stdout)
        .map_err(|e| CliError::Environment(e.to_string()))
}
