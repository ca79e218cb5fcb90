mod commands;
mod error;
mod render;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xrepair_core::shapley::Imputation;

/// Repair tables under denial constraints and explain individual repairs.
#[derive(Parser)]
#[command(name = "xrepair", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Dirty table as CSV with a header row.
    table: PathBuf,
    /// Constraint file, one constraint per line.
    constraints: PathBuf,
    /// "reference" or the name of an adapter from --adapters.
    #[arg(long, default_value = "reference")]
    algorithm: String,
    /// Adapter registry (JSON).
    #[arg(long, env = "XREPAIR_ADAPTERS")]
    adapters: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Constraints,
    Cells,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Sampling,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Repair the table and write the clean CSV plus a change list.
    Repair {
        #[command(flatten)]
        inputs: Inputs,
        /// Clean CSV destination; the change list goes to <OUT>.changes.json.
        /// Without it the CSV goes to stdout and the changes to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attribute the repair of one cell to constraints or to table cells.
    Explain {
        #[command(flatten)]
        inputs: Inputs,
        /// Target cell as ROW:ATTR, rows counted from 1.
        #[arg(long)]
        cell: String,
        #[arg(long, value_enum, default_value = "constraints")]
        mode: Mode,
        /// Cell mode only.
        #[arg(long, value_enum, default_value = "sampling")]
        method: Method,
        /// Permutations per cell when sampling.
        #[arg(long, default_value_t = 1000)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "column-distribution")]
        imputation: Imputation,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Count violations of each constraint on the table.
    Validate {
        /// Table as CSV with a header row.
        table: PathBuf,
        /// Constraint file.
        constraints: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(
            long,
            alias = "addr",
            env = "XREPAIR_BIND",
            default_value = "127.0.0.1:8080"
        )]
        bind: SocketAddr,
        #[arg(long, env = "XREPAIR_DATA_DIR", default_value = "xrepair-data")]
        data_dir: PathBuf,
        /// Threads per explanation job.
        #[arg(long, env = "XREPAIR_WORKERS", default_value_t = 1)]
        workers: usize,
        #[arg(long, env = "XREPAIR_ADAPTERS")]
        adapters: Option<PathBuf>,
    },
    /// Speak the adapter protocol on stdin/stdout using the reference repair.
    Adapter,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Repair { inputs, out } => commands::repair(&inputs, out.as_deref()),
        Command::Explain {
            inputs,
            cell,
            mode,
            method,
            m,
            seed,
            imputation,
            workers,
            format,
        } => commands::explain(
            &inputs,
            &commands::ExplainArgs {
                cell,
                cells: matches!(mode, Mode::Cells),
                exact: matches!(method, Method::Exact),
                m,
                seed,
                imputation,
                workers,
                json: matches!(format, Format::Json),
            },
        ),
        Command::Validate { table, constraints } => commands::validate(&table, &constraints),
        Command::Serve {
            bind,
            data_dir,
            workers,
            adapters,
        } => commands::serve(bind, data_dir, workers, adapters.as_deref()),
        Command::Adapter => commands::adapter(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("xrepair: {e}");
            e.exit_code()
        }
    }
}
