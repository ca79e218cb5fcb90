//! Shapley attribution of a single repaired cell, over constraints or over
//! table cells.

mod exact;
mod report;
mod sampling;

use thiserror::Error;

use crate::repair::RepairError;

pub use exact::{
    cell_players, shapley_cells_exact, shapley_cells_exact_with, shapley_constraints,
    shapley_constraints_with, shapley_from_table, ExactOptions,
};
pub use report::{
    natural_cmp, rank, Attribution, Imputation, Method, Mode, Player, PlayerValue, Ranking,
    Rational, ShapleyReport,
};
pub use sampling::{player_rng, shapley_cells_sampled, SamplerConfig};

pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, Error)]
pub enum ShapleyError {
    #[error("{players} players exceed the enumeration cap of {cap}")]
    Cap { players: usize, cap: usize },
    #[error("invalid argument: {0}")]
    Arg(String),
    #[error(transparent)]
    Repair(#[from] RepairError),
}

pub(crate) fn run_in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(f)
}
