pub mod dc;
pub mod fixture;
pub mod repair;
pub mod shapley;
pub mod table;
pub mod value;

pub use dc::{parse_dc, parse_dcs, violations, DcError, DenialConstraint, ParseError};
pub use repair::{
    indicator, reference_repair, RepairAlgorithm, RepairError, RepairTask, TaskError,
};
pub use shapley::{
    rank, shapley_cells_exact, shapley_cells_sampled, shapley_constraints, Imputation, Player,
    Ranking, SamplerConfig, ShapleyError, ShapleyReport,
};
pub use table::{
    column_distribution, diff_tables, mask_cells, parse_table, CellChange, CellPos, CellRef,
    ColumnDistribution, Table, TableDoc, TableError,
};
pub use value::{Decimal, Value};
