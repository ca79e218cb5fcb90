//! Inputs shared by the benchmarks.

use xrepair_core::{fixture, Table, Value};

/// The fixture table stacked `copies` times. Team names get a per-copy
/// suffix and years a per-copy offset so blocks never collide on C4.
pub fn stacked_fixture(copies: usize) -> Table {
    let base = fixture::dirty();
    let team = base.col_index("Team").expect("Team column");
    let year = base.col_index("Year").expect("Year column");
    let mut rows = Vec::with_capacity(base.row_count() * copies);
    for k in 0..copies {
        for row in base.rows() {
            let mut row = row.to_vec();
            if let Value::Text(name) = &row[team] {
                row[team] = Value::text(format!("{name} {k}"));
            }
            if let Ok(y) = row[year].to_field().parse::<i64>() {
                row[year] = Value::number(y + 100 * k as i64);
            }
            rows.push(row);
        }
    }
    Table::new(base.schema().to_vec(), rows).expect("same schema")
}

/// `n` synthetic constraints in the grammar, cycling through the operators.
pub fn constraint_text(n: usize) -> String {
    const OPS: [&str; 6] = ["=", "!=", "<", "<=", ">", ">="];
    (0..n)
        .map(|i| {
            format!(
                "D{i}: !(t1.A{} = t2.A{} & t1.B{i} {} t2.B{i} & t1.C != \"x{i}\" & t1.N > {i}.5)\n",
                i % 7,
                i % 7,
                OPS[i % OPS.len()]
            )
        })
        .collect()
}
