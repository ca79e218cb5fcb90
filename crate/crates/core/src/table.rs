//! In-memory tables: CSV ingestion, diffing, masking and column
//! distributions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("record {record} has {found} fields, expected {expected}")]
    Arity {
        record: usize,
        expected: usize,
        found: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid cell reference: {0}")]
    Ref(String),
    #[error("csv error: {0}")]
    Csv(String),
}

/// Address of one cell. Rows are 1-based, matching `t1..tn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellRef {
    pub row: usize,
    pub attr: String,
}

impl CellRef {
    pub fn new(row: usize, attr: impl Into<String>) -> CellRef {
        CellRef {
            row,
            attr: attr.into(),
        }
    }

    /// Parses `ROW:ATTR`, e.g. `5:Country`.
    pub fn parse(s: &str) -> Result<CellRef, TableError> {
        let (row, attr) = s
            .split_once(':')
            .ok_or_else(|| TableError::Ref(format!("expected ROW:ATTR, got {s:?}")))?;
        let row: usize = row
            .trim()
            .parse()
            .map_err(|_| TableError::Ref(format!("bad row index in {s:?}")))?;
        if row == 0 || attr.trim().is_empty() {
            return Err(TableError::Ref(format!("bad cell reference {s:?}")));
        }
        Ok(CellRef::new(row, attr.trim()))
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}[{}]", self.row, self.attr)
    }
}

/// One repaired cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellChange {
    #[serde(rename = "ref")]
    pub cell: CellRef,
    pub before: Value,
    pub after: Value,
}

/// Zero-based cell coordinates for hot paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellPos {
    pub row: usize,
    pub col: usize,
}

/// A table with a fixed schema and row-major cells.
///
/// Tables are values: every operation that "changes" a table returns a new
/// one. The schema is shared between copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    schema: Arc<[String]>,
    cells: Vec<Value>,
}

impl Table {
    pub fn new(schema: Vec<String>, rows: Vec<Vec<Value>>) -> Result<Table, TableError> {
        check_schema(&schema)?;
        let width = schema.len();
        let mut cells = Vec::with_capacity(width * rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(TableError::Arity {
                    record: i + 1,
                    expected: width,
                    found: row.len(),
                });
            }
            cells.extend(row);
        }
        Ok(Table {
            schema: schema.into(),
            cells,
        })
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn width(&self) -> usize {
        self.schema.len()
    }

    pub fn row_count(&self) -> usize {
        self.cells.len() / self.width()
    }

    pub fn col_index(&self, attr: &str) -> Option<usize> {
        self.schema.iter().position(|a| a == attr)
    }

    /// Zero-based row slice.
    pub fn row(&self, idx: usize) -> &[Value] {
        let w = self.width();
        &self.cells[idx * w..(idx + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Value]> {
        self.cells.chunks(self.width())
    }

    pub fn get(&self, pos: CellPos) -> &Value {
        &self.cells[pos.row * self.width() + pos.col]
    }

    pub fn set(&mut self, pos: CellPos, value: Value) {
        let w = self.width();
        self.cells[pos.row * w + pos.col] = value;
    }

    pub fn resolve(&self, cell: &CellRef) -> Result<CellPos, TableError> {
        if cell.row == 0 || cell.row > self.row_count() {
            return Err(TableError::Ref(format!(
                "{cell}: row out of range 1..={}",
                self.row_count()
            )));
        }
        let col = self
            .col_index(&cell.attr)
            .ok_or_else(|| TableError::Ref(format!("{cell}: unknown attribute")))?;
        Ok(CellPos {
            row: cell.row - 1,
            col,
        })
    }

    pub fn cell_ref(&self, pos: CellPos) -> CellRef {
        CellRef::new(pos.row + 1, self.schema[pos.col].clone())
    }

    pub fn value(&self, cell: &CellRef) -> Result<&Value, TableError> {
        Ok(self.get(self.resolve(cell)?))
    }

    /// Returns a copy with one cell replaced.
    pub fn with_value(&self, cell: &CellRef, value: Value) -> Result<Table, TableError> {
        let pos = self.resolve(cell)?;
        let mut out = self.clone();
        out.set(pos, value);
        Ok(out)
    }

    /// All cell positions in (row, attribute position) order.
    pub fn positions(&self) -> impl Iterator<Item = CellPos> + '_ {
        let w = self.width();
        (0..self.cells.len()).map(move |i| CellPos {
            row: i / w,
            col: i % w,
        })
    }

    pub fn same_shape(&self, other: &Table) -> bool {
        self.schema == other.schema && self.cells.len() == other.cells.len()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // Writing into a Vec cannot fail.
        w.write_record(self.schema.iter()).expect("in-memory write");
        for row in self.rows() {
            w.write_record(row.iter().map(Value::to_field))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn check_schema(schema: &[String]) -> Result<(), TableError> {
    if schema.is_empty() {
        return Err(TableError::Schema("table has no attributes".into()));
    }
    let mut seen = BTreeSet::new();
    for a in schema {
        if a.is_empty() {
            return Err(TableError::Schema("empty attribute name".into()));
        }
        if !seen.insert(a.as_str()) {
            return Err(TableError::Schema(format!("duplicate attribute {a:?}")));
        }
    }
    Ok(())
}

/// Parses comma-separated, double-quoted UTF-8 CSV with a header record.
/// LF and CRLF line endings are both accepted. A blank line is a record with
/// a single empty field.
pub fn parse_table(csv_text: &str) -> Result<Table, TableError> {
    let text = quote_blank_lines(csv_text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(TableError::Schema("empty input".into())),
        Some(r) => r.map_err(|e| TableError::Csv(e.to_string()))?,
    };
    let schema: Vec<String> = header.iter().map(str::to_owned).collect();
    check_schema(&schema)?;
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| TableError::Csv(e.to_string()))?;
        if rec.len() != schema.len() {
            return Err(TableError::Arity {
                record: i + 2,
                expected: schema.len(),
                found: rec.len(),
            });
        }
        rows.push(rec.iter().map(Value::from_field).collect());
    }
    Table::new(schema, rows)
}

// The csv reader skips empty lines; turn each blank line outside a quoted
// field into an explicit empty field so it survives as a record.
fn quote_blank_lines(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    let mut in_quotes = false;
    for line in text.split_inclusive('\n') {
        let body = line.trim_end_matches(['\n', '\r']);
        if body.is_empty() && !in_quotes && line.ends_with('\n') {
            out.push_str("\"\"");
        }
        out.push_str(line);
        in_quotes ^= body.bytes().filter(|&b| b == b'"').count() % 2 == 1;
    }
    out
}

/// Cell-level differences, ordered by (row, attribute position).
pub fn diff_tables(dirty: &Table, clean: &Table) -> Result<Vec<CellChange>, TableError> {
    if dirty.schema != clean.schema {
        return Err(TableError::Shape("schemas differ".into()));
    }
    if dirty.row_count() != clean.row_count() {
        return Err(TableError::Shape(format!(
            "row counts differ: {} vs {}",
            dirty.row_count(),
            clean.row_count()
        )));
    }
    Ok(dirty
        .positions()
        .filter(|&p| dirty.get(p) != clean.get(p))
        .map(|p| CellChange {
            cell: dirty.cell_ref(p),
            before: dirty.get(p).clone(),
            after: clean.get(p).clone(),
        })
        .collect())
}

/// Keeps the cells in `coalition` and nulls every other cell.
pub fn mask_cells<'a>(
    table: &Table,
    coalition: impl IntoIterator<Item = &'a CellRef>,
) -> Result<Table, TableError> {
    let keep = coalition
        .into_iter()
        .map(|c| table.resolve(c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mask_positions(table, &keep))
}

pub(crate) fn mask_positions(table: &Table, keep: &[CellPos]) -> Table {
    let mut out = Table {
        schema: table.schema.clone(),
        cells: vec![Value::Null; table.cells.len()],
    };
    for &p in keep {
        out.set(p, table.get(p).clone());
    }
    out
}

/// Empirical counts of the non-null values of one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnDistribution {
    pub attr: String,
    pub weights: BTreeMap<Value, usize>,
}

impl ColumnDistribution {
    pub fn total(&self) -> usize {
        self.weights.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Most frequent value; ties go to the smallest value in canonical order.
    pub fn mode(&self) -> Option<&Value> {
        mode_of(&self.weights)
    }

    /// Draws a value with probability proportional to its count; null when
    /// the column has no non-null cells.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        let total = self.total();
        if total == 0 {
            return Value::Null;
        }
        let mut pick = rng.random_range(0..total);
        for (v, &c) in &self.weights {
            if pick < c {
                return v.clone();
            }
            pick -= c;
        }
        unreachable!("pick < total")
    }
}

pub(crate) fn mode_of(weights: &BTreeMap<Value, usize>) -> Option<&Value> {
    // BTreeMap iterates in canonical order; keep the first maximum.
    let mut best: Option<(&Value, usize)> = None;
    for (v, &c) in weights {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((v, c));
        }
    }
    best.map(|(v, _)| v)
}

pub fn column_distribution(table: &Table, attr: &str) -> Result<ColumnDistribution, TableError> {
    let col = table
        .col_index(attr)
        .ok_or_else(|| TableError::Ref(format!("unknown attribute {attr:?}")))?;
    Ok(column_distribution_at(table, col))
}

pub(crate) fn column_distribution_at(table: &Table, col: usize) -> ColumnDistribution {
    let mut weights = BTreeMap::new();
    for row in table.rows() {
        if !row[col].is_null() {
            *weights.entry(row[col].clone()).or_insert(0) += 1;
        }
    }
    ColumnDistribution {
        attr: table.schema[col].clone(),
        weights,
    }
}

/// Two-part wire document `{schema, rows}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDoc {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl From<&Table> for TableDoc {
    fn from(t: &Table) -> Self {
        TableDoc {
            schema: t.schema.to_vec(),
            rows: t.rows().map(<[Value]>::to_vec).collect(),
        }
    }
}

impl TryFrom<TableDoc> for Table {
    type Error = TableError;

    fn try_from(doc: TableDoc) -> Result<Table, TableError> {
        Table::new(doc.schema, doc.rows)
    }
}

impl Serialize for Table {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        TableDoc::from(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Table {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let doc = TableDoc::deserialize(de)?;
        Table::try_from(doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Table {
        parse_table("A,B\na,1\na,2\nb,\n").unwrap()
    }

    #[test]
    fn parses_minimal_table() {
        let t = parse_table("Team,City\nRM,Madrid").unwrap();
        assert_eq!(t.schema(), ["Team", "City"]);
        assert_eq!(t.row_count(), 1);
        assert_eq!(
            t.value(&CellRef::new(1, "City")).unwrap(),
            &Value::text("Madrid")
        );
    }

    #[test]
    fn empty_field_is_null() {
        let t = parse_table("A\n\"\"\n").unwrap();
        assert_eq!(t.row_count(), 1);
        assert!(t.value(&CellRef::new(1, "A")).unwrap().is_null());
    }

    #[test]
    fn single_column_blank_line_is_null_row() {
        // A lone blank line is one empty field for a one-column schema.
        let t = parse_table("A\n\n").unwrap();
        assert_eq!(t.row_count(), 1);
        assert!(t.value(&CellRef::new(1, "A")).unwrap().is_null());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert_eq!(
            parse_table("A,B\n1,2\n3").unwrap_err(),
            TableError::Arity {
                record: 3,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_table(""), Err(TableError::Schema(_))));
        assert!(matches!(
            parse_table("A,A\n1,2"),
            Err(TableError::Schema(_))
        ));
        assert!(matches!(parse_table("A,\n1,2"), Err(TableError::Schema(_))));
    }

    #[test]
    fn crlf_and_quotes() {
        let t = parse_table("A,B\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n").unwrap();
        assert_eq!(
            t.value(&CellRef::new(1, "A")).unwrap(),
            &Value::text("x, y")
        );
        assert_eq!(
            t.value(&CellRef::new(1, "B")).unwrap(),
            &Value::text("say \"hi\"")
        );
        assert_eq!(parse_table(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn diff_identity_and_shape() {
        let t = small();
        assert!(diff_tables(&t, &t).unwrap().is_empty());
        let shorter = parse_table("A,B\na,1\n").unwrap();
        assert!(matches!(
            diff_tables(&t, &shorter),
            Err(TableError::Shape(_))
        ));
        let other_schema = parse_table("A,C\na,1\na,2\nb,\n").unwrap();
        assert!(matches!(
            diff_tables(&t, &other_schema),
            Err(TableError::Shape(_))
        ));
    }

    #[test]
    fn diff_orders_by_row_then_column() {
        let t = small();
        let c = parse_table("A,B\nz,1\na,3\nb,4\n").unwrap();
        let d = diff_tables(&t, &c).unwrap();
        let refs: Vec<String> = d.iter().map(|c| c.cell.to_string()).collect();
        assert_eq!(refs, ["t1[A]", "t2[B]", "t3[B]"]);
        assert_eq!(d[2].before, Value::Null);
    }

    #[test]
    fn masking() {
        let t = small();
        let all: Vec<CellRef> = t.positions().map(|p| t.cell_ref(p)).collect();
        assert_eq!(mask_cells(&t, &all).unwrap(), t);
        let none = mask_cells(&t, &[]).unwrap();
        assert!(none.rows().flatten().all(Value::is_null));
        assert_eq!(none.row_count(), 3);
        let one = mask_cells(&t, &[CellRef::new(2, "B")]).unwrap();
        assert_eq!(one.rows().flatten().filter(|v| !v.is_null()).count(), 1);
        assert!(matches!(
            mask_cells(&t, &[CellRef::new(9, "B")]),
            Err(TableError::Ref(_))
        ));
    }

    #[test]
    fn distributions() {
        let t = small();
        let d = column_distribution(&t, "A").unwrap();
        assert_eq!(
            d.weights,
            BTreeMap::from([(Value::text("a"), 2), (Value::text("b"), 1)])
        );
        assert_eq!(d.mode(), Some(&Value::text("a")));
        let b = column_distribution(&t, "B").unwrap();
        assert_eq!(b.total(), 2);
        // tie between 1 and 2 goes to the smaller value
        assert_eq!(b.mode(), Some(&Value::number(1)));
        let nulls = parse_table("A\n\n\n").unwrap();
        assert!(column_distribution(&nulls, "A").unwrap().is_empty());
        assert!(matches!(
            column_distribution(&t, "Z"),
            Err(TableError::Ref(_))
        ));
    }

    #[test]
    fn cell_ref_parsing() {
        assert_eq!(
            CellRef::parse("5:Country").unwrap(),
            CellRef::new(5, "Country")
        );
        for bad in ["5", "0:A", "x:A", "3:"] {
            assert!(CellRef::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn wire_doc_round_trip() {
        let t = small();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"schema":["A","B"],"rows":[["a",1],["a",2],["b",null]]}"#
        );
        let back: Table = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Table>(r#"{"schema":["A"],"rows":[[1,2]]}"#).is_err());
    }
}
