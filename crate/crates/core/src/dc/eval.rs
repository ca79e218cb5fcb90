use std::cmp::Ordering;

use serde::Serialize;

use super::{CmpOp, DcError, DenialConstraint, Term, TupleVar};
use crate::table::Table;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
enum BoundTerm {
    Cell(TupleVar, usize),
    Const(Value),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BoundPredicate {
    left: BoundTerm,
    op: CmpOp,
    right: BoundTerm,
}

/// A constraint with attribute names resolved to column positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundConstraint {
    id: String,
    predicates: Vec<BoundPredicate>,
}

/// An ordered tuple pair, 1-based, that breaches a constraint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub dc_id: String,
    pub pair: (usize, usize),
}

impl BoundConstraint {
    pub(super) fn new(dc: &DenialConstraint, schema: &[String]) -> Result<Self, DcError> {
        let bind = |t: &Term| -> Result<BoundTerm, DcError> {
            match t {
                Term::Const(v) => Ok(BoundTerm::Const(v.clone())),
                Term::Cell { var, attr } => schema
                    .iter()
                    .position(|a| a == attr)
                    .map(|col| BoundTerm::Cell(*var, col))
                    .ok_or_else(|| DcError::Bind {
                        dc: dc.id.clone(),
                        attr: attr.clone(),
                    }),
            }
        };
        let predicates = dc
            .predicates
            .iter()
            .map(|p| {
                Ok(BoundPredicate {
                    left: bind(&p.left)?,
                    op: p.op,
                    right: bind(&p.right)?,
                })
            })
            .collect::<Result<_, DcError>>()?;
        Ok(BoundConstraint {
            id: dc.id.clone(),
            predicates,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// True iff every predicate holds for `t1 := first, t2 := second`.
    /// Predicates are evaluated left to right and stop at the first false
    /// one. Any comparison involving null is false.
    pub fn violated_by<'a>(
        &'a self,
        first: &'a [Value],
        second: &'a [Value],
    ) -> Result<bool, DcError> {
        let get = |t: &'a BoundTerm| -> &'a Value {
            match t {
                BoundTerm::Const(v) => v,
                BoundTerm::Cell(TupleVar::T1, c) => &first[*c],
                BoundTerm::Cell(TupleVar::T2, c) => &second[*c],
            }
        };
        for p in &self.predicates {
            if !self.compare(get(&p.left), p.op, get(&p.right))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn compare(&self, l: &Value, op: CmpOp, r: &Value) -> Result<bool, DcError> {
        if l.is_null() || r.is_null() {
            return Ok(false);
        }
        let same_kind = l.kind() == r.kind();
        Ok(match op {
            CmpOp::Eq => l == r,
            CmpOp::Neq => l != r,
            _ if !same_kind => {
                return Err(DcError::Type {
                    dc: self.id.clone(),
                    left: l.kind(),
                    right: r.kind(),
                })
            }
            CmpOp::Lt => l.cmp(r) == Ordering::Less,
            CmpOp::Leq => l.cmp(r) != Ordering::Greater,
            CmpOp::Gt => l.cmp(r) == Ordering::Greater,
            CmpOp::Geq => l.cmp(r) != Ordering::Less,
        })
    }

    /// Whether zero-based row `i` takes part in any violating ordered pair,
    /// in either tuple slot.
    pub fn row_in_violation(&self, table: &Table, i: usize) -> Result<bool, DcError> {
        let ri = table.row(i);
        for j in 0..table.row_count() {
            if j == i {
                continue;
            }
            let rj = table.row(j);
            if self.violated_by(ri, rj)? || self.violated_by(rj, ri)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// All violating ordered pairs `(i, j)`, `i != j`, sorted, 1-based.
    pub fn violations(&self, table: &Table) -> Result<Vec<Violation>, DcError> {
        let n = table.row_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.violated_by(table.row(i), table.row(j))? {
                    out.push(Violation {
                        dc_id: self.id.clone(),
                        pair: (i + 1, j + 1),
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Evaluates `dc` on the ordered pair `(t_i, t_j)` of rows conforming to
/// `schema`.
pub fn holds_violated(
    dc: &DenialConstraint,
    schema: &[String],
    t_i: &[Value],
    t_j: &[Value],
) -> Result<bool, DcError> {
    dc.bind(schema)?.violated_by(t_i, t_j)
}

pub fn violations(dc: &DenialConstraint, table: &Table) -> Result<Vec<Violation>, DcError> {
    dc.bind(table.schema())?.violations(table)
}
