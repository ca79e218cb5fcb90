//! Denial constraints: `label: !(p1 & p2 & ...)`, read as
//! "for all distinct ordered tuple pairs (t1, t2), not all of p1..pk hold".

mod eval;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::value::Value;

pub use eval::{holds_violated, violations, BoundConstraint, Violation};
pub use parser::{parse_dc, parse_dcs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TupleVar {
    T1,
    T2,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Cell { var: TupleVar, attr: String },
    Const(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Neq,
    Lt,
    Leq,
    Gt,
    Geq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Neq => "!=",
            CmpOp::Lt => "<",
            CmpOp::Leq => "<=",
            CmpOp::Gt => ">",
            CmpOp::Geq => ">=",
        }
    }

    pub fn is_order(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Neq)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    pub left: Term,
    pub op: CmpOp,
    pub right: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DenialConstraint {
    pub id: String,
    pub predicates: Vec<Predicate>,
}

impl DenialConstraint {
    /// Attributes referenced by any predicate, in first-use order.
    pub fn attributes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.predicates {
            for t in [&p.left, &p.right] {
                if let Term::Cell { attr, .. } = t {
                    if !out.contains(&attr.as_str()) {
                        out.push(attr);
                    }
                }
            }
        }
        out
    }

    /// Resolves attribute names against a schema.
    pub fn bind(&self, schema: &[String]) -> Result<BoundConstraint, DcError> {
        BoundConstraint::new(self, schema)
    }
}

impl fmt::Display for TupleVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TupleVar::T1 => "t1",
            TupleVar::T2 => "t2",
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Cell { var, attr } => write!(f, "{var}.{attr}"),
            Term::Const(Value::Text(s)) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Term::Const(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op.symbol(), self.right)
    }
}

impl fmt::Display for DenialConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: !(", self.id)?;
        for (i, p) in self.predicates.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DcError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("constraint {dc}: unknown attribute {attr:?}")]
    Bind { dc: String, attr: String },
    #[error("constraint {dc}: cannot order {left} against {right}")]
    Type {
        dc: String,
        left: &'static str,
        right: &'static str,
    },
}

/// Prints one constraint per line, in the input format.
pub fn render_dcs(dcs: &[DenialConstraint]) -> String {
    let mut s = String::new();
    for dc in dcs {
        s.push_str(&dc.to_string());
        s.push('\n');
    }
    s
}
