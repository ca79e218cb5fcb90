use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::repair::RepairTask;
use crate::table::CellRef;

/// An exact fraction. Serialized as `{"num", "den", "decimal"}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn zero() -> Rational {
        Rational(BigRational::zero())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

fn json_int(n: &BigInt) -> serde_json::Number {
    serde_json::Number::from_str(&n.to_string()).expect("integers are valid JSON numbers")
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("Rational", 3)?;
        s.serialize_field("num", &json_int(self.numer()))?;
        s.serialize_field("den", &json_int(self.denom()))?;
        s.serialize_field("decimal", &self.to_f64())?;
        s.end()
    }
}

/// A coalition player: a constraint (by label) or a table cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Player {
    Constraint(String),
    Cell(CellRef),
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Constraint(id) => f.write_str(id),
            Player::Cell(c) => write!(f, "{c}"),
        }
    }
}

/// An exact Shapley value or a sampled estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Attribution {
    Exact(Rational),
    Estimate(f64),
}

impl Attribution {
    pub fn to_f64(&self) -> f64 {
        match self {
            Attribution::Exact(r) => r.to_f64(),
            Attribution::Estimate(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Attribution::Exact(r) => Some(r),
            Attribution::Estimate(_) => None,
        }
    }

    fn compare(&self, other: &Attribution) -> Ordering {
        match (self, other) {
            (Attribution::Exact(a), Attribution::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Attribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attribution::Exact(r) => write!(f, "{r}"),
            Attribution::Estimate(x) => write!(f, "{x:.6}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerValue {
    pub player: Player,
    pub value: Attribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Constraints,
    Cells,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactEnumeration,
    PermutationSampling,
}

/// How cells outside a sampled coalition are filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Imputation {
    Null,
    #[default]
    ColumnDistribution,
}

impl FromStr for Imputation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "null" => Ok(Imputation::Null),
            "column-distribution" => Ok(Imputation::ColumnDistribution),
            other => Err(format!(
                "unknown imputation {other:?}; expected null or column-distribution"
            )),
        }
    }
}

/// Result of one explanation run. `values` are listed in canonical player
/// order: constraints by label, cells by (row, attribute position).
#[derive(Debug, Clone, Serialize)]
pub struct ShapleyReport {
    pub task: RepairTask,
    pub mode: Mode,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imputation: Option<Imputation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of repair-indicator evaluations performed.
    pub evaluations: u64,
    pub values: Vec<PlayerValue>,
    pub ranking: Vec<Player>,
}

impl ShapleyReport {
    pub(crate) fn assemble(
        task: RepairTask,
        mode: Mode,
        method: Method,
        evaluations: u64,
        values: Vec<PlayerValue>,
    ) -> ShapleyReport {
        let mut report = ShapleyReport {
            task,
            mode,
            method,
            imputation: None,
            samples: None,
            seed: None,
            evaluations,
            values,
            ranking: Vec::new(),
        };
        report.ranking = rank(&report).0.into_iter().map(|(p, _)| p).collect();
        report
    }

    pub fn value_of(&self, player: &Player) -> Option<&Attribution> {
        self.values
            .iter()
            .find(|v| &v.player == player)
            .map(|v| &v.value)
    }

    /// Sum of all values; exact when every value is exact.
    pub fn total(&self) -> Attribution {
        if let Some(exact) = self
            .values
            .iter()
            .map(|v| v.value.exact().cloned())
            .sum::<Option<Rational>>()
        {
            Attribution::Exact(exact)
        } else {
            Attribution::Estimate(self.values.iter().map(|v| v.value.to_f64()).sum())
        }
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        Rational(iter.map(|r| r.0).sum())
    }
}

/// Players ordered from most to least influential.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking(pub Vec<(Player, Attribution)>);

impl Ranking {
    pub fn players(&self) -> Vec<&Player> {
        self.0.iter().map(|(p, _)| p).collect()
    }
}

/// Descending by value; ties keep canonical player order.
pub fn rank(report: &ShapleyReport) -> Ranking {
    let mut out: Vec<(Player, Attribution)> = report
        .values
        .iter()
        .map(|v| (v.player.clone(), v.value.clone()))
        .collect();
    out.sort_by(|a, b| b.1.compare(&a.1));
    Ranking(out)
}

/// Natural ordering for labels: digit runs compare numerically, so `C2`
/// sorts before `C10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn chunks(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes: Vec<char> = s.chars().collect();
        let mut byte = 0;
        for (i, c) in bytes.iter().enumerate() {
            if i > 0 && c.is_ascii_digit() != bytes[i - 1].is_ascii_digit() {
                out.push((bytes[i - 1].is_ascii_digit(), &s[start..byte]));
                start = byte;
            }
            byte += c.len_utf8();
        }
        if !s.is_empty() {
            out.push((bytes[bytes.len() - 1].is_ascii_digit(), &s[start..]));
        }
        out
    }
    let (ca, cb) = (chunks(a), chunks(b));
    for ((da, xa), (db, xb)) in ca.iter().zip(cb.iter()) {
        let ord = if *da && *db {
            let (ta, tb) = (xa.trim_start_matches('0'), xb.trim_start_matches('0'));
            ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb))
        } else {
            xa.cmp(xb)
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    ca.len().cmp(&cb.len()).then_with(|| a.cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_label_order() {
        let mut ids = vec!["C10", "C2", "C1", "B", "C02x", "C2a"];
        ids.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(ids, ["B", "C1", "C2", "C2a", "C02x", "C10"]);
    }

    #[test]
    fn rational_json() {
        let s = serde_json::to_string(&Rational::new(2, 12)).unwrap();
        assert_eq!(s, r#"{"num":1,"den":6,"decimal":0.16666666666666666}"#);
        assert_eq!(Rational::new(4, 6).to_string(), "2/3");
        assert_eq!(Rational::zero().to_string(), "0");
    }

    #[test]
    fn attribution_order_mixes_exact_and_estimates() {
        let a = Attribution::Exact(Rational::new(1, 3));
        let b = Attribution::Estimate(0.3);
        assert_eq!(a.compare(&b), Ordering::Greater);
    }

    #[test]
    fn player_json_forms() {
        assert_eq!(
            serde_json::to_string(&Player::Constraint("C3".into())).unwrap(),
            r#""C3""#
        );
        assert_eq!(
            serde_json::to_string(&Player::Cell(CellRef::new(5, "League"))).unwrap(),
            r#"{"row":5,"attr":"League"}"#
        );
    }
}
