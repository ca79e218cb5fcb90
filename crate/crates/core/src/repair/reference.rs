use super::{RepairAlgorithm, RepairError};
use crate::dc::{BoundConstraint, DenialConstraint};
use crate::table::{CellPos, Table};
use crate::value::Value;

/// "If a row takes part in a violation of `constraint`, overwrite `attr`
/// with its most frequent value", optionally among rows sharing the row's
/// current value of `given`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub constraint: String,
    pub attr: String,
    pub given: Option<String>,
}

impl Rule {
    pub fn most_common(constraint: &str, attr: &str) -> Rule {
        Rule {
            constraint: constraint.into(),
            attr: attr.into(),
            given: None,
        }
    }

    pub fn most_probable_given(constraint: &str, attr: &str, given: &str) -> Rule {
        Rule {
            constraint: constraint.into(),
            attr: attr.into(),
            given: Some(given.into()),
        }
    }
}

/// The simple rule-based repairer.
///
/// Each rule is tied to a constraint label and only fires when that label is
/// in the input set, so dropping a constraint disables its rule. A sweep
/// applies the rules in order, each over the rows in ascending order, with
/// frequencies always taken from the current working table. Sweeps repeat
/// until one leaves the table unchanged, up to `2 * rows * attributes`
/// sweeps.
#[derive(Debug, Clone)]
pub struct ReferenceRepair {
    rules: Vec<Rule>,
}

impl Default for ReferenceRepair {
    /// The four rules for the team/city/country/league/place schema.
    fn default() -> Self {
        ReferenceRepair::new(vec![
            Rule::most_common("C1", "City"),
            Rule::most_probable_given("C2", "Country", "City"),
            Rule::most_common("C3", "Country"),
            Rule::most_probable_given("C4", "Place", "Team"),
        ])
    }
}

struct ActiveRule {
    dc: BoundConstraint,
    col: usize,
    given: Option<usize>,
}

impl ReferenceRepair {
    pub fn new(rules: Vec<Rule>) -> Self {
        ReferenceRepair { rules }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Attributes this repairer can ever write.
    pub fn write_set(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.rules.iter().map(|r| r.attr.as_str()).collect();
        out.dedup();
        out
    }

    fn activate(
        &self,
        constraints: &[DenialConstraint],
        bound: &[BoundConstraint],
        table: &Table,
    ) -> Result<Vec<ActiveRule>, RepairError> {
        let mut active = Vec::new();
        for rule in &self.rules {
            let Some(idx) = constraints.iter().position(|c| c.id == rule.constraint) else {
                continue;
            };
            let column = |attr: &str| {
                table.col_index(attr).ok_or_else(|| RepairError::Rule {
                    constraint: rule.constraint.clone(),
                    message: format!("attribute {attr:?} is not in the schema"),
                })
            };
            active.push(ActiveRule {
                dc: bound[idx].clone(),
                col: column(&rule.attr)?,
                given: rule.given.as_deref().map(column).transpose()?,
            });
        }
        Ok(active)
    }

    pub fn run(
        &self,
        constraints: &[DenialConstraint],
        dirty: &Table,
    ) -> Result<Table, RepairError> {
        // Bind everything up front so a bad constraint fails even when it
        // has no rule attached.
        let bound = constraints
            .iter()
            .map(|dc| dc.bind(dirty.schema()))
            .collect::<Result<Vec<_>, _>>()?;
        let active = self.activate(constraints, &bound, dirty)?;
        let mut table = dirty.clone();
        if active.is_empty() {
            return Ok(table);
        }
        let cap = (2 * table.row_count() * table.width()).max(1);
        // first value seen this sweep for every cell written during it
        let mut touched: Vec<(CellPos, Value)> = Vec::new();
        for _ in 0..cap {
            touched.clear();
            for rule in &active {
                for row in 0..table.row_count() {
                    if !rule.dc.row_in_violation(&table, row)? {
                        continue;
                    }
                    let Some(v) = most_frequent(&table, rule.col, rule.given, row) else {
                        continue;
                    };
                    let pos = CellPos { row, col: rule.col };
                    if table.get(pos) == &v {
                        continue;
                    }
                    if !touched.iter().any(|(p, _)| *p == pos) {
                        touched.push((pos, table.get(pos).clone()));
                    }
                    table.set(pos, v);
                }
            }
            if touched.iter().all(|(p, before)| table.get(*p) == before) {
                return Ok(table);
            }
        }
        Err(RepairError::Fixpoint {
            sweeps: cap,
            last: Box::new(table),
        })
    }
}

// argmax over non-null values of `col`, restricted to rows whose `given`
// value equals this row's. Ties go to the smallest value.
fn most_frequent(table: &Table, col: usize, given: Option<usize>, row: usize) -> Option<Value> {
    let key = match given {
        Some(g) => {
            let k = &table.row(row)[g];
            if k.is_null() {
                return None;
            }
            Some((g, k))
        }
        None => None,
    };
    let mut counts: Vec<(&Value, usize)> = Vec::new();
    for r in table.rows() {
        if r[col].is_null() {
            continue;
        }
        if let Some((g, k)) = key {
            if &r[g] != k {
                continue;
            }
        }
        match counts.iter_mut().find(|(v, _)| *v == &r[col]) {
            Some((_, c)) => *c += 1,
            None => counts.push((&r[col], 1)),
        }
    }
    counts
        .into_iter()
        .max_by(|(va, ca), (vb, cb)| ca.cmp(cb).then_with(|| vb.cmp(va)))
        .map(|(v, _)| v.clone())
}

impl RepairAlgorithm for ReferenceRepair {
    fn name(&self) -> &str {
        "reference"
    }

    fn repair(
        &self,
        constraints: &[DenialConstraint],
        dirty: &Table,
    ) -> Result<Table, RepairError> {
        self.run(constraints, dirty)
    }
}

/// Runs the default four-rule repairer.
pub fn reference_repair(
    constraints: &[DenialConstraint],
    dirty: &Table,
) -> Result<Table, RepairError> {
    ReferenceRepair::default().run(constraints, dirty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dc::parse_dcs;
    use crate::table::{diff_tables, parse_table};

    const DCS: &str = "\
C1: !(t1.Team = t2.Team & t1.City != t2.City)
C2: !(t1.City = t2.City & t1.Country != t2.Country)
C3: !(t1.League = t2.League & t1.Country != t2.Country)
C4: !(t1.Team != t2.Team & t1.Year = t2.Year & t1.League = t2.League & t1.Place = t2.Place)
";

    fn dcs() -> Vec<DenialConstraint> {
        parse_dcs(DCS).unwrap()
    }

    fn subset(ids: &[&str]) -> Vec<DenialConstraint> {
        dcs()
            .into_iter()
            .filter(|d| ids.contains(&d.id.as_str()))
            .collect()
    }

    #[test]
    fn no_constraints_is_identity() {
        let t =
            parse_table("Team,City,Country,League,Year,Place\nA,x,y,L,1,1\nA,z,w,L,1,1\n").unwrap();
        assert_eq!(reference_repair(&[], &t).unwrap(), t);
    }

    #[test]
    fn all_null_table_is_untouched() {
        let t = parse_table("Team,City,Country,League,Year,Place\n,,,,,\n,,,,,\n").unwrap();
        assert_eq!(reference_repair(&dcs(), &t).unwrap(), t);
    }

    #[test]
    fn city_then_country_in_one_fixpoint() {
        // C1 moves t3's city to the majority city, after which C2 aligns its
        // country with the other rows of that city.
        let t = parse_table(
            "Team,City,Country,League,Year,Place\n\
             A,Rome,Italy,L1,1,1\n\
             A,Rome,Italy,L2,1,2\n\
             A,Roma,Italia,L3,1,3\n",
        )
        .unwrap();
        let out = reference_repair(&subset(&["C1", "C2"]), &t).unwrap();
        let changes = diff_tables(&t, &out).unwrap();
        let got: Vec<_> = changes
            .iter()
            .map(|c| (c.cell.to_string(), c.after.clone()))
            .collect();
        assert_eq!(
            got,
            [
                ("t3[City]".to_string(), Value::text("Rome")),
                ("t3[Country]".to_string(), Value::text("Italy"))
            ]
        );
        // without C1 the city never matches, so C2 alone does nothing
        assert_eq!(reference_repair(&subset(&["C2"]), &t).unwrap(), t);
    }

    #[test]
    fn ties_go_to_the_smallest_value() {
        let t = parse_table(
            "Team,City,Country,League,Year,Place\n\
             A,,Italy,L,1,1\n\
             B,,Spain,L,1,2\n",
        )
        .unwrap();
        let out = reference_repair(&subset(&["C3"]), &t).unwrap();
        assert_eq!(out.row(0)[2], Value::text("Italy"));
        assert_eq!(out.row(1)[2], Value::text("Italy"));
    }

    #[test]
    fn conditional_rule_skips_null_condition() {
        // Rows 1 and 2 violate C4; row 2 has no Team, so its conditional
        // distribution is empty and the cell stays as it is.
        let t = parse_table(
            "Team,City,Country,League,Year,Place\n\
             A,x,y,L,1,1\n\
             ,x,y,L,1,1\n\
             A,x,y,L,1,3\n",
        )
        .unwrap();
        let c4 =
            parse_dcs("C4: !(t1.Year = t2.Year & t1.League = t2.League & t1.Place = t2.Place)")
                .unwrap();
        let out = reference_repair(&c4, &t).unwrap();
        // row 1 takes the smallest Place among Team A rows; row 2 is left alone
        assert_eq!(out.row(0)[5], Value::number(1));
        assert_eq!(out.row(1)[5], Value::number(1));
    }

    #[test]
    fn missing_rule_attribute_is_reported() {
        let t = parse_table("Team,City\nA,x\nA,y\n").unwrap();
        let c1 = subset(&["C1"]);
        let out = reference_repair(&c1, &t).unwrap();
        assert_eq!(out.row(1)[1], Value::text("x"));
        let no_city = ReferenceRepair::new(vec![Rule::most_common("C1", "Town")]);
        assert!(matches!(
            no_city.run(&c1, &t),
            Err(RepairError::Rule { .. })
        ));
    }

    #[test]
    fn unbound_constraint_errors_even_without_rule() {
        let t = parse_table("Team,City\nA,x\n").unwrap();
        let odd = parse_dcs("Z: !(t1.Nope = t2.Nope)").unwrap();
        assert!(matches!(
            reference_repair(&odd, &t),
            Err(RepairError::Constraint(_))
        ));
    }

    #[test]
    fn write_set() {
        assert_eq!(
            ReferenceRepair::default().write_set(),
            ["City", "Country", "Place"]
        );
    }
}
