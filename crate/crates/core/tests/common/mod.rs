#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use xrepair_core::repair::{indicator, ReferenceRepair, RepairAlgorithm, RepairTask, Rule};
use xrepair_core::{mask_cells, parse_dcs, CellRef, DenialConstraint, Table, Value};

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * k)
}

fn weight(s: usize, n: usize) -> BigRational {
    BigRational::new(factorial(s) * factorial(n - s - 1), factorial(n))
}

/// Straight from the definition: for each player, sum over every coalition
/// of the others, no sharing of evaluations between players.
pub fn brute_force<F: Fn(&[usize]) -> u8>(n: usize, v: F) -> Vec<BigRational> {
    (0..n)
        .map(|p| {
            let others: Vec<usize> = (0..n).filter(|&q| q != p).collect();
            let mut total = BigRational::from_integer(0.into());
            for mask in 0u32..(1 << others.len()) {
                let s: Vec<usize> = others
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &q)| q)
                    .collect();
                let mut with_p = s.clone();
                with_p.push(p);
                with_p.sort();
                let diff = i64::from(v(&with_p)) - i64::from(v(&s));
                total += weight(s.len(), n) * BigRational::from_integer(diff.into());
            }
            total
        })
        .collect()
}

pub fn oracle_constraints(
    alg: &dyn RepairAlgorithm,
    task: &RepairTask,
) -> Vec<(String, BigRational)> {
    let n = task.constraints.len();
    let values = brute_force(n, |s| {
        let subset: Vec<DenialConstraint> =
            s.iter().map(|&i| task.constraints[i].clone()).collect();
        indicator(alg, task, &subset, &task.dirty).unwrap()
    });
    task.constraints
        .iter()
        .map(|c| c.id.clone())
        .zip(values)
        .collect()
}

pub fn all_cells(table: &Table) -> Vec<CellRef> {
    let mut out = Vec::new();
    for row in 1..=table.row_count() {
        for attr in table.schema() {
            out.push(CellRef::new(row, attr.clone()));
        }
    }
    out
}

pub fn oracle_cells(alg: &dyn RepairAlgorithm, task: &RepairTask) -> Vec<(CellRef, BigRational)> {
    let players: Vec<CellRef> = all_cells(&task.dirty)
        .into_iter()
        .filter(|c| *c != task.target)
        .collect();
    let values = brute_force(players.len(), |s| {
        let mut keep: Vec<CellRef> = s.iter().map(|&i| players[i].clone()).collect();
        keep.push(task.target.clone());
        let masked = mask_cells(&task.dirty, &keep).unwrap();
        indicator(alg, task, &task.constraints, &masked).unwrap()
    });
    players.into_iter().zip(values).collect()
}

/// A random small repair problem: functional-dependency style constraints
/// `Dk: A_i -> A_j`, each with a rule writing `A_j`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub table: Table,
    pub constraints: Vec<DenialConstraint>,
    pub alg: ReferenceRepair,
}

pub const ALPHABET: [&str; 3] = ["a", "b", "c"];

/// `cells[r][c]` indexes ALPHABET, with 3 meaning null. Each fd is
/// `(lhs, rhs, conditional)`, taken modulo the column count.
pub fn instance(cells: &[Vec<u8>], fds: &[(usize, usize, bool)]) -> Instance {
    let width = cells[0].len();
    let schema: Vec<String> = (0..width).map(|c| format!("A{c}")).collect();
    let rows = cells
        .iter()
        .map(|r| {
            r.iter()
                .map(|&x| match ALPHABET.get(x as usize) {
                    Some(s) => Value::text(*s),
                    None => Value::Null,
                })
                .collect()
        })
        .collect();
    let table = Table::new(schema, rows).unwrap();
    let mut text = String::new();
    let mut rules = Vec::new();
    for (k, &(l, r, cond)) in fds.iter().enumerate() {
        let (l, mut r) = (l % width, r % width);
        if l == r {
            r = (r + 1) % width;
        }
        let id = format!("D{k}");
        if l == r {
            text.push_str(&format!("{id}: !(t1.A{l} != t2.A{l})\n"));
        } else {
            text.push_str(&format!(
                "{id}: !(t1.A{l} = t2.A{l} & t1.A{r} != t2.A{r})\n"
            ));
        }
        rules.push(if cond && l != r {
            Rule::most_probable_given(&id, &format!("A{r}"), &format!("A{l}"))
        } else {
            Rule::most_common(&id, &format!("A{r}"))
        });
    }
    Instance {
        table,
        constraints: parse_dcs(&text).unwrap(),
        alg: ReferenceRepair::new(rules),
    }
}

/// A task for the first cell the full repair changes, if any.
pub fn first_task(inst: &Instance) -> Option<RepairTask> {
    let clean = inst.alg.repair(&inst.constraints, &inst.table).ok()?;
    let change = xrepair_core::diff_tables(&inst.table, &clean)
        .ok()?
        .into_iter()
        .next()?;
    RepairTask::new(
        inst.constraints.clone(),
        inst.table.clone(),
        change.cell,
        change.after,
    )
    .ok()
}

/// Team/City/Country/League toy with 11 non-target cells.
pub const TOY_CSV: &str = "\
Team,City,Country,League
RM,Madrid,Spain,LL
RM,Capital,España,LL
FCB,Barcelona,Spain,LL
";

pub const TOY_DCS: &str = "\
C1: !(t1.Team = t2.Team & t1.City != t2.City)
C2: !(t1.City = t2.City & t1.Country != t2.Country)
C3: !(t1.League = t2.League & t1.Country != t2.Country)
";
