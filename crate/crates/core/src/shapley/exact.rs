use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::report::{natural_cmp, Method, Mode, Player, PlayerValue, Rational, ShapleyReport};
use super::{run_in_pool, ShapleyError, DEFAULT_ENUMERATION_CAP};
use crate::dc::DenialConstraint;
use crate::repair::{indicator, RepairAlgorithm, RepairTask};
use crate::table::{mask_positions, CellPos};

#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    /// Largest player count accepted.
    pub cap: usize,
    /// Indicator evaluations run on this many threads.
    pub workers: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            cap: DEFAULT_ENUMERATION_CAP,
            workers: 1,
        }
    }
}

/// Exact Shapley values of an `n`-player game given the value of every
/// coalition, indexed by bitmask.
pub fn shapley_from_table(n: usize, v: &[u8]) -> Vec<Rational> {
    assert_eq!(v.len(), 1usize << n, "one value per coalition");
    // counts[p][k]: sum over coalitions S of size k without p of v(S+p) - v(S)
    let mut counts = vec![vec![0i64; n.max(1)]; n];
    for mask in 0..v.len() {
        let k = mask.count_ones() as usize;
        for (p, row) in counts.iter_mut().enumerate() {
            let bit = 1usize << p;
            if mask & bit == 0 {
                row[k] += i64::from(v[mask | bit]) - i64::from(v[mask]);
            }
        }
    }
    let fact: Vec<BigInt> = (0..=n)
        .scan(BigInt::from(1), |acc, i| {
            if i > 0 {
                *acc *= i;
            }
            Some(acc.clone())
        })
        .collect();
    counts
        .into_iter()
        .map(|row| {
            let num: BigInt = row
                .iter()
                .enumerate()
                .map(|(k, &c)| BigInt::from(c) * &fact[k] * &fact[n - k - 1])
                .sum();
            Rational(BigRational::new(num, fact[n].clone()))
        })
        .collect()
}

fn enumerate<F>(n: usize, workers: usize, v: F) -> Result<Vec<u8>, ShapleyError>
where
    F: Fn(usize) -> Result<u8, ShapleyError> + Sync,
{
    run_in_pool(workers, || {
        (0..1usize << n)
            .into_par_iter()
            .map(&v)
            .collect::<Result<Vec<u8>, _>>()
    })
}

/// Exact Shapley value of every constraint of the task, with
/// `v(S) = indicator(alg, task, S, dirty)`.
pub fn shapley_constraints(
    alg: &dyn RepairAlgorithm,
    task: &RepairTask,
) -> Result<ShapleyReport, ShapleyError> {
    shapley_constraints_with(alg, task, ExactOptions::default())
}

pub fn shapley_constraints_with(
    alg: &dyn RepairAlgorithm,
    task: &RepairTask,
    opts: ExactOptions,
) -> Result<ShapleyReport, ShapleyError> {
    let n = task.constraints.len();
    if n > opts.cap {
        return Err(ShapleyError::Cap {
            players: n,
            cap: opts.cap,
        });
    }
    let mut seen = HashSet::new();
    if let Some(dup) = task
        .constraints
        .iter()
        .find(|c| !seen.insert(c.id.as_str()))
    {
        return Err(ShapleyError::Arg(format!(
            "duplicate constraint label {:?}",
            dup.id
        )));
    }
    // players in canonical label order; subsets keep the task's original order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| natural_cmp(&task.constraints[a].id, &task.constraints[b].id));
    let mut player_of = vec![0; n];
    for (player, &i) in order.iter().enumerate() {
        player_of[i] = player;
    }
    let v = enumerate(n, opts.workers, |mask| {
        let subset: Vec<DenialConstraint> = task
            .constraints
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << player_of[*i]) != 0)
            .map(|(_, c)| c.clone())
            .collect();
        Ok(indicator(alg, task, &subset, &task.dirty)?)
    })?;
    let values = shapley_from_table(n, &v)
        .into_iter()
        .zip(&order)
        .map(|(value, &i)| PlayerValue {
            player: Player::Constraint(task.constraints[i].id.clone()),
            value: super::Attribution::Exact(value),
            stderr: None,
        })
        .collect();
    Ok(ShapleyReport::assemble(
        task.clone(),
        Mode::Constraints,
        Method::ExactEnumeration,
        v.len() as u64,
        values,
    ))
}

/// Every cell of the dirty table except the target, in (row, column) order.
pub fn cell_players(task: &RepairTask) -> Vec<CellPos> {
    let target = task.target_pos();
    task.dirty.positions().filter(|p| *p != target).collect()
}

/// Exact Shapley value of every non-target cell, with
/// `v(S) = indicator(alg, task, constraints, mask(dirty, S + target))`.
pub fn shapley_cells_exact(
    alg: &dyn RepairAlgorithm,
    task: &RepairTask,
) -> Result<ShapleyReport, ShapleyError> {
    shapley_cells_exact_with(alg, task, ExactOptions::default())
}

pub fn shapley_cells_exact_with(
    alg: &dyn RepairAlgorithm,
    task: &RepairTask,
    opts: ExactOptions,
) -> Result<ShapleyReport, ShapleyError> {
    let players = cell_players(task);
    let n = players.len();
    if n > opts.cap {
        return Err(ShapleyError::Cap {
            players: n,
            cap: opts.cap,
        });
    }
    let target = task.target_pos();
    let v = enumerate(n, opts.workers, |mask| {
        let mut keep: Vec<CellPos> = players
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| *p)
            .collect();
        keep.push(target);
        let table = mask_positions(&task.dirty, &keep);
        Ok(indicator(alg, task, &task.constraints, &table)?)
    })?;
    let values = shapley_from_table(n, &v)
        .into_iter()
        .zip(&players)
        .map(|(value, p)| PlayerValue {
            player: Player::Cell(task.dirty.cell_ref(*p)),
            value: super::Attribution::Exact(value),
            stderr: None,
        })
        .collect();
    Ok(ShapleyReport::assemble(
        task.clone(),
        Mode::Cells,
        Method::ExactEnumeration,
        v.len() as u64,
        values,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glove_game() {
        // players 0 and 1 hold left gloves, 2 a right glove
        let v: Vec<u8> = (0..8usize)
            .map(|m| u8::from(m & 4 != 0 && m & 3 != 0))
            .collect();
        let phi = shapley_from_table(3, &v);
        assert_eq!(
            phi,
            [
                Rational::new(1, 6),
                Rational::new(1, 6),
                Rational::new(2, 3)
            ]
        );
    }

    #[test]
    fn empty_game() {
        assert!(shapley_from_table(0, &[1]).is_empty());
    }
}
