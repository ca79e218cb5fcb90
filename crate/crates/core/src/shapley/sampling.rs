use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::cell_players;
use super::report::{Attribution, Imputation, Method, Mode, Player, PlayerValue, ShapleyReport};
use super::{run_in_pool, ShapleyError};
use crate::repair::{indicator, RepairAlgorithm, RepairTask};
use crate::table::{column_distribution_at, CellPos, ColumnDistribution};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Permutations drawn per player.
    pub samples: usize,
    pub seed: u64,
    pub imputation: Imputation,
    pub workers: usize,
}

impl SamplerConfig {
    pub fn new(samples: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            samples,
            seed,
            imputation: Imputation::default(),
            workers: 1,
        }
    }

    pub fn imputation(mut self, imputation: Imputation) -> SamplerConfig {
        self.imputation = imputation;
        self
    }

    pub fn workers(mut self, workers: usize) -> SamplerConfig {
        self.workers = workers;
        self
    }
}

/// The random stream for one player. Each player draws from its own stream,
/// so results do not depend on how players are spread over threads.
pub fn player_rng(seed: u64, player: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(player as u64);
    rng
}

struct Imputer {
    mode: Imputation,
    columns: Vec<ColumnDistribution>,
}

impl Imputer {
    fn draw(&self, pos: CellPos, rng: &mut ChaCha8Rng) -> Value {
        match self.mode {
            Imputation::Null => Value::Null,
            Imputation::ColumnDistribution => self.columns[pos.col].sample(rng),
        }
    }
}

/// Running sums for one player.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    sum: i64,
    sum_sq: i64,
}

impl Tally {
    fn push(&mut self, d: i64) {
        self.sum += d;
        self.sum_sq += d * d;
    }

    fn mean(&self, m: usize) -> f64 {
        self.sum as f64 / m as f64
    }

    // standard error of the mean from the sample standard deviation
    fn stderr(&self, m: usize) -> f64 {
        if m < 2 {
            return 0.0;
        }
        let m_f = m as f64;
        let var = (self.sum_sq as f64 - (self.sum as f64).powi(2) / m_f) / (m_f - 1.0);
        (var.max(0.0) / m_f).sqrt()
    }
}

fn sample_player(
    alg: &dyn RepairAlgorithm,
    task: &RepairTask,
    players: &[CellPos],
    imputer: &Imputer,
    p: usize,
    cfg: &SamplerConfig,
) -> Result<Tally, ShapleyError> {
    let mut rng = player_rng(cfg.seed, p);
    let mut perm: Vec<usize> = (0..players.len()).collect();
    let mut in_coalition = vec![false; players.len()];
    let mut tally = Tally::default();
    for _ in 0..cfg.samples {
        perm.shuffle(&mut rng);
        in_coalition.iter_mut().for_each(|b| *b = false);
        for &q in perm.iter().take_while(|&&q| q != p) {
            in_coalition[q] = true;
        }
        let mut with_p = task.dirty.clone();
        for (q, &pos) in players.iter().enumerate() {
            if q != p && !in_coalition[q] {
                with_p.set(pos, imputer.draw(pos, &mut rng));
            }
        }
        let mut without_p = with_p.clone();
        without_p.set(players[p], imputer.draw(players[p], &mut rng));
        let a = indicator(alg, task, &task.constraints, &with_p)?;
        let b = indicator(alg, task, &task.constraints, &without_p)?;
        tally.push(i64::from(a) - i64::from(b));
    }
    Ok(tally)
}

/// Monte-Carlo Shapley estimate for every non-target cell.
///
/// For each player and each of `samples` rounds: shuffle the players, keep
/// the original values of the players ahead of it, impute everyone else,
/// and score the indicator with the player kept versus imputed.
pub fn shapley_cells_sampled(
    alg: &dyn RepairAlgorithm,
    task: &RepairTask,
    cfg: SamplerConfig,
) -> Result<ShapleyReport, ShapleyError> {
    if cfg.samples == 0 {
        return Err(ShapleyError::Arg("samples must be at least 1".into()));
    }
    let players = cell_players(task);
    let imputer = Imputer {
        mode: cfg.imputation,
        columns: (0..task.dirty.width())
            .map(|c| column_distribution_at(&task.dirty, c))
            .collect(),
    };
    let tallies = run_in_pool(cfg.workers, || {
        (0..players.len())
            .into_par_iter()
            .map(|p| sample_player(alg, task, &players, &imputer, p, &cfg))
            .collect::<Result<Vec<Tally>, _>>()
    })?;
    let m = cfg.samples;
    let values = players
        .iter()
        .zip(&tallies)
        .map(|(pos, t)| PlayerValue {
            player: Player::Cell(task.dirty.cell_ref(*pos)),
            value: Attribution::Estimate(t.mean(m)),
            stderr: Some(t.stderr(m)),
        })
        .collect();
    let mut report = ShapleyReport::assemble(
        task.clone(),
        Mode::Cells,
        Method::PermutationSampling,
        2 * (m as u64) * players.len() as u64,
        values,
    );
    report.imputation = Some(cfg.imputation);
    report.samples = Some(m);
    report.seed = Some(cfg.seed);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_stats() {
        let mut t = Tally::default();
        for d in [1, 0, 1, 0] {
            t.push(d);
        }
        assert_eq!(t.mean(4), 0.5);
        // sample sd = sqrt(1/3), stderr = sd / 2
        assert!((t.stderr(4) - (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(Tally::default().stderr(1), 0.0);
    }

    #[test]
    fn player_streams_differ() {
        use rand::Rng;
        let a: u64 = player_rng(7, 0).random();
        let b: u64 = player_rng(7, 1).random();
        let a2: u64 = player_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }
}
