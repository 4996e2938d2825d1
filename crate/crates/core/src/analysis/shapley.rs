//! Monte-Carlo Shapley values over feature blocks.
//!
//! Players are the optional feature blocks; the payoff of a coalition is the
//! negated validation RMSE of a model retrained on the base columns plus
//! that coalition. A positive value therefore means the feature lowers the
//! error. Each coalition is evaluated once and reused across permutations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{select_columns, AnalysisError, FeatureBlocks};
use crate::model::train::stream_rng;
use crate::model::{train, MolecularGraph, TrainConfig};

/// A cooperative game on at most 63 players, coalitions as bitmasks.
pub trait CoalitionGame: Sync {
    fn players(&self) -> usize;
    fn payoff(&self, coalition: u64) -> Result<f64, AnalysisError>;
}

/// Retrains a model for each coalition of feature blocks.
pub struct RetrainGame<'a> {
    pub graphs: &'a [MolecularGraph],
    pub blocks: &'a FeatureBlocks,
    pub cfg: &'a TrainConfig,
}

impl CoalitionGame for RetrainGame<'_> {
    fn players(&self) -> usize {
        self.blocks.len()
    }

    /// Negated mean validation RMSE over heads (ppm).
    fn payoff(&self, coalition: u64) -> Result<f64, AnalysisError> {
        let gs = select_columns(self.graphs, &self.blocks.columns_for(coalition));
        let out = train(&gs, self.cfg)?;
        Ok(-out.val_rmse.iter().sum::<f64>() / out.val_rmse.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyReport {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Payoffs of every evaluated coalition.
    pub payoffs: BTreeMap<u64, f64>,
}

impl ShapleyReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# shapley samples={} seed={}\nfeature,value,stderr\n", self.samples, self.seed);
        for ((n, v), e) in self.names.iter().zip(&self.values).zip(&self.stderr) {
            let _ = writeln!(out, "{n},{v},{e}");
        }
        out
    }
}

/// Mean marginal contribution of each player over `samples` seeded random
/// orderings; `stderr` is the sample standard deviation over √samples.
pub fn shapley_sampled<G: CoalitionGame>(
    game: &G,
    names: &[String],
    samples: usize,
    seed: u64,
) -> Result<ShapleyReport, AnalysisError> {
    if samples == 0 {
        return Err(AnalysisError::NoSamples);
    }
    let n = game.players();
    if n > 63 {
        return Err(AnalysisError::TooManyPlayers(n));
    }
    let mut rng = stream_rng(seed, 7);
    let mut orders = Vec::with_capacity(samples);
    let mut needed = BTreeSet::from([0u64]);
    for _ in 0..samples {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut mask = 0u64;
        for &p in &order {
            mask |= 1 << p;
            needed.insert(mask);
        }
        orders.push(order);
    }
    let payoffs: BTreeMap<u64, f64> = needed
        .into_par_iter()
        .map(|m| game.payoff(m).map(|v| (m, v)))
        .collect::<Result<_, _>>()?;

    let mut marginals = vec![Vec::with_capacity(samples); n];
    for order in &orders {
        let mut mask = 0u64;
        for &p in order {
            let before = payoffs[&mask];
            mask |= 1 << p;
            marginals[p].push(payoffs[&mask] - before);
        }
    }
    let (values, stderr) = marginals
        .iter()
        .map(|m| {
            let mean = m.iter().sum::<f64>() / m.len() as f64;
            let var = if m.len() > 1 {
                m.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m.len() - 1) as f64
            } else {
                0.0
            };
            (mean, (var / m.len() as f64).sqrt())
        })
        .unzip();
    Ok(ShapleyReport {
        names: names.to_vec(),
        values,
        stderr,
        samples,
        seed,
        payoffs,
    })
}

/// Shapley attribution of the optional feature blocks by retraining.
pub fn shapley_estimate(
    graphs: &[MolecularGraph],
    blocks: &FeatureBlocks,
    samples: usize,
    cfg: &TrainConfig,
) -> Result<ShapleyReport, AnalysisError> {
    let game = RetrainGame { graphs, blocks, cfg };
    shapley_sampled(&game, &blocks.names, samples, cfg.seed)
}
