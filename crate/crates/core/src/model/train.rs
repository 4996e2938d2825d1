//! Mini-batch training with a graph-level train/validation split.
//!
//! Graphs in a batch are merged block-diagonally, so no message passes
//! between molecules. Targets are standardized per head with training-set
//! statistics; validation RMSE is reported in ppm.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::gcn::GcnModel;
use super::graph::MolecularGraph;
use super::{ModelError, Target};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub layers: usize,
    pub hidden: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub target: Target,
    pub val_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 4,
            layers: 2,
            hidden: 64,
            patience: 20,
            max_epochs: 500,
            seed: 0,
            target: Target::C13,
            val_fraction: 0.2,
        }
    }
}

// Independent random streams drawn from one seed.
const STREAM_SPLIT: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seeded graph-level split into `(train, validation)` index lists.
///
/// At least one graph lands on each side; both lists are sorted.
pub fn split_indices(n: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, STREAM_SPLIT));
    let n_val = ((n as f64 * val_fraction).round() as usize).clamp(1.min(n), n.saturating_sub(1));
    let mut val = idx[..n_val].to_vec();
    let mut tr = idx[n_val..].to_vec();
    val.sort_unstable();
    tr.sort_unstable();
    (tr, val)
}

/// Patience-based stopping on a lower-is-better score.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    pub patience: usize,
    best: f64,
    best_epoch: Option<usize>,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: None,
            stale: 0,
        }
    }

    /// Records an epoch's score; returns true if it is a new best.
    pub fn observe(&mut self, epoch: usize, score: f64) -> bool {
        if score < self.best {
            self.best = score;
            self.best_epoch = Some(epoch);
            self.stale = 0;
            true
        } else {
            self.stale += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.stale > self.patience
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.best_epoch.map(|e| (e, self.best))
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation epoch.
    pub model: GcnModel,
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// Per-head validation RMSE (ppm) of the returned model.
    pub val_rmse: Vec<f64>,
    /// Early-stopping score per epoch.
    pub history: Vec<f64>,
    pub train_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
}

/// Mean and standard deviation of masked labels, per head.
fn target_stats(graphs: &[&MolecularGraph], heads: usize, target: Target) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
    let mut mean = Vec::with_capacity(heads);
    let mut std = Vec::with_capacity(heads);
    for k in 0..heads {
        let vals: Vec<f64> = graphs
            .iter()
            .flat_map(|g| {
                g.mask
                    .column(k)
                    .iter()
                    .zip(g.y.column(k))
                    .filter(|(m, _)| **m)
                    .map(|(_, y)| *y)
                    .collect::<Vec<_>>()
            })
            .collect();
        if vals.is_empty() {
            return Err(ModelError::NoLabeledNodes(target.head_names()[k].to_string()));
        }
        let mu = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / vals.len() as f64;
        let sd = var.sqrt();
        mean.push(mu);
        std.push(if sd > 1e-12 { sd } else { 1.0 });
    }
    Ok((mean, std))
}

/// `(recorded, predicted)` values over the masked nodes of one head.
pub type HeadPredictions = (Vec<f64>, Vec<f64>);

/// Masked pairs per head, in ppm.
pub fn collect_predictions(model: &GcnModel, graphs: &[&MolecularGraph]) -> Result<Vec<HeadPredictions>, ModelError> {
    let preds: Vec<Array2<f64>> = graphs
        .par_iter()
        .map(|g| model.predict(g))
        .collect::<Result<_, _>>()?;
    let mut out = vec![(Vec::new(), Vec::new()); model.heads()];
    for (g, p) in graphs.iter().zip(&preds) {
        for ((i, k), &m) in g.mask.indexed_iter() {
            if m {
                out[k].0.push(g.y[[i, k]]);
                out[k].1.push(p[[i, k]]);
            }
        }
    }
    Ok(out)
}

/// Per-head RMSE in ppm; `NaN` for a head with no labeled nodes.
pub fn evaluate(model: &GcnModel, graphs: &[&MolecularGraph]) -> Result<Vec<f64>, ModelError> {
    Ok(collect_predictions(model, graphs)?
        .into_iter()
        .map(|(y, p)| super::metrics::rmse(&y, &p).unwrap_or(f64::NAN))
        .collect())
}

/// Early-stopping score: mean over heads of RMSE / σ, skipping heads
/// without validation labels.
fn score(rmse: &[f64], std: &[f64]) -> Option<f64> {
    let terms: Vec<f64> = rmse
        .iter()
        .zip(std)
        .filter(|(r, _)| r.is_finite())
        .map(|(r, s)| r / s)
        .collect();
    (!terms.is_empty()).then(|| terms.iter().sum::<f64>() / terms.len() as f64)
}

pub fn train(graphs: &[MolecularGraph], cfg: &TrainConfig) -> Result<TrainOutcome, ModelError> {
    let (train_idx, val_idx) = split_indices(graphs.len(), cfg.val_fraction, cfg.seed);
    train_split(graphs, &train_idx, &val_idx, cfg)
}

/// Trains on an explicit split; `train` draws the split from the seed.
pub fn train_split(
    graphs: &[MolecularGraph],
    train_idx: &[usize],
    val_idx: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, ModelError> {
    if graphs.len() < 2 {
        return Err(ModelError::TooFewGraphs(graphs.len()));
    }
    let heads = cfg.target.heads();
    let d = graphs[0].x.ncols();
    for g in graphs {
        if g.x.ncols() != d || g.heads() != heads {
            return Err(ModelError::ShapeMismatch(format!(
                "graph {} is {}×{} with {} heads; expected {} features, {} heads",
                g.id,
                g.n_nodes(),
                g.x.ncols(),
                g.heads(),
                d,
                heads
            )));
        }
    }
    let tr: Vec<&MolecularGraph> = train_idx.iter().map(|&i| &graphs[i]).collect();
    let va: Vec<&MolecularGraph> = val_idx.iter().map(|&i| &graphs[i]).collect();
    let (mean, std) = target_stats(&tr, heads, cfg.target)?;

    let mut model = GcnModel::init(d, cfg.hidden, cfg.layers, heads, &mut stream_rng(cfg.seed, STREAM_INIT));
    model.target_mean = mean;
    model.target_std = std.clone();
    let mut opt = Adam::new(cfg.learning_rate, &model.params);
    let mut shuffle_rng = stream_rng(cfg.seed, STREAM_SHUFFLE);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best = model.clone();
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..tr.len()).collect();
    let batch = cfg.batch_size.max(1);

    let mut epochs_run = 0;
    for epoch in 0..cfg.max_epochs {
        epochs_run = epoch + 1;
        order.shuffle(&mut shuffle_rng);
        let mut train_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(batch) {
            let members: Vec<&MolecularGraph> = chunk.iter().map(|&i| tr[i]).collect();
            let merged = MolecularGraph::block_diagonal(&members);
            if !merged.mask.iter().any(|&m| m) {
                continue;
            }
            let (loss, grads) = model.loss_and_grad(&merged)?;
            opt.step(&mut model.params, &grads);
            train_loss += loss;
            batches += 1;
        }
        let val = evaluate(&model, &va)?;
        let s = match score(&val, &std) {
            Some(s) => s,
            None => train_loss / batches.max(1) as f64,
        };
        history.push(s);
        if stopper.observe(epoch, s) {
            best = model.clone();
        }
        log::debug!("epoch {epoch}: score {s:.6}");
        if stopper.should_stop() {
            break;
        }
    }
    let best_epoch = stopper.best().map_or(0, |(e, _)| e);
    let val_rmse = evaluate(&best, &va)?;
    Ok(TrainOutcome {
        model: best,
        best_epoch,
        epochs_run,
        val_rmse,
        history,
        train_idx: train_idx.to_vec(),
        val_idx: val_idx.to_vec(),
    })
}
