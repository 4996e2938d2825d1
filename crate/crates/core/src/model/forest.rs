//! Bagged CART regression forest over per-atom feature rows.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::stream_rng;
use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `ceil(√d)`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 16,
            min_leaf: 2,
            max_features: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: ArrayView1<f64>) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub config: ForestConfig,
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    mtry: usize,
    nodes: Vec<Node>,
}

fn mean(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

impl Builder<'_> {
    /// Best `(feature, threshold, split point)` by summed squared error.
    fn best_split(&self, idx: &mut [usize], rng: &mut ChaCha8Rng) -> Option<(usize, f64)> {
        let d = self.x.ncols();
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut features: Vec<usize> = sample(rng, d, self.mtry.min(d)).into_vec();
        features.sort_unstable();
        for f in features {
            idx.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]).then(a.cmp(&b)));
            let (mut left_sum, mut left_sq) = (0.0, 0.0);
            let total_sq: f64 = idx.iter().map(|&i| self.y[i] * self.y[i]).sum();
            for k in 0..n - 1 {
                let yi = self.y[idx[k]];
                left_sum += yi;
                left_sq += yi * yi;
                let nl = k + 1;
                let nr = n - nl;
                if nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let (a, b) = (self.x[[idx[k], f]], self.x[[idx[k + 1], f]]);
                if a == b {
                    continue;
                }
                let right_sum = total - left_sum;
                let sse = (left_sq - left_sum * left_sum / nl as f64)
                    + (total_sq - left_sq - right_sum * right_sum / nr as f64);
                if best.is_none_or(|(s, _, _)| sse < s - 1e-12) {
                    best = Some((sse, f, 0.5 * (a + b)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let at = self.nodes.len();
        let value = mean(self.y, idx);
        self.nodes.push(Node::Leaf(value));
        let constant = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        if depth >= self.max_depth || idx.len() < 2 * self.min_leaf || constant {
            return at;
        }
        let Some((feature, threshold)) = self.best_split(idx, rng) else {
            return at;
        };
        let (mut l, mut r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[[i, feature]] <= threshold);
        let left = self.grow(&mut l, depth + 1, rng);
        let right = self.grow(&mut r, depth + 1, rng);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

impl ForestModel {
    pub fn fit(x: ArrayView2<f64>, y: &[f64], cfg: &ForestConfig) -> Result<Self, ModelError> {
        if x.nrows() == 0 || cfg.n_trees == 0 {
            return Err(ModelError::EmptyTrainingSet);
        }
        if x.nrows() != y.len() {
            return Err(ModelError::ShapeMismatch(format!("{} rows, {} labels", x.nrows(), y.len())));
        }
        let d = x.ncols();
        let mtry = cfg
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1));
        let n = x.nrows();
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(cfg.seed, 1000 + t as u64);
                let mut idx: Vec<usize> = if cfg.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let mut b = Builder {
                    x,
                    y,
                    max_depth: cfg.max_depth,
                    min_leaf: cfg.min_leaf.max(1),
                    mtry,
                    nodes: Vec::new(),
                };
                b.grow(&mut idx, 0, &mut rng);
                Tree { nodes: b.nodes }
            })
            .collect();
        Ok(Self {
            trees,
            n_features: d,
            config: cfg.clone(),
        })
    }

    pub fn predict_row(&self, x: ArrayView1<f64>) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<f64>, ModelError> {
        if x.ncols() != self.n_features {
            return Err(ModelError::ShapeMismatch(format!(
                "{} features, forest expects {}",
                x.ncols(),
                self.n_features
            )));
        }
        Ok(x.rows().into_iter().map(|r| self.predict_row(r)).collect())
    }
}

/// Fits on the training rows, predicts the test rows, and scores them.
pub fn forest_fit_predict(
    train: (ArrayView2<f64>, &[f64]),
    test: (ArrayView2<f64>, &[f64]),
    cfg: &ForestConfig,
) -> Result<(Vec<f64>, f64), ModelError> {
    let model = ForestModel::fit(train.0, train.1, cfg)?;
    let pred = model.predict(test.0)?;
    let e = super::metrics::rmse(test.1, &pred).map_err(|e| ModelError::ShapeMismatch(e.to_string()))?;
    Ok((pred, e))
}
