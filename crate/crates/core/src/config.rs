//! `key = value` configuration files.
//!
//! ```text
//! # bond cut-offs in Å
//! bond.cc = 1.65
//! learning_rate = 0.001
//! target = joint
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bonds::BondThresholds;
use crate::dataset::Dialect;
use crate::model::{ForestConfig, TrainConfig};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("{key}: bad value {value:?}")]
    Value { key: String, value: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSettings {
    pub bonds: BondThresholds,
    pub train: TrainConfig,
    pub forest: ForestConfig,
    /// Monte-Carlo permutations for Shapley estimates.
    pub shapley_samples: usize,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            bonds: BondThresholds::default(),
            train: TrainConfig::default(),
            forest: ForestConfig::default(),
            shapley_samples: 200,
        }
    }
}

pub const KEYS: &[&str] = &[
    "bond.cc",
    "bond.hx",
    "bond.xx",
    "learning_rate",
    "batch_size",
    "layers",
    "hidden",
    "patience",
    "max_epochs",
    "seed",
    "target",
    "val_fraction",
    "forest.n_trees",
    "forest.max_depth",
    "forest.min_leaf",
    "shapley.samples",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let k = k.trim().to_string();
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

impl PipelineSettings {
    /// Defaults sized for each corpus: the experimental set is small, the
    /// simulated one large enough for a wider, deeper network.
    pub fn for_dialect(dialect: Dialect) -> Self {
        let mut s = Self::default();
        if dialect == Dialect::Sim {
            s.train.hidden = 128;
            s.train.layers = 4;
        }
        s
    }

    /// Applies parsed settings over the current values.
    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        for (k, v) in kv {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn p<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.trim().parse().map_err(|_| ConfigError::Value {
                key: key.into(),
                value: value.into(),
            })
        }
        match key {
            "bond.cc" => self.bonds.cc = p(key, value)?,
            "bond.hx" => self.bonds.hx = p(key, value)?,
            "bond.xx" => self.bonds.xx = p(key, value)?,
            "learning_rate" => self.train.learning_rate = p(key, value)?,
            "batch_size" => self.train.batch_size = p(key, value)?,
            "layers" => self.train.layers = p(key, value)?,
            "hidden" => self.train.hidden = p(key, value)?,
            "patience" => self.train.patience = p(key, value)?,
            "max_epochs" => self.train.max_epochs = p(key, value)?,
            "seed" => {
                self.train.seed = p(key, value)?;
                self.forest.seed = self.train.seed;
            }
            "target" => self.train.target = p(key, value)?,
            "val_fraction" => self.train.val_fraction = p(key, value)?,
            "forest.n_trees" => self.forest.n_trees = p(key, value)?,
            "forest.max_depth" => self.forest.max_depth = p(key, value)?,
            "forest.min_leaf" => self.forest.min_leaf = p(key, value)?,
            "shapley.samples" => self.shapley_samples = p(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Every setting as `key = value` lines, in [`KEYS`] order.
    pub fn render(&self) -> String {
        let t = &self.train;
        let f = &self.forest;
        let values: [String; 16] = [
            self.bonds.cc.to_string(),
            self.bonds.hx.to_string(),
            self.bonds.xx.to_string(),
            t.learning_rate.to_string(),
            t.batch_size.to_string(),
            t.layers.to_string(),
            t.hidden.to_string(),
            t.patience.to_string(),
            t.max_epochs.to_string(),
            t.seed.to_string(),
            t.target.to_string(),
            t.val_fraction.to_string(),
            f.n_trees.to_string(),
            f.max_depth.to_string(),
            f.min_leaf.to_string(),
            self.shapley_samples.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
