//! Feature ablation, sampled Shapley attribution, and corpus statistics.
//!
//! Ablation and Shapley work on graphs encoded once with every feature
//! group; a feature subset is realized by selecting its columns, which gives
//! exactly the matrix the encoder would produce with the other groups
//! dropped.

pub mod ablation;
pub mod shapley;
pub mod stats;

use ndarray::{Array2, Axis};
use thiserror::Error;

use crate::features::{FeatureGroup, FeatureSchema};
use crate::model::{ModelError, MolecularGraph};

pub use ablation::{ablate, AblationReport};
pub use shapley::{shapley_estimate, CoalitionGame, RetrainGame, ShapleyReport};
pub use stats::{dataset_stats, DatasetStats};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("feature {0} is not encoded")]
    NotEncoded(String),
    #[error("at least one Monte-Carlo sample is required")]
    NoSamples,
    #[error("too many players for a coalition bitmask: {0}")]
    TooManyPlayers(usize),
}

/// Named optional column blocks plus the always-present base columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureBlocks {
    pub names: Vec<String>,
    pub columns: Vec<Vec<usize>>,
    pub base: Vec<usize>,
}

impl FeatureBlocks {
    /// Blocks for the optional groups present in `schema`; anything else
    /// (atom type) is base.
    pub fn from_schema(schema: &FeatureSchema) -> Self {
        let mut names = Vec::new();
        let mut columns: Vec<Vec<usize>> = Vec::new();
        let mut base = Vec::new();
        for (g, range) in &schema.blocks {
            if FeatureGroup::OPTIONAL.contains(g) {
                match names.iter().position(|n| n == g.as_str()) {
                    Some(k) => columns[k].extend(range.clone()),
                    None => {
                        names.push(g.as_str().to_string());
                        columns.push(range.clone().collect());
                    }
                }
            } else {
                base.extend(range.clone());
            }
        }
        Self { names, columns, base }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Sorted column indices for the base plus the blocks in `mask`.
    pub fn columns_for(&self, mask: u64) -> Vec<usize> {
        let mut cols = self.base.clone();
        for (k, c) in self.columns.iter().enumerate() {
            if mask & (1 << k) != 0 {
                cols.extend(c);
            }
        }
        cols.sort_unstable();
        cols
    }

    pub fn index_of(&self, name: &str) -> Result<usize, AnalysisError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| AnalysisError::NotEncoded(name.to_string()))
    }

    pub fn all(&self) -> u64 {
        (1u64 << self.len()) - 1
    }
}

/// Restricts every graph to `columns`. An empty selection becomes a single
/// constant column so the model still has an input.
pub fn select_columns(graphs: &[MolecularGraph], columns: &[usize]) -> Vec<MolecularGraph> {
    graphs
        .iter()
        .map(|g| {
            let x = if columns.is_empty() {
                Array2::ones((g.n_nodes(), 1))
            } else {
                g.x.select(Axis(1), columns)
            };
            MolecularGraph {
                x,
                ..g.clone()
            }
        })
        .collect()
}
