//! Node-level shift regressors: a graph-convolutional network trained from
//! scratch, a random-forest baseline, and RMSE evaluation.

pub mod adam;
pub mod checkpoint;
pub mod forest;
pub mod gcn;
pub mod graph;
pub mod metrics;
pub mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::{forest_fit_predict, ForestConfig, ForestModel};
pub use gcn::GcnModel;
pub use graph::{MolecularGraph, NormalizedAdjacency};
pub use metrics::{rmse, EvaluationBatch, LengthMismatch};
pub use train::{train, train_split, TrainConfig, TrainOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("graph {0} has no labeled nodes for the loss")]
    EmptyMask(String),
    #[error("no labeled nodes for target {0}")]
    NoLabeledNodes(String),
    #[error("training needs at least two graphs, got {0}")]
    TooFewGraphs(usize),
    #[error("empty training set")]
    EmptyTrainingSet,
}

/// Which nuclei a model predicts; `Joint` has one head per nucleus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    C13,
    H1,
    Joint,
}

impl Target {
    pub fn heads(self) -> usize {
        match self {
            Target::Joint => 2,
            _ => 1,
        }
    }

    /// Head names, in column order.
    pub fn head_names(self) -> &'static [&'static str] {
        match self {
            Target::C13 => &["c13"],
            Target::H1 => &["h1"],
            Target::Joint => &["c13", "h1"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Target::C13 => "c13",
            Target::H1 => "h1",
            Target::Joint => "joint",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c13" | "13c" | "c" | "carbon" => Ok(Target::C13),
            "h1" | "1h" | "h" | "hydrogen" => Ok(Target::H1),
            "joint" | "both" => Ok(Target::Joint),
            other => Err(format!("unknown target {other:?} (expected c13, h1 or joint)")),
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
