//! Versioned JSON checkpoints.
//!
//! A checkpoint carries the feature schema it was trained on; loading it
//! against a different schema is refused rather than silently mispredicting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::forest::{ForestConfig, ForestModel};
use super::gcn::GcnModel;
use super::train::TrainConfig;
use super::Target;

pub const FORMAT: &str = "glycoshift-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported checkpoint {format} v{version}")]
    Version { format: String, version: u32 },
    #[error("feature schema mismatch: checkpoint {expected}, data {found}")]
    SchemaMismatch { expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SavedModel {
    Gcn { config: TrainConfig, model: GcnModel },
    Forest { target: Target, model: ForestModel },
}

impl SavedModel {
    pub fn target(&self) -> Target {
        match self {
            SavedModel::Gcn { config, .. } => config.target,
            SavedModel::Forest { target, .. } => *target,
        }
    }

    pub fn forest_config(&self) -> Option<&ForestConfig> {
        match self {
            SavedModel::Forest { model, .. } => Some(&model.config),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub schema_hash: String,
    pub schema: Vec<String>,
    pub model: SavedModel,
}

impl Checkpoint {
    pub fn new(seed: u64, schema_hash: String, schema: Vec<String>, model: SavedModel) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            seed,
            schema_hash,
            schema,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.format != FORMAT || c.version != VERSION {
            return Err(CheckpointError::Version {
                format: c.format,
                version: c.version,
            });
        }
        Ok(c)
    }

    pub fn check_schema(&self, hash: &str) -> Result<(), CheckpointError> {
        if self.schema_hash == hash {
            Ok(())
        } else {
            Err(CheckpointError::SchemaMismatch {
                expected: self.schema_hash.clone(),
                found: hash.to_string(),
            })
        }
    }
}
