use std::fmt::Write as _;

use rayon::prelude::*;

use super::{select_columns, AnalysisError, FeatureBlocks};
use crate::model::{train, MolecularGraph, TrainConfig};

/// Validation RMSE (ppm, per head) after removing each feature in turn.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub heads: Vec<String>,
    pub seed: u64,
    /// `("None", ..)` first, then one row per dropped feature.
    pub rows: Vec<(String, Vec<f64>)>,
}

impl AblationReport {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.rows.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# ablation seed={}\nremoved", self.seed);
        for h in &self.heads {
            let _ = write!(out, ",rmse_{h}");
        }
        out.push('\n');
        for (name, v) in &self.rows {
            out.push_str(name);
            for x in v {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Retrains with each optional block removed, under the same seed and split.
pub fn ablate(
    graphs: &[MolecularGraph],
    blocks: &FeatureBlocks,
    features: &[String],
    cfg: &TrainConfig,
) -> Result<AblationReport, AnalysisError> {
    let all = blocks.all();
    let mut masks = vec![("None".to_string(), all)];
    for f in features {
        let k = blocks.index_of(f)?;
        masks.push((f.clone(), all & !(1 << k)));
    }
    let rows = masks
        .par_iter()
        .map(|(name, mask)| {
            let gs = select_columns(graphs, &blocks.columns_for(*mask));
            train(&gs, cfg).map(|o| (name.clone(), o.val_rmse))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AblationReport {
        heads: cfg.target.head_names().iter().map(|s| s.to_string()).collect(),
        seed: cfg.seed,
        rows,
    })
}
