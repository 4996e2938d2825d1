//! End-to-end processing of one carbohydrate, and the encoded-graph files
//! that carry it to the models.

use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{assign_shifts, match_residues, match_report, LabeledStructure, MatchError, ResidueMatch};
use crate::bonds::{infer_bonds, residue_linkage_graph, BondGraph, BondThresholds};
use crate::features::{derive_features, AnnotatedRow, FeatureEncoder, FeatureGroup};
use crate::model::{MolecularGraph, Target};
use crate::shifts::{parse_exp_shifts, parse_sim_shifts, ShiftError, ShiftTable};
use crate::structure::{parse_pdb, PdbError};

/// Source format of the shift tables. Always given explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Exp,
    Sim,
}

impl Dialect {
    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Exp => "exp",
            Dialect::Sim => "sim",
        }
    }

    /// Feature groups encoded by default. Experimental structures often lack
    /// reliable connectivity around substituents, so modification distances
    /// are left out unless asked for.
    pub fn default_encoder(self) -> FeatureEncoder {
        match self {
            Dialect::Exp => FeatureEncoder::default().without(FeatureGroup::Modification),
            Dialect::Sim => FeatureEncoder::default(),
        }
    }
}

impl std::str::FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exp" => Ok(Dialect::Exp),
            "sim" => Ok(Dialect::Sim),
            other => Err(format!("unknown dialect {other:?} (expected exp or sim)")),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw shift-table text in one of the two dialects.
#[derive(Debug, Clone)]
pub enum ShiftSource {
    Exp(String),
    Sim { carbon: String, hydrogen: String },
}

impl ShiftSource {
    pub fn parse(&self, id: &str) -> Result<ShiftTable, ShiftError> {
        match self {
            ShiftSource::Exp(text) => parse_exp_shifts(id, text),
            ShiftSource::Sim { carbon, hydrogen } => parse_sim_shifts(id, carbon, hydrogen),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("structure: {0}")]
    Pdb(#[from] PdbError),
    #[error("shift table: {0}")]
    Shifts(#[from] ShiftError),
    #[error("matching: {0}")]
    Match(#[from] MatchError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Short category for failure manifests.
    pub fn category(&self) -> &'static str {
        match self {
            PipelineError::Pdb(_) => "structure",
            PipelineError::Shifts(_) => "shifts",
            PipelineError::Match(_) => "matching",
            PipelineError::Io { .. } => "io",
        }
    }
}

/// Everything derived from one structure + shift table pair.
#[derive(Debug, Clone)]
pub struct Carbohydrate {
    pub id: String,
    pub labeled: LabeledStructure,
    pub shifts: ShiftTable,
    pub matching: ResidueMatch,
    pub bonds: BondGraph,
    pub rows: Vec<AnnotatedRow>,
}

impl Carbohydrate {
    pub fn report(&self) -> String {
        match_report(&self.labeled, &self.shifts, &self.matching)
    }
}

/// Parse, infer bonds, match, label, and derive per-atom rows.
pub fn annotate_carbohydrate(
    id: &str,
    pdb: &str,
    shifts: &ShiftSource,
    thresholds: &BondThresholds,
) -> Result<Carbohydrate, PipelineError> {
    let s = parse_pdb(id, pdb)?;
    let st = shifts.parse(id)?;
    let bonds = infer_bonds(&s, thresholds);
    let lg = residue_linkage_graph(&s, &bonds);
    let m = match_residues(&s, &lg, &st)?;
    let labeled = assign_shifts(&s, &st, &m);
    let rows = derive_features(&labeled, &m, &st, &bonds);
    Ok(Carbohydrate {
        id: id.to_string(),
        labeled,
        shifts: st,
        matching: m,
        bonds,
        rows,
    })
}

/// An encoded carbohydrate: one-hot features, bonds, and per-nucleus ring
/// shift labels, independent of which target a model will use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedGraph {
    pub id: String,
    pub schema_hash: String,
    pub atom_serials: Vec<u32>,
    pub x: Array2<f64>,
    /// Row-index pairs.
    pub edges: Vec<(usize, usize)>,
    pub c13: Vec<Option<f64>>,
    pub h1: Vec<Option<f64>>,
}

impl EncodedGraph {
    /// Encodes rows with bonds given as atom-index pairs (rows in atom order).
    pub fn from_rows(id: &str, rows: &[AnnotatedRow], edges: Vec<(usize, usize)>, enc: &FeatureEncoder) -> Self {
        let (x, schema) = enc.encode(rows);
        let target = |el: &str| -> Vec<Option<f64>> {
            rows.iter()
                .map(|r| r.main_ring_shift.filter(|_| r.atom_type == el))
                .collect()
        };
        Self {
            id: id.to_string(),
            schema_hash: schema.hash(),
            atom_serials: rows.iter().map(|r| r.atom_num).collect(),
            x,
            edges,
            c13: target("C"),
            h1: target("H"),
        }
    }

    pub fn from_carbohydrate(c: &Carbohydrate, enc: &FeatureEncoder) -> Self {
        Self::from_rows(&c.id, &c.rows, c.bonds.edges(), enc)
    }

    /// Model input with label columns for `target`.
    pub fn to_graph(&self, target: Target) -> MolecularGraph {
        let columns: Vec<&[Option<f64>]> = match target {
            Target::C13 => vec![&self.c13],
            Target::H1 => vec![&self.h1],
            Target::Joint => vec![&self.c13, &self.h1],
        };
        let n = self.x.nrows();
        let y = Array2::from_shape_fn((n, columns.len()), |(i, k)| columns[k][i].unwrap_or(0.0));
        let mask = Array2::from_shape_fn((n, columns.len()), |(i, k)| columns[k][i].is_some());
        MolecularGraph::new(self.id.clone(), self.x.clone(), self.edges.clone(), y, mask)
    }

    pub fn labeled_count(&self) -> usize {
        self.c13.iter().chain(&self.h1).filter(|v| v.is_some()).count()
    }
}
