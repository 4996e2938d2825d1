//! One-hot node features.
//!
//! Every categorical, including its `N/A`/`Other` bucket, gets a block of
//! columns that sums to exactly 1 for every atom. Dropping a feature removes
//! its whole block; the column list is identical for every molecule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use ndarray::Array2;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::mononame::{parse_mono_name, Anomer, Configuration, Modification, RingSize, Stem};
use super::{distance_band, AnnotatedRow, BAND_LABELS, PATH_MODIFICATIONS};
use crate::labels::{normalize_label, position_digit};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown feature {name:?}; expected one of {known}", name = .0, known = FeatureGroup::ALL.map(|g| g.as_str()).join(", "))]
pub struct UnknownFeatureName(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureGroup {
    AtomType,
    RingPosition,
    Stem,
    Anomer,
    Configuration,
    RingSize,
    Modification,
}

pub const ATOM_TYPES: [&str; 5] = ["C", "H", "O", "N", "Other"];
pub const RING_POSITIONS: [&str; 10] = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "Other"];

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 7] = [
        FeatureGroup::AtomType,
        FeatureGroup::RingPosition,
        FeatureGroup::Stem,
        FeatureGroup::Anomer,
        FeatureGroup::Configuration,
        FeatureGroup::RingSize,
        FeatureGroup::Modification,
    ];

    /// The carbohydrate-informed features studied by ablation and Shapley
    /// attribution; atom type is always kept.
    pub const OPTIONAL: [FeatureGroup; 6] = [
        FeatureGroup::RingPosition,
        FeatureGroup::Modification,
        FeatureGroup::Stem,
        FeatureGroup::Anomer,
        FeatureGroup::Configuration,
        FeatureGroup::RingSize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::AtomType => "atom_type",
            FeatureGroup::RingPosition => "ring_position",
            FeatureGroup::Stem => "stem",
            FeatureGroup::Anomer => "anomer",
            FeatureGroup::Configuration => "configuration",
            FeatureGroup::RingSize => "ring_size",
            FeatureGroup::Modification => "modification",
        }
    }

    /// Accepts `ring_position`, `Ring position`, `stem_type`, ...
    pub fn parse(name: &str) -> Result<Self, UnknownFeatureName> {
        let key = name.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        let key = match key.as_str() {
            "stem_type" => "stem",
            "modifications" => "modification",
            "atom" | "element" => "atom_type",
            other => other,
        };
        Self::ALL
            .into_iter()
            .find(|g| g.as_str() == key)
            .ok_or_else(|| UnknownFeatureName(name.to_string()))
    }

    /// Column names of this group's block(s).
    fn columns(self) -> Vec<Vec<String>> {
        let block = |prefix: &str, values: &[&str]| values.iter().map(|v| format!("{prefix}={v}")).collect();
        match self {
            FeatureGroup::AtomType => vec![block("atom_type", &ATOM_TYPES)],
            FeatureGroup::RingPosition => vec![block("ring_position", &RING_POSITIONS)],
            FeatureGroup::Stem => vec![block("stem", &Stem::ALL.iter().map(|s| s.as_str()).collect::<Vec<_>>())],
            FeatureGroup::Anomer => vec![block("anomer", &Anomer::ALL.iter().map(|s| s.as_str()).collect::<Vec<_>>())],
            FeatureGroup::Configuration => vec![block(
                "configuration",
                &Configuration::ALL.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            )],
            FeatureGroup::RingSize => vec![block(
                "ring_size",
                &RingSize::ALL.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            )],
            FeatureGroup::Modification => {
                let mut blocks: Vec<Vec<String>> = PATH_MODIFICATIONS
                    .iter()
                    .map(|m| block(&format!("mod_{m}"), &BAND_LABELS))
                    .collect();
                blocks.push(block("deoxy", &["no", "yes"]));
                blocks
            }
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FeatureGroup {
    type Err = UnknownFeatureName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Ordered column names plus the one-hot blocks they form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    pub columns: Vec<String>,
    /// `(group, column range)` for every one-hot block.
    pub blocks: Vec<(FeatureGroup, Range<usize>)>,
}

impl FeatureSchema {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Hex SHA-256 of the newline-joined column names.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.columns.join("\n").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Plain-text sidecar: a header with the hash and band edges, then one
    /// column name per line.
    pub fn sidecar(&self) -> String {
        let mut out = format!(
            "# feature schema {}\n# {} columns; modification distance bands (bonds): {}\n",
            self.hash(),
            self.columns.len(),
            BAND_LABELS.join(", ")
        );
        for c in &self.columns {
            out.push_str(c);
            out.push('\n');
        }
        out
    }
}

/// Chooses which feature groups to encode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureEncoder {
    groups: BTreeSet<FeatureGroup>,
}

impl Default for FeatureEncoder {
    fn default() -> Self {
        Self {
            groups: FeatureGroup::ALL.into_iter().collect(),
        }
    }
}

impl FeatureEncoder {
    pub fn with_groups(groups: impl IntoIterator<Item = FeatureGroup>) -> Self {
        Self {
            groups: groups.into_iter().collect(),
        }
    }

    /// Drops one feature block by name.
    pub fn drop_named(&self, name: &str) -> Result<Self, UnknownFeatureName> {
        Ok(self.without(FeatureGroup::parse(name)?))
    }

    pub fn without(&self, g: FeatureGroup) -> Self {
        let mut groups = self.groups.clone();
        groups.remove(&g);
        Self { groups }
    }

    pub fn with(&self, g: FeatureGroup) -> Self {
        let mut groups = self.groups.clone();
        groups.insert(g);
        Self { groups }
    }

    pub fn groups(&self) -> impl Iterator<Item = FeatureGroup> + '_ {
        FeatureGroup::ALL.into_iter().filter(|g| self.groups.contains(g))
    }

    pub fn contains(&self, g: FeatureGroup) -> bool {
        self.groups.contains(&g)
    }

    pub fn schema(&self) -> FeatureSchema {
        let mut columns = Vec::new();
        let mut blocks = Vec::new();
        for g in self.groups() {
            for block in g.columns() {
                let start = columns.len();
                columns.extend(block);
                blocks.push((g, start..columns.len()));
            }
        }
        FeatureSchema { columns, blocks }
    }

    /// `n_atoms × schema.len()` one-hot matrix, rows in input order.
    pub fn encode(&self, rows: &[AnnotatedRow]) -> (Array2<f64>, FeatureSchema) {
        let schema = self.schema();
        let deoxy = deoxy_residues(rows);
        let mut x = Array2::zeros((rows.len(), schema.len()));
        for (i, row) in rows.iter().enumerate() {
            let mut hot = Vec::with_capacity(schema.blocks.len());
            for g in self.groups() {
                match g {
                    FeatureGroup::AtomType => hot.push(atom_type_index(&row.atom_type)),
                    FeatureGroup::RingPosition => hot.push(ring_position(row).map_or(9, |p| p as usize - 1)),
                    FeatureGroup::Stem => hot.push(index_of(Stem::ALL, row.reformulated_standard_mono)),
                    FeatureGroup::Anomer => hot.push(index_of(Anomer::ALL, row.bound_ab)),
                    FeatureGroup::Configuration => hot.push(index_of(Configuration::ALL, row.fischer_projection_dl)),
                    FeatureGroup::RingSize => hot.push(index_of(RingSize::ALL, row.carbon_number_pf)),
                    FeatureGroup::Modification => {
                        for m in PATH_MODIFICATIONS {
                            hot.push(distance_band(row.mod_distance(m)));
                        }
                        hot.push(usize::from(deoxy.contains(&residue_key(row))));
                    }
                }
            }
            for ((_, range), k) in schema.blocks.iter().zip(hot) {
                x[[i, range.start + k]] = 1.0;
            }
        }
        (x, schema)
    }
}

fn index_of<T: PartialEq>(all: &[T], v: T) -> usize {
    all.iter().position(|a| *a == v).expect("value from its own domain")
}

pub fn atom_type_index(element: &str) -> usize {
    ATOM_TYPES
        .iter()
        .position(|&t| t == element && t != "Other")
        .unwrap_or(ATOM_TYPES.len() - 1)
}

/// Ring position `1..=9` of a sugar atom, or `None` (encoded as `Other`) for
/// atoms of non-sugar residues, names without a position, and positions past
/// the monosaccharide's carbon backbone.
pub fn ring_position(row: &AnnotatedRow) -> Option<u8> {
    if row.reformulated_standard_mono == Stem::NA {
        return None;
    }
    let extent = parse_mono_name(&row.residual_accurate_name).backbone_length().unwrap_or(9);
    position_digit(&normalize_label(&row.atom_name)).filter(|&p| p <= extent)
}

fn residue_key(row: &AnnotatedRow) -> (i32, String) {
    (row.residual_num, row.residual_name.clone())
}

/// Bond cut-off (Å) used when looking for a hetero atom on a backbone carbon.
const HETERO_BOND: f64 = 1.5;

/// Sugar residues with a backbone carbon that carries no O/N/S/P (other than
/// the anomeric carbon, whose oxygen may sit in the neighbouring residue), or
/// whose name says deoxy.
///
/// Hetero atoms are looked up by distance across all rows, so a glycosidic
/// oxygen filed under the other residue still counts.
pub fn deoxy_residues(rows: &[AnnotatedRow]) -> BTreeSet<(i32, String)> {
    let mut residues: BTreeMap<(i32, String), Vec<&AnnotatedRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.reformulated_standard_mono != Stem::NA) {
        residues.entry(residue_key(r)).or_default().push(r);
    }
    let hetero: Vec<[f64; 3]> = rows
        .iter()
        .filter(|r| matches!(r.atom_type.as_str(), "O" | "N" | "S" | "P"))
        .map(|r| [r.x, r.y, r.z])
        .collect();
    let mut out = BTreeSet::new();
    for (key, atoms) in residues {
        let mono = parse_mono_name(&atoms[0].residual_accurate_name);
        if mono.modifications.contains(&Modification::Deoxy) {
            out.insert(key);
            continue;
        }
        if !atoms.iter().any(|a| a.atom_type == "O") {
            continue;
        }
        let extent = mono.backbone_length().unwrap_or(6);
        let anomeric = mono.anomeric_position();
        let missing: Vec<u8> = atoms
            .iter()
            .filter(|a| a.atom_type == "C")
            .filter_map(|a| {
                let k = position_digit(&normalize_label(&a.atom_name))?;
                let c = [a.x, a.y, a.z];
                let bonded = hetero.iter().any(|h| crate::bonds::distance(&c, h) <= HETERO_BOND);
                (k >= 2 && k <= extent && k != anomeric && !bonded).then_some(k)
            })
            .collect();
        if !missing.is_empty() {
            log::debug!(
                "residue {} {}: no hetero atom on carbon(s) {missing:?}; marked deoxy",
                key.0,
                key.1
            );
            out.insert(key);
        }
    }
    out
}
