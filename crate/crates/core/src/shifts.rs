//! Chemical-shift tables in the two supported dialects.
//!
//! * **exp**: one comma-separated file. Each row is one atom; contiguous rows
//!   sharing the same residue name and linkage form one monosaccharide.
//!   Required columns are `atom`, `shift` and `linkage` (aliases accepted,
//!   case-insensitive); `residue` is optional.
//! * **sim**: two tab-separated files, one per nucleus. Each row is one
//!   monosaccharide: `residue`, `linkage`, an optional `error` column, then
//!   one column per ring position (`1`, `2`, ... or `C1`, `H6a`, ...). A cell
//!   may carry its own error estimate as `72.3±0.8`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{is_ring_label, label_nucleus, normalize_label, Nucleus};

#[derive(Debug, Error, PartialEq)]
pub enum ShiftError {
    #[error("shift table contains no shift values")]
    NoRecords,
    #[error("line {line}: unparseable shift {cell:?} for {label}: {reason}")]
    UnparseableShift {
        line: usize,
        label: String,
        cell: String,
        reason: String,
    },
    #[error("carbon and hydrogen tables disagree: {0}")]
    InconsistentResidues(String),
    #[error("missing required column {0:?}")]
    MissingColumn(&'static str),
    #[error("line {line}: position {label} given twice for one monosaccharide")]
    DuplicateLabel { line: usize, label: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEntry {
    /// Canonical label (`C1`, `H61`) or the normalized source label for
    /// substituent atoms.
    pub label: String,
    pub nucleus: Nucleus,
    /// ppm.
    pub value: f64,
    /// Main-ring carbon or hydrogen.
    pub ring: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    /// Order of the monosaccharide in the source file.
    pub mono_index: usize,
    pub mono_name: String,
    pub lineage: String,
    pub shifts: BTreeMap<String, ShiftEntry>,
}

impl ShiftRecord {
    fn insert(&mut self, entry: ShiftEntry, line: usize) -> Result<(), ShiftError> {
        if self.shifts.contains_key(&entry.label) {
            return Err(ShiftError::DuplicateLabel {
                line,
                label: entry.label,
            });
        }
        self.shifts.insert(entry.label.clone(), entry);
        Ok(())
    }
}

/// Simulation error estimates attached to one record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordTrust {
    /// Error for the whole monosaccharide, ppm.
    pub record_error: Option<f64>,
    /// Per-position errors, ppm.
    pub entry_errors: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTable {
    pub carbohydrate_id: String,
    pub records: Vec<ShiftRecord>,
    /// Aligned with `records` when the source carried error estimates.
    pub trust_flags: Option<Vec<RecordTrust>>,
}

impl ShiftTable {
    pub fn total_shifts(&self) -> usize {
        self.records.iter().map(|r| r.shifts.len()).sum()
    }
}

fn find_column(header: &[String], aliases: &[&str]) -> Option<usize> {
    header
        .iter()
        .position(|h| aliases.iter().any(|a| h.eq_ignore_ascii_case(a)))
}

const RESIDUE_ALIASES: &[&str] = &["residue", "monosaccharide", "mono", "mono_name", "name"];
const LINKAGE_ALIASES: &[&str] = &["linkage", "lineage"];
const ATOM_ALIASES: &[&str] = &["atom", "atom_name", "label", "position"];
const SHIFT_ALIASES: &[&str] = &["shift", "ppm", "value", "chemical_shift"];
const ERROR_ALIASES: &[&str] = &["error", "err", "trust"];

fn parse_value(cell: &str, label: &str, line: usize) -> Result<(f64, Option<f64>), ShiftError> {
    let bad = |reason: &str| ShiftError::UnparseableShift {
        line,
        label: label.to_string(),
        cell: cell.to_string(),
        reason: reason.to_string(),
    };
    let (value, err) = match cell.split_once('±').or_else(|| cell.split_once("+-")) {
        Some((v, e)) => (v.trim(), Some(e.trim())),
        None => (cell.trim(), None),
    };
    let value: f64 = value.parse().map_err(|_| bad("not a number"))?;
    if !value.is_finite() {
        return Err(bad("not finite"));
    }
    if let Some((lo, hi)) = label_nucleus(label).sanity_window() {
        if !(lo..=hi).contains(&value) {
            return Err(bad(&format!("outside sanity window [{lo}, {hi}] ppm")));
        }
    }
    let err = match err {
        Some(e) => Some(
            e.trim_end_matches("ppm")
                .trim()
                .parse::<f64>()
                .map_err(|_| bad("unparseable error estimate"))?,
        ),
        None => None,
    };
    Ok((value, err))
}

fn entry(label: String, value: f64) -> ShiftEntry {
    ShiftEntry {
        nucleus: label_nucleus(&label),
        ring: is_ring_label(&label),
        label,
        value,
    }
}

fn is_blank(cell: &str) -> bool {
    matches!(cell.trim(), "" | "-" | "NA" | "N/A" | "nan" | "NaN")
}

/// Reads the experimental CSV dialect.
pub fn parse_exp_shifts(id: &str, text: &str) -> Result<ShiftTable, ShiftError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|_| ShiftError::MissingColumn("atom"))?
        .iter()
        .map(str::to_string)
        .collect();
    let atom_col = find_column(&header, ATOM_ALIASES).ok_or(ShiftError::MissingColumn("atom"))?;
    let shift_col =
        find_column(&header, SHIFT_ALIASES).ok_or(ShiftError::MissingColumn("shift"))?;
    let link_col =
        find_column(&header, LINKAGE_ALIASES).ok_or(ShiftError::MissingColumn("linkage"))?;
    let res_col = find_column(&header, RESIDUE_ALIASES);

    let mut records: Vec<ShiftRecord> = Vec::new();
    let mut current: Option<(String, String)> = None;
    for row in reader.records() {
        let Ok(row) = row else { continue };
        let line = row.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| row.get(i).unwrap_or("").to_string();
        let raw_atom = get(atom_col);
        if raw_atom.is_empty() {
            continue;
        }
        let key = (res_col.map(get).unwrap_or_default(), get(link_col));
        if current.as_ref() != Some(&key) {
            records.push(ShiftRecord {
                mono_index: records.len(),
                mono_name: key.0.clone(),
                lineage: key.1.clone(),
                shifts: BTreeMap::new(),
            });
            current = Some(key);
        }
        let cell = get(shift_col);
        if is_blank(&cell) {
            continue;
        }
        let label = normalize_label(&raw_atom);
        let (value, _) = parse_value(&cell, &label, line)?;
        records
            .last_mut()
            .expect("record pushed above")
            .insert(entry(label, value), line)?;
    }

    let table = ShiftTable {
        carbohydrate_id: id.to_string(),
        records,
        trust_flags: None,
    };
    if table.total_shifts() == 0 {
        return Err(ShiftError::NoRecords);
    }
    Ok(table)
}

struct SimRow {
    mono_name: String,
    lineage: String,
    entries: Vec<ShiftEntry>,
    trust: RecordTrust,
    line: usize,
}

fn parse_sim_half(text: &str, nucleus: char) -> Result<(Vec<SimRow>, bool), ShiftError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let Some((_, header_line)) = lines.next() else {
        return Ok((Vec::new(), false));
    };
    let header: Vec<String> = header_line.split('\t').map(|h| h.trim().to_string()).collect();
    let res_col =
        find_column(&header, RESIDUE_ALIASES).ok_or(ShiftError::MissingColumn("residue"))?;
    let link_col =
        find_column(&header, LINKAGE_ALIASES).ok_or(ShiftError::MissingColumn("linkage"))?;
    let err_col = find_column(&header, ERROR_ALIASES);
    let positions: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != res_col && *i != link_col && Some(*i) != err_col)
        .map(|(i, h)| {
            let label = if h.starts_with(|c: char| c.is_ascii_digit()) {
                format!("{nucleus}{h}")
            } else {
                h.clone()
            };
            (i, normalize_label(&label))
        })
        .collect();

    let mut has_trust = err_col.is_some();
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let cells: Vec<&str> = raw.split('\t').map(str::trim).collect();
        let cell = |i: usize| cells.get(i).copied().unwrap_or("");
        let mut trust = RecordTrust::default();
        if let Some(c) = err_col {
            if !is_blank(cell(c)) {
                let e = cell(c).parse::<f64>().map_err(|_| ShiftError::UnparseableShift {
                    line,
                    label: "error".into(),
                    cell: cell(c).to_string(),
                    reason: "not a number".into(),
                })?;
                trust.record_error = Some(e);
            }
        }
        let mut entries = Vec::new();
        for (col, label) in &positions {
            let c = cell(*col);
            if is_blank(c) {
                continue;
            }
            let (value, err) = parse_value(c, label, line)?;
            if let Some(e) = err {
                has_trust = true;
                trust.entry_errors.insert(label.clone(), e);
            }
            entries.push(entry(label.clone(), value));
        }
        rows.push(SimRow {
            mono_name: cell(res_col).to_string(),
            lineage: cell(link_col).to_string(),
            entries,
            trust,
            line,
        });
    }
    Ok((rows, has_trust))
}

/// Reads and merges the simulated carbon and hydrogen tables.
///
/// Row *i* of both files must describe the same monosaccharide (same name and
/// linkage); their shifts merge into one record.
pub fn parse_sim_shifts(id: &str, c_text: &str, h_text: &str) -> Result<ShiftTable, ShiftError> {
    let (c_rows, c_trust) = parse_sim_half(c_text, 'C')?;
    let (h_rows, h_trust) = parse_sim_half(h_text, 'H')?;
    if c_rows.len() != h_rows.len() {
        return Err(ShiftError::InconsistentResidues(format!(
            "{} carbon rows vs {} hydrogen rows",
            c_rows.len(),
            h_rows.len()
        )));
    }

    let mut records = Vec::with_capacity(c_rows.len());
    let mut trust_flags = Vec::with_capacity(c_rows.len());
    for (i, (c, h)) in c_rows.into_iter().zip(h_rows).enumerate() {
        if c.mono_name != h.mono_name || c.lineage != h.lineage {
            return Err(ShiftError::InconsistentResidues(format!(
                "row {i}: {:?} [{}] vs {:?} [{}]",
                c.mono_name, c.lineage, h.mono_name, h.lineage
            )));
        }
        let mut record = ShiftRecord {
            mono_index: i,
            mono_name: c.mono_name,
            lineage: c.lineage,
            shifts: BTreeMap::new(),
        };
        for e in c.entries {
            record.insert(e, c.line)?;
        }
        for e in h.entries {
            record.insert(e, h.line)?;
        }
        let mut trust = c.trust;
        trust.record_error = match (trust.record_error, h.trust.record_error) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        trust.entry_errors.extend(h.trust.entry_errors);
        records.push(record);
        trust_flags.push(trust);
    }

    let table = ShiftTable {
        carbohydrate_id: id.to_string(),
        records,
        trust_flags: (c_trust || h_trust).then_some(trust_flags),
    };
    if table.records.is_empty() {
        return Err(ShiftError::NoRecords);
    }
    Ok(table)
}
