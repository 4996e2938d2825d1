//! Structure ↔ shift-table matching and per-atom shift assignment.
//!
//! Residues are matched to shift records through the glycosidic tree: every
//! sugar residue must land on a record whose lineage agrees with the
//! residue's place in the tree (root status, the linkage positions of its
//! incoming bond, and, when lineages spell out full paths, its parent).
//! Among all consistent assignments the one agreeing with the most residue
//! codes on stem type is kept; remaining ties go to the assignment pairing
//! ascending residue serials with records in canonical order (name, lineage,
//! then shift values), so the outcome does not depend on the order records
//! appear in the file.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bonds::{Linkage, ResidueLinkageGraph};
use crate::features::mononame::{
    is_substituent_name, parse_mono_name, stem_from_residue_code, Stem,
};
use crate::labels::{normalize_label, Nucleus};
use crate::model::metrics::{rmse, LengthMismatch};
use crate::shifts::{ShiftRecord, ShiftTable};
use crate::structure::Structure;

/// Upper bound on consistent assignments enumerated before giving up on
/// finding a better-scoring one.
const MAX_SOLUTIONS: usize = 20_000;

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("{residues} sugar residues in the structure but {records} sugar records in the shift table")]
    CountMismatch { residues: usize, records: usize },
    #[error("no consistent residue/record alignment: {0}")]
    NoConsistentMatch(String),
}

/// One step of a lineage: the linkage into a monosaccharide from its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineageStep {
    pub child: Option<u8>,
    pub parent: Option<u8>,
}

impl LineageStep {
    fn accepts(&self, l: &Linkage) -> bool {
        self.child.is_none_or(|c| c == l.child) && self.parent.is_none_or(|p| p == l.parent)
    }
}

/// Parses a lineage string into root-to-self steps.
///
/// Steps are comma separated; each is either the parent position (`4`) or
/// `child-parent` (`1-4`, `2->6`, `(1→3)`). The empty string, `root`, `-`
/// and `0` mark the root. Unreadable tokens are skipped.
///
/// ```
/// use glycoshift::annotate::parse_lineage;
/// assert!(parse_lineage("").is_empty());
/// let steps = parse_lineage(", 4, 2");
/// assert_eq!(steps.len(), 2);
/// assert_eq!(steps[1].parent, Some(2));
/// assert_eq!(parse_lineage("1-4")[0].child, Some(1));
/// ```
pub fn parse_lineage(raw: &str) -> Vec<LineageStep> {
    let t = raw.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("root") || t == "-" || t == "0" {
        return Vec::new();
    }
    t.split([',', ';'])
        .filter_map(|tok| {
            let tok: String = tok
                .chars()
                .map(|c| if c == '→' { '-' } else { c })
                .filter(|c| !matches!(c, '(' | ')' | ' ' | '>'))
                .collect();
            if tok.is_empty() {
                return None;
            }
            let num = |s: &str| s.parse::<u8>().ok();
            match tok.split_once('-') {
                Some((c, p)) => Some(LineageStep {
                    child: num(c),
                    parent: num(p),
                })
                .filter(|s| s.child.is_some() || s.parent.is_some()),
                None => num(&tok).filter(|&p| p > 0).map(|p| LineageStep {
                    child: None,
                    parent: Some(p),
                }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueMatch {
    /// Residue index (into `Structure::residues`) → record index (into
    /// `ShiftTable::records`).
    pub mapping: BTreeMap<usize, usize>,
    /// Non-sugar residue indices.
    pub skipped_residues: Vec<usize>,
    /// Non-sugar record indices.
    pub skipped_records: Vec<usize>,
    /// Number of equally good alignments; > 1 means the serial-order
    /// tie-break decided.
    pub tied_alignments: usize,
}

/// A record that is not a monosaccharide (phosphate, sulfate, acetyl ... listed
/// as its own unit).
pub fn is_sugar_record(rec: &ShiftRecord) -> bool {
    if is_substituent_name(&rec.mono_name) {
        return false;
    }
    parse_mono_name(&rec.mono_name).base.is_some() || rec.shifts.values().any(|e| e.ring)
}

/// Content-based sort key for records, independent of their file position.
fn canonical_key(rec: &ShiftRecord) -> (String, String, Vec<(String, u64)>) {
    (
        rec.mono_name.clone(),
        rec.lineage.clone(),
        rec.shifts.iter().map(|(k, e)| (k.clone(), e.value.to_bits())).collect(),
    )
}

struct Problem<'a> {
    residues: Vec<usize>,
    records: Vec<usize>,
    /// residue → (parent residue, linkage)
    res_parent: HashMap<usize, (usize, Linkage)>,
    rec_steps: HashMap<usize, Vec<LineageStep>>,
    /// record → parent record, when lineages are full paths.
    rec_parent: Option<HashMap<usize, Option<usize>>>,
    stem_score: HashMap<(usize, usize), u32>,
    serials: &'a [i32],
    /// Record → position in canonical order.
    rank: HashMap<usize, usize>,
}

struct Search {
    best: Option<(u32, Vec<usize>)>,
    ties: usize,
    solutions: usize,
}

impl Problem<'_> {
    fn compatible(&self, res: usize, rec: usize, assigned: &HashMap<usize, usize>) -> bool {
        let steps = &self.rec_steps[&rec];
        match (self.res_parent.get(&res), steps.last()) {
            (None, None) => {}
            (Some((parent_res, linkage)), Some(step)) => {
                if !step.accepts(linkage) {
                    return false;
                }
                if let Some(rec_parent) = &self.rec_parent {
                    let Some(parent_rec) = rec_parent[&rec] else {
                        return false;
                    };
                    if assigned.get(parent_res) != Some(&parent_rec) {
                        return false;
                    }
                }
            }
            _ => return false,
        }
        true
    }

    fn search(
        &self,
        order: &[usize],
        depth: usize,
        assigned: &mut HashMap<usize, usize>,
        used: &mut BTreeSet<usize>,
        score: u32,
        out: &mut Search,
    ) {
        if out.solutions >= MAX_SOLUTIONS {
            return;
        }
        if depth == order.len() {
            out.solutions += 1;
            // Records listed in ascending residue-serial order.
            let mut by_serial: Vec<usize> = self.residues.clone();
            by_serial.sort_by_key(|&r| (self.serials[r], r));
            let seq: Vec<usize> = by_serial.iter().map(|r| self.rank[&assigned[r]]).collect();
            match &mut out.best {
                Some((best_score, best_seq)) if score == *best_score => {
                    out.ties += 1;
                    if seq < *best_seq {
                        *best_seq = seq;
                    }
                }
                Some((best_score, _)) if score < *best_score => {}
                _ => {
                    out.best = Some((score, seq));
                    out.ties = 1;
                }
            }
            return;
        }
        let res = order[depth];
        for &rec in &self.records {
            if used.contains(&rec) || !self.compatible(res, rec, assigned) {
                continue;
            }
            assigned.insert(res, rec);
            used.insert(rec);
            let gain = self.stem_score.get(&(res, rec)).copied().unwrap_or(0);
            self.search(order, depth + 1, assigned, used, score + gain, out);
            used.remove(&rec);
            assigned.remove(&res);
        }
    }
}

/// Matches sugar residues of `s` to sugar records of `st`.
pub fn match_residues(
    s: &Structure,
    lg: &ResidueLinkageGraph,
    st: &ShiftTable,
) -> Result<ResidueMatch, MatchError> {
    let (residues, skipped_residues): (Vec<usize>, Vec<usize>) =
        (0..s.residues.len()).partition(|&r| lg.sugar[r]);
    let (mut records, skipped_records): (Vec<usize>, Vec<usize>) =
        (0..st.records.len()).partition(|&i| is_sugar_record(&st.records[i]));
    records.sort_by_cached_key(|&i| canonical_key(&st.records[i]));
    if residues.len() != records.len() {
        return Err(MatchError::CountMismatch {
            residues: residues.len(),
            records: records.len(),
        });
    }

    let sugar_set: BTreeSet<usize> = residues.iter().copied().collect();
    let mut res_parent: HashMap<usize, (usize, Linkage)> = HashMap::new();
    for e in &lg.edges {
        if !sugar_set.contains(&e.child) || !sugar_set.contains(&e.parent) {
            continue;
        }
        if let Some((other, _)) = res_parent.insert(e.child, (e.parent, e.linkage)) {
            if other != e.parent {
                return Err(MatchError::NoConsistentMatch(format!(
                    "residue {} is glycosylated onto both {} and {}",
                    lg.serials[e.child], lg.serials[other], lg.serials[e.parent]
                )));
            }
        }
    }

    let rec_steps: HashMap<usize, Vec<LineageStep>> = records
        .iter()
        .map(|&i| (i, parse_lineage(&st.records[i].lineage)))
        .collect();
    // Full-path lineages: some lineage is longer than one step and every
    // non-root record's prefix names exactly one other record. Single-step
    // lineages only describe the incoming bond.
    let multi_step = rec_steps.values().any(|s| s.len() > 1);
    let rec_parent: Option<HashMap<usize, Option<usize>>> = records
        .iter()
        .filter(|_| multi_step)
        .map(|&i| {
            let steps = &rec_steps[&i];
            if steps.is_empty() {
                return Some((i, None));
            }
            let prefix = &steps[..steps.len() - 1];
            let mut found = records.iter().filter(|&&j| rec_steps[&j] == prefix);
            match (found.next(), found.next()) {
                (Some(&j), None) => Some((i, Some(j))),
                _ => None,
            }
        })
        .collect::<Option<HashMap<_, _>>>()
        .filter(|m| !m.is_empty());

    let mut stem_score = HashMap::new();
    for &r in &residues {
        let Some(code_stem) = stem_from_residue_code(&s.residues[r].code) else {
            continue;
        };
        for &i in &records {
            let stem = parse_mono_name(&st.records[i].mono_name).stem;
            if stem != Stem::NA && stem == code_stem {
                stem_score.insert((r, i), 1);
            }
        }
    }

    // Parents before children.
    let mut order: Vec<usize> = Vec::with_capacity(residues.len());
    let mut placed: BTreeSet<usize> = BTreeSet::new();
    let mut pending: Vec<usize> = residues.clone();
    pending.sort_by_key(|&r| (lg.serials[r], r));
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|&r| match res_parent.get(&r) {
            Some((p, _)) if !placed.contains(p) => true,
            _ => {
                order.push(r);
                placed.insert(r);
                false
            }
        });
        if pending.len() == before {
            return Err(MatchError::NoConsistentMatch(
                "glycosidic bonds form a cycle".into(),
            ));
        }
    }

    let rank: HashMap<usize, usize> = records.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let problem = Problem {
        residues: residues.clone(),
        records: records.clone(),
        rank,
        res_parent,
        rec_steps,
        rec_parent,
        stem_score,
        serials: &lg.serials,
    };
    let mut search = Search {
        best: None,
        ties: 0,
        solutions: 0,
    };
    problem.search(
        &order,
        0,
        &mut HashMap::new(),
        &mut BTreeSet::new(),
        0,
        &mut search,
    );
    if search.solutions >= MAX_SOLUTIONS {
        log::warn!(
            "{}: alignment search stopped after {MAX_SOLUTIONS} candidates",
            s.id
        );
    }
    let Some((_, seq)) = search.best else {
        return Err(MatchError::NoConsistentMatch(
            "no assignment respects the lineage linkages".into(),
        ));
    };
    if search.ties > 1 {
        log::info!(
            "{}: {} equally good alignments, resolved by serial order",
            s.id,
            search.ties
        );
    }
    let mut by_serial = residues;
    by_serial.sort_by_key(|&r| (lg.serials[r], r));
    Ok(ResidueMatch {
        mapping: by_serial.into_iter().zip(seq.into_iter().map(|k| records[k])).collect(),
        skipped_residues,
        skipped_records,
        tied_alignments: search.ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomLabel {
    /// Canonical position label the value came from.
    pub label: String,
    pub nucleus: Nucleus,
    /// ppm.
    pub value: f64,
    pub ring: bool,
    /// Record index the value came from.
    pub record: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmatchedShift {
    pub record: usize,
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStructure {
    pub structure: Structure,
    /// Atom serial → label.
    pub labels: BTreeMap<u32, AtomLabel>,
    pub unmatched: Vec<UnmatchedShift>,
}

/// Copies each matched record's shifts onto the equally named atoms of its
/// residue.
pub fn assign_shifts(s: &Structure, st: &ShiftTable, m: &ResidueMatch) -> LabeledStructure {
    let mut labels = BTreeMap::new();
    let mut unmatched = Vec::new();
    for (&res, &rec) in &m.mapping {
        let mut by_name: HashMap<String, usize> = HashMap::new();
        for &a in &s.residues[res].atoms {
            let key = normalize_label(&s.atoms[a].name);
            if by_name.contains_key(&key) {
                log::warn!(
                    "{}: residue {} has two atoms named {key}; first one labelled",
                    s.id,
                    s.residues[res].serial
                );
                continue;
            }
            by_name.insert(key, a);
        }
        for entry in st.records[rec].shifts.values() {
            match by_name.get(&entry.label) {
                Some(&a) => {
                    labels.insert(
                        s.atoms[a].serial,
                        AtomLabel {
                            label: entry.label.clone(),
                            nucleus: entry.nucleus,
                            value: entry.value,
                            ring: entry.ring,
                            record: rec,
                        },
                    );
                }
                None => unmatched.push(UnmatchedShift {
                    record: rec,
                    label: entry.label.clone(),
                    value: entry.value,
                }),
            }
        }
    }
    LabeledStructure {
        structure: s.clone(),
        labels,
        unmatched,
    }
}

/// Drops records (or single entries) whose simulation error exceeds
/// `max_err` ppm. Tables without error estimates pass through unchanged.
pub fn filter_low_trust(st: &ShiftTable, max_err: f64) -> ShiftTable {
    let Some(flags) = &st.trust_flags else {
        return st.clone();
    };
    let mut records = Vec::new();
    let mut kept_flags = Vec::new();
    for (rec, flag) in st.records.iter().zip(flags) {
        if flag.record_error.is_some_and(|e| e > max_err) {
            continue;
        }
        let mut rec = rec.clone();
        let mut flag = flag.clone();
        flag.entry_errors.retain(|label, e| {
            let keep = *e <= max_err;
            if !keep {
                rec.shifts.remove(label);
            }
            keep
        });
        records.push(rec);
        kept_flags.push(flag);
    }
    ShiftTable {
        carbohydrate_id: st.carbohydrate_id.clone(),
        records,
        trust_flags: Some(kept_flags),
    }
}

/// Indices whose absolute residual exceeds `k` × RMSE, largest residual
/// first.
pub fn outlier_scan(pred: &[f64], truth: &[f64], k: f64) -> Result<Vec<usize>, LengthMismatch> {
    let total = rmse(truth, pred)?;
    let mut flagged: Vec<(usize, f64)> = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .enumerate()
        .filter(|&(_, r)| r > k * total)
        .collect();
    flagged.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(flagged.into_iter().map(|(i, _)| i).collect())
}

/// Plain-text summary of one carbohydrate's matching, for manual review.
pub fn match_report(ls: &LabeledStructure, st: &ShiftTable, m: &ResidueMatch) -> String {
    let s = &ls.structure;
    let mut out = String::new();
    let _ = writeln!(out, "# match report: {}", s.id);
    let _ = writeln!(out, "\n## mapping (residue -> record)");
    let _ = writeln!(out, "serial\tcode\trecord\tmono_name\tlineage\tlabelled");
    let mut per_record: HashMap<usize, usize> = HashMap::new();
    for l in ls.labels.values() {
        *per_record.entry(l.record).or_default() += 1;
    }
    for (&res, &rec) in &m.mapping {
        let r = &st.records[rec];
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:?}\t{}",
            s.residues[res].serial,
            s.residues[res].code,
            rec,
            r.mono_name,
            r.lineage,
            per_record.get(&rec).copied().unwrap_or(0)
        );
    }
    if m.tied_alignments > 1 {
        let _ = writeln!(
            out,
            "\n{} equally good alignments; ascending serial order chosen",
            m.tied_alignments
        );
    }
    let _ = writeln!(out, "\n## skipped residues");
    for &r in &m.skipped_residues {
        let _ = writeln!(out, "{}\t{}", s.residues[r].serial, s.residues[r].code);
    }
    let _ = writeln!(out, "\n## skipped records");
    for &i in &m.skipped_records {
        let _ = writeln!(out, "{}\t{}", i, st.records[i].mono_name);
    }
    let _ = writeln!(out, "\n## unmatched shifts");
    for u in &ls.unmatched {
        let _ = writeln!(out, "{}\t{}\t{}", u.record, u.label, u.value);
    }
    if !s.remarks.is_empty() {
        let _ = writeln!(out, "\n## remarks");
        for r in &s.remarks {
            let _ = writeln!(out, "{r}");
        }
    }
    out
}
