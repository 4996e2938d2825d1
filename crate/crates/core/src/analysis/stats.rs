//! Corpus-level counts and distributions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::features::encode::ring_position;
use crate::features::{AnnotatedRow, Stem};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetStats {
    pub carb_count: usize,
    pub mono_count: usize,
    pub atom_count: usize,
    /// Atoms with any recorded shift.
    pub labeled_shift_count: usize,
    /// Stem → share of monosaccharides, in percent.
    pub stem_percentages: BTreeMap<String, f64>,
    /// Monosaccharides per carbohydrate → number of carbohydrates.
    pub length_histogram: BTreeMap<usize, usize>,
    /// `(element, ring position)` → sorted ring shifts.
    pub shift_by_position: BTreeMap<(String, u8), Vec<f64>>,
}

/// Statistics over annotated carbohydrates; the result does not depend on
/// the order of carbohydrates or rows.
pub fn dataset_stats<'a>(corpus: impl IntoIterator<Item = &'a [AnnotatedRow]>) -> DatasetStats {
    let mut st = DatasetStats::default();
    let mut stems: BTreeMap<String, usize> = BTreeMap::new();
    for rows in corpus {
        st.carb_count += 1;
        st.atom_count += rows.len();
        st.labeled_shift_count += rows.iter().filter(|r| r.shift.is_some()).count();
        let monos: BTreeMap<(i32, &str), Stem> = rows
            .iter()
            .filter(|r| r.reformulated_standard_mono != Stem::NA)
            .map(|r| ((r.residual_num, r.residual_name.as_str()), r.reformulated_standard_mono))
            .collect();
        st.mono_count += monos.len();
        *st.length_histogram.entry(monos.len()).or_default() += 1;
        for stem in monos.values() {
            *stems.entry(stem.to_string()).or_default() += 1;
        }
        for r in rows {
            if let (Some(v), Some(p)) = (r.main_ring_shift, ring_position(r)) {
                st.shift_by_position.entry((r.atom_type.clone(), p)).or_default().push(v);
            }
        }
    }
    for v in st.shift_by_position.values_mut() {
        v.sort_by(f64::total_cmp);
    }
    let total: usize = stems.values().sum();
    st.stem_percentages = stems
        .into_iter()
        .map(|(k, c)| (k, 100.0 * c as f64 / total as f64))
        .collect();
    st
}

impl DatasetStats {
    pub fn summary_csv(&self) -> String {
        format!(
            "metric,value\ncarbohydrates,{}\nmonosaccharides,{}\natoms,{}\nlabeled_shifts,{}\n",
            self.carb_count, self.mono_count, self.atom_count, self.labeled_shift_count
        )
    }

    /// Stems by descending share, ties by name.
    pub fn stems_csv(&self) -> String {
        let mut v: Vec<(&String, &f64)> = self.stem_percentages.iter().collect();
        v.sort_by(|a, b| b.1.total_cmp(a.1).then(a.0.cmp(b.0)));
        let mut out = String::from("stem,percent\n");
        for (k, p) in v {
            let _ = writeln!(out, "{k},{p:.4}");
        }
        out
    }

    pub fn lengths_csv(&self) -> String {
        let mut out = String::from("length,count\n");
        for (k, c) in &self.length_histogram {
            let _ = writeln!(out, "{k},{c}");
        }
        out
    }

    /// Long format, one shift per line, for plotting distributions.
    pub fn shifts_csv(&self) -> String {
        let mut out = String::from("element,ring_position,shift\n");
        for ((el, p), vals) in &self.shift_by_position {
            for v in vals {
                let _ = writeln!(out, "{el},{p},{v}");
            }
        }
        out
    }

    /// Count, mean and range of the shifts at each ring position.
    pub fn position_summary_csv(&self) -> String {
        let mut out = String::from("element,ring_position,count,mean,min,max\n");
        for ((el, p), vals) in &self.shift_by_position {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let _ = writeln!(
                out,
                "{el},{p},{},{mean:.4},{},{}",
                vals.len(),
                vals[0],
                vals[vals.len() - 1]
            );
        }
        out
    }
}
