//! The per-atom CSV table.
//!
//! Missing values are empty cells; atom paths are space-separated serials;
//! `Ac_component` is `1`/`0`. Floats are written in shortest round-trip form,
//! so export followed by import reproduces every row exactly.

use thiserror::Error;

use super::mononame::{Anomer, Configuration, RingSize, Stem};
use super::{AnnotatedRow, ModPath};

pub const TABLE_HEADER: [&str; 27] = [
    "Atom_num",
    "Atom_name",
    "Residual_name",
    "Residual_num",
    "x",
    "y",
    "z",
    "Atom_type",
    "Residual_accurate_name",
    "Lineage",
    "Ac_component",
    "bound_AB",
    "fischer_projection_DL",
    "reformulated_standard_mono",
    "carbon_number_PF",
    "Me_min_atom_distance",
    "Me_min_atom_path",
    "Ser_atom_distance",
    "Ser_atom_path",
    "Ac_min_atom_distance",
    "Ac_min_atom_path",
    "S_min_atom_distance",
    "S_min_atom_path",
    "Gc_min_atom_distance",
    "Gc_min_atom_path",
    "main_ring_shift",
    "shift",
];

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header does not match the atom table layout")]
    Header,
    #[error("row {row}, column {column}: cannot read {value:?}")]
    Cell {
        row: usize,
        column: &'static str,
        value: String,
    },
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

pub fn export_table(rows: &[AnnotatedRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(TABLE_HEADER).expect("in-memory write");
    for r in rows {
        let mut rec: Vec<String> = vec![
            r.atom_num.to_string(),
            r.atom_name.clone(),
            r.residual_name.clone(),
            r.residual_num.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.z.to_string(),
            r.atom_type.clone(),
            r.residual_accurate_name.clone(),
            r.lineage.clone(),
            if r.ac_component { "1" } else { "0" }.to_string(),
            r.bound_ab.to_string(),
            r.fischer_projection_dl.to_string(),
            r.reformulated_standard_mono.to_string(),
            r.carbon_number_pf.to_string(),
        ];
        for m in &r.mods {
            rec.push(opt(&m.as_ref().map(|p| p.distance)));
            rec.push(
                m.as_ref()
                    .map(|p| p.path.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
                    .unwrap_or_default(),
            );
        }
        rec.push(opt(&r.main_ring_shift));
        rec.push(opt(&r.shift));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn import_table(text: &str) -> Result<Vec<AnnotatedRow>, TableError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    if r.headers()?.iter().ne(TABLE_HEADER) {
        return Err(TableError::Header);
    }
    let mut rows = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = n + 1;
        let cell = |k: usize| rec.get(k).unwrap_or("");
        let bad = |k: usize| TableError::Cell {
            row,
            column: TABLE_HEADER[k],
            value: cell(k).to_string(),
        };
        let num = |k: usize| cell(k).parse::<f64>().map_err(|_| bad(k));
        let opt_num = |k: usize| match cell(k) {
            "" => Ok(None),
            s => s.parse::<f64>().map(Some).map_err(|_| bad(k)),
        };
        let mut mods: [Option<ModPath>; 5] = Default::default();
        for (i, slot) in mods.iter_mut().enumerate() {
            let (dk, pk) = (15 + 2 * i, 16 + 2 * i);
            if cell(dk).is_empty() {
                continue;
            }
            let distance = cell(dk).parse().map_err(|_| bad(dk))?;
            let path = cell(pk)
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad(pk)))
                .collect::<Result<_, _>>()?;
            *slot = Some(ModPath { distance, path });
        }
        rows.push(AnnotatedRow {
            atom_num: cell(0).parse().map_err(|_| bad(0))?,
            atom_name: cell(1).to_string(),
            residual_name: cell(2).to_string(),
            residual_num: cell(3).parse().map_err(|_| bad(3))?,
            x: num(4)?,
            y: num(5)?,
            z: num(6)?,
            atom_type: cell(7).to_string(),
            residual_accurate_name: cell(8).to_string(),
            lineage: cell(9).to_string(),
            ac_component: match cell(10) {
                "1" => true,
                "0" => false,
                _ => return Err(bad(10)),
            },
            bound_ab: Anomer::parse(cell(11)).ok_or_else(|| bad(11))?,
            fischer_projection_dl: Configuration::parse(cell(12)).ok_or_else(|| bad(12))?,
            reformulated_standard_mono: Stem::parse(cell(13)).ok_or_else(|| bad(13))?,
            carbon_number_pf: RingSize::parse(cell(14)).ok_or_else(|| bad(14))?,
            mods,
            main_ring_shift: opt_num(25)?,
            shift: opt_num(26)?,
        });
    }
    Ok(rows)
}
