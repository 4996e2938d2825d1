//! Directory layouts and corpus-level annotation.
//!
//! `exp`: `<pdb-dir>/<id>.pdb` with `<nmr-dir>/<id>.csv`.
//! `sim`: `<pdb-dir>/<id>.pdb` with `<nmr-dir>/<id>/c_tsv_stat.txt` and
//! `<nmr-dir>/<id>/h_tsv_stat.txt`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bonds::BondThresholds;
use crate::dataset::{annotate_carbohydrate, Carbohydrate, Dialect, PipelineError, ShiftSource};

pub const SIM_CARBON: &str = "c_tsv_stat.txt";
pub const SIM_HYDROGEN: &str = "h_tsv_stat.txt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShiftPaths {
    Exp(PathBuf),
    Sim { carbon: PathBuf, hydrogen: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPair {
    pub id: String,
    pub pdb: PathBuf,
    pub shifts: ShiftPaths,
}

/// A carbohydrate that could not be processed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub id: String,
    pub category: String,
    pub message: String,
}

impl Failure {
    pub fn manifest(failures: &[Failure]) -> String {
        let mut out = String::from("id\tcategory\tmessage\n");
        for f in failures {
            out.push_str(&format!("{}\t{}\t{}\n", f.id, f.category, f.message.replace(['\t', '\n'], " ")));
        }
        out
    }
}

/// Every `<id>.pdb` in `pdb_dir`, sorted by id, paired with its shift
/// files. Structures without shift files come back as failures.
pub fn discover_inputs(dialect: Dialect, pdb_dir: &Path, nmr_dir: &Path) -> io::Result<(Vec<InputPair>, Vec<Failure>)> {
    let mut ids: Vec<String> = fs::read_dir(pdb_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pdb")))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    ids.sort();
    let mut pairs = Vec::new();
    let mut missing = Vec::new();
    for id in ids {
        let shifts = match dialect {
            Dialect::Exp => ShiftPaths::Exp(nmr_dir.join(format!("{id}.csv"))),
            Dialect::Sim => ShiftPaths::Sim {
                carbon: nmr_dir.join(&id).join(SIM_CARBON),
                hydrogen: nmr_dir.join(&id).join(SIM_HYDROGEN),
            },
        };
        let absent: Vec<&Path> = match &shifts {
            ShiftPaths::Exp(p) => vec![p.as_path()],
            ShiftPaths::Sim { carbon, hydrogen } => vec![carbon.as_path(), hydrogen.as_path()],
        }
        .into_iter()
        .filter(|p| !p.is_file())
        .collect();
        if let Some(p) = absent.first() {
            missing.push(Failure {
                id,
                category: "missing-shifts".into(),
                message: format!("no shift file {}", p.display()),
            });
            continue;
        }
        pairs.push(InputPair {
            pdb: pdb_dir.join(format!("{id}.pdb")),
            id,
            shifts,
        });
    }
    Ok((pairs, missing))
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_pair(p: &InputPair, thresholds: &BondThresholds) -> Result<Carbohydrate, PipelineError> {
    let pdb = read(&p.pdb)?;
    let source = match &p.shifts {
        ShiftPaths::Exp(path) => ShiftSource::Exp(read(path)?),
        ShiftPaths::Sim { carbon, hydrogen } => ShiftSource::Sim {
            carbon: read(carbon)?,
            hydrogen: read(hydrogen)?,
        },
    };
    annotate_carbohydrate(&p.id, &pdb, &source, thresholds)
}

/// Annotates every pair in parallel; results keep the input order.
pub fn annotate_all(pairs: &[InputPair], thresholds: &BondThresholds) -> (Vec<Carbohydrate>, Vec<Failure>) {
    let results: Vec<Result<Carbohydrate, Failure>> = pairs
        .par_iter()
        .map(|p| {
            load_pair(p, thresholds).map_err(|e| Failure {
                id: p.id.clone(),
                category: e.category().into(),
                message: e.to_string(),
            })
        })
        .collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(c) => ok.push(c),
            Err(f) => {
                log::warn!("skipping {}: {}", f.id, f.message);
                failed.push(f);
            }
        }
    }
    (ok, failed)
}
