//! Reader and writer for the carbohydrate PDB dialect.
//!
//! Only `ATOM`/`HETATM`, `CONECT`, `TER`, `END` and `MODEL`/`ENDMDL` records
//! are interpreted. `REMARK` and `SWECON` lines are kept verbatim so the
//! annotator can surface them; every other record is ignored.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PdbError {
    #[error("line {line}: malformed {record} record: {reason}")]
    MalformedRecord {
        line: usize,
        record: &'static str,
        reason: String,
    },
    #[error("structure contains no ATOM/HETATM records")]
    EmptyStructure,
    #[error("line {line}: duplicate atom serial {serial}")]
    DuplicateSerial { line: usize, serial: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub serial: u32,
    /// Atom name as written, trimmed (`C1`, `H61`, `O5`).
    pub name: String,
    /// Title-cased element symbol (`C`, `O`, `Na`).
    pub element: String,
    pub residue_serial: i32,
    /// Ångström.
    pub coord: [f64; 3],
    /// Written as `HETATM` rather than `ATOM`. Both are treated alike.
    pub hetero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueRecord {
    pub serial: i32,
    /// Three-letter residue code.
    pub code: String,
    /// Indices into [`Structure::atoms`], in file order.
    pub atoms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub id: String,
    pub atoms: Vec<Atom>,
    /// Residues in first-seen order, grouped by (code, serial).
    pub residues: Vec<ResidueRecord>,
    /// Unordered serial pairs from `CONECT`, stored as `(min, max)`.
    pub connect_pairs: BTreeSet<(u32, u32)>,
    /// Raw `REMARK`/`SWECON` lines.
    pub remarks: Vec<String>,
}

impl Structure {
    /// Residue index of every atom.
    pub fn atom_residues(&self) -> Vec<usize> {
        let mut owner = vec![0; self.atoms.len()];
        for (r, res) in self.residues.iter().enumerate() {
            for &a in &res.atoms {
                owner[a] = r;
            }
        }
        owner
    }

    /// Map from atom serial to atom index.
    pub fn serial_index(&self) -> HashMap<u32, usize> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.serial, i))
            .collect()
    }
}

/// Parses a PDB file.
///
/// Fixed columns are tried first (serial 7–11, name 13–16, resName 18–20,
/// resSeq 23–26, x/y/z 31–54, element 77–78); a line whose columns do not
/// parse is re-read by whitespace splitting. A blank element column is
/// inferred from the first alphabetic character of the atom name. Only the
/// first `MODEL` block is read.
pub fn parse_pdb(id: &str, text: &str) -> Result<Structure, PdbError> {
    let mut atoms: Vec<Atom> = Vec::new();
    let mut residues: Vec<ResidueRecord> = Vec::new();
    let mut residue_lookup: HashMap<(String, i32), usize> = HashMap::new();
    let mut seen_serials: HashMap<u32, usize> = HashMap::new();
    let mut raw_connect: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut remarks = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        // Fixed-width keyword first; a leading token covers loosely spaced files.
        let fixed = line.get(..6).unwrap_or(line).trim_end();
        let record = match fixed {
            "ATOM" | "HETATM" | "CONECT" | "ENDMDL" => fixed,
            _ => match line.split_whitespace().next() {
                Some(tok @ ("ATOM" | "HETATM")) => tok,
                _ => fixed,
            },
        };
        match record {
            "ATOM" | "HETATM" => {
                let (atom, code) = parse_atom_line(line, lineno)?;
                if seen_serials.insert(atom.serial, atoms.len()).is_some() {
                    return Err(PdbError::DuplicateSerial {
                        line: lineno,
                        serial: atom.serial,
                    });
                }
                let key = (code.clone(), atom.residue_serial);
                let r = *residue_lookup.entry(key).or_insert_with(|| {
                    residues.push(ResidueRecord {
                        serial: atom.residue_serial,
                        code,
                        atoms: Vec::new(),
                    });
                    residues.len() - 1
                });
                residues[r].atoms.push(atoms.len());
                atoms.push(atom);
            }
            "CONECT" => raw_connect.push((lineno, parse_conect_line(line, lineno)?)),
            "ENDMDL" => break,
            _ if record.starts_with("REMARK") || record.starts_with("SWECON") => {
                remarks.push(line.trim_end().to_string())
            }
            _ => {}
        }
    }

    if atoms.is_empty() {
        return Err(PdbError::EmptyStructure);
    }

    let mut connect_pairs = BTreeSet::new();
    for (lineno, serials) in raw_connect {
        let Some((&first, partners)) = serials.split_first() else {
            continue;
        };
        for &other in partners {
            if first == other {
                continue;
            }
            if !seen_serials.contains_key(&first) || !seen_serials.contains_key(&other) {
                log::warn!("{id}: line {lineno}: CONECT {first}-{other} names a missing atom, dropped");
                continue;
            }
            connect_pairs.insert((first.min(other), first.max(other)));
        }
    }

    Ok(Structure {
        id: id.to_string(),
        atoms,
        residues,
        connect_pairs,
        remarks,
    })
}

fn column(line: &str, start: usize, end: usize) -> &str {
    // 1-based inclusive columns; short lines yield "".
    let len = line.len();
    if start > len {
        return "";
    }
    line.get(start - 1..end.min(len)).unwrap_or("").trim()
}

fn parse_atom_line(line: &str, lineno: usize) -> Result<(Atom, String), PdbError> {
    let hetero = line.starts_with("HETATM");
    let fixed = || -> Option<(u32, String, String, i32, [f64; 3], String)> {
        if !line.is_ascii() {
            return None;
        }
        let serial = column(line, 7, 11).parse().ok()?;
        let name = column(line, 13, 16).to_string();
        let code = column(line, 18, 20).to_string();
        let res_seq = column(line, 23, 26).parse().ok()?;
        let x = column(line, 31, 38).parse().ok()?;
        let y = column(line, 39, 46).parse().ok()?;
        let z = column(line, 47, 54).parse().ok()?;
        if name.is_empty() || code.is_empty() {
            return None;
        }
        Some((serial, name, code, res_seq, [x, y, z], column(line, 77, 78).to_string()))
    };

    let (serial, name, code, residue_serial, coord, element_col) = match fixed() {
        Some(parsed) => parsed,
        None => parse_atom_whitespace(line).ok_or_else(|| PdbError::MalformedRecord {
            line: lineno,
            record: if hetero { "HETATM" } else { "ATOM" },
            reason: "neither fixed columns nor whitespace fields parse".into(),
        })?,
    };

    if coord.iter().any(|c| !c.is_finite()) {
        return Err(PdbError::MalformedRecord {
            line: lineno,
            record: if hetero { "HETATM" } else { "ATOM" },
            reason: "non-finite coordinate".into(),
        });
    }

    let element = element_symbol(&element_col)
        .or_else(|| {
            name.chars()
                .find(char::is_ascii_alphabetic)
                .map(|c| c.to_ascii_uppercase().to_string())
        })
        .ok_or_else(|| PdbError::MalformedRecord {
            line: lineno,
            record: "ATOM",
            reason: format!("cannot infer element from name {name:?}"),
        })?;

    Ok((
        Atom {
            serial,
            name,
            element,
            residue_serial,
            coord,
            hetero,
        },
        code,
    ))
}

fn element_symbol(col: &str) -> Option<String> {
    let col = col.trim();
    if col.is_empty() || !col.chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    let mut out = String::with_capacity(2);
    for (i, c) in col.chars().enumerate() {
        if i == 0 {
            out.push(c.to_ascii_uppercase());
        } else {
            out.push(c.to_ascii_lowercase());
        }
    }
    Some(out)
}

type AtomFields = (u32, String, String, i32, [f64; 3], String);

fn parse_atom_whitespace(line: &str) -> Option<AtomFields> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    // ATOM serial name resName [chain] resSeq x y z ...
    if tokens.len() < 8 {
        return None;
    }
    let serial = tokens[1].parse().ok()?;
    let name = tokens[2].to_string();
    let code = tokens[3].to_string();
    let (res_seq, rest) = match tokens[4].parse::<i32>() {
        Ok(seq) => (seq, &tokens[5..]),
        Err(_) => (tokens.get(5)?.parse().ok()?, tokens.get(6..)?),
    };
    if rest.len() < 3 {
        return None;
    }
    let x = rest[0].parse().ok()?;
    let y = rest[1].parse().ok()?;
    let z = rest[2].parse().ok()?;
    let element = rest
        .last()
        .filter(|_| rest.len() >= 6)
        .map(|t| t.to_string())
        .unwrap_or_default();
    Some((serial, name, code, res_seq, [x, y, z], element))
}

fn parse_conect_line(line: &str, lineno: usize) -> Result<Vec<u32>, PdbError> {
    let fixed: Option<Vec<u32>> = (0..5)
        .map(|k| column(line, 7 + 5 * k, 11 + 5 * k))
        .filter(|f| !f.is_empty())
        .map(|f| f.parse().ok())
        .collect();
    if let Some(serials) = fixed.filter(|s| !s.is_empty()) {
        return Ok(serials);
    }
    line.split_whitespace()
        .skip(1)
        .map(|t| t.parse())
        .collect::<Result<Vec<u32>, _>>()
        .map_err(|e| PdbError::MalformedRecord {
            line: lineno,
            record: "CONECT",
            reason: e.to_string(),
        })
}

/// Writes a structure back out in fixed-column form.
///
/// Coordinates carry three decimals, so `parse_pdb(serialize_structure(s))`
/// reproduces `s` exactly when its coordinates are already on the 0.001 Å
/// grid.
pub fn serialize_structure(s: &Structure) -> String {
    let mut out = String::new();
    for remark in &s.remarks {
        out.push_str(remark);
        out.push('\n');
    }
    let owner = s.atom_residues();
    for (i, atom) in s.atoms.iter().enumerate() {
        let res = &s.residues[owner[i]];
        let record = if atom.hetero { "HETATM" } else { "ATOM" };
        // Four-character names start in column 13; shorter ones in 14.
        let name = if atom.name.len() >= 4 {
            atom.name.clone()
        } else {
            format!(" {}", atom.name)
        };
        let _ = writeln!(
            out,
            "{record:<6}{:>5} {name:<4} {:>3} A{:>4}    {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
            atom.serial,
            res.code,
            atom.residue_serial,
            atom.coord[0],
            atom.coord[1],
            atom.coord[2],
            1.0,
            0.0,
            atom.element.to_ascii_uppercase(),
        );
    }
    out.push_str("TER\n");

    let mut partners: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
    for &(a, b) in &s.connect_pairs {
        partners.entry(a).or_default().push(b);
    }
    for (a, bs) in partners {
        for chunk in bs.chunks(4) {
            let _ = write!(out, "CONECT{a:>5}");
            for b in chunk {
                let _ = write!(out, "{b:>5}");
            }
            out.push('\n');
        }
    }
    out.push_str("END\n");
    out
}
