//! Per-atom feature rows for annotated carbohydrates.
//!
//! [`derive_features`] produces one [`AnnotatedRow`] per atom with the
//! monosaccharide-level categories parsed from the matched record name and
//! the hop distance to each modification group. [`table`] reads and writes
//! those rows as CSV; [`encode`] turns them into a one-hot matrix.

pub mod encode;
pub mod mononame;
pub mod table;

use std::collections::{BTreeMap, BTreeSet};

use crate::annotate::{LabeledStructure, ResidueMatch};
use crate::bonds::{shortest_atom_path, BondGraph};
use crate::labels::Nucleus;
use crate::shifts::ShiftTable;

pub use encode::{FeatureEncoder, FeatureGroup, FeatureSchema, UnknownFeatureName};
pub use mononame::{parse_mono_name, Anomer, Configuration, Modification, MonoName, RingSize, Stem};
pub use table::{export_table, import_table, TABLE_HEADER};

/// Modification groups with a distance/path column pair, in column order.
pub const PATH_MODIFICATIONS: [Modification; 5] = [
    Modification::Me,
    Modification::Ser,
    Modification::Ac,
    Modification::S,
    Modification::Gc,
];

/// Shortest bond path from an atom to the nearest atom of one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPath {
    pub distance: usize,
    /// Atom serials from the atom itself to the group member, inclusive.
    pub path: Vec<u32>,
}

/// Distance band used by the encoder: `0–1`, `2–3`, `4–6`, `>6` or absent.
pub fn distance_band(d: Option<usize>) -> usize {
    match d {
        Some(0..=1) => 0,
        Some(2..=3) => 1,
        Some(4..=6) => 2,
        _ => 3,
    }
}

pub const BAND_LABELS: [&str; 4] = ["0-1", "2-3", "4-6", ">6"];

/// One atom of an annotated carbohydrate, column for column.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedRow {
    pub atom_num: u32,
    pub atom_name: String,
    pub residual_name: String,
    pub residual_num: i32,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub atom_type: String,
    /// Record name for matched residues, residue code otherwise.
    pub residual_accurate_name: String,
    pub lineage: String,
    pub ac_component: bool,
    pub bound_ab: Anomer,
    pub fischer_projection_dl: Configuration,
    pub reformulated_standard_mono: Stem,
    pub carbon_number_pf: RingSize,
    /// Indexed like [`PATH_MODIFICATIONS`].
    pub mods: [Option<ModPath>; 5],
    /// Shift of a ring C/H atom — the regression target.
    pub main_ring_shift: Option<f64>,
    /// Any recorded shift of this atom, ring or not.
    pub shift: Option<f64>,
}

impl AnnotatedRow {
    pub fn mod_distance(&self, m: Modification) -> Option<usize> {
        let k = PATH_MODIFICATIONS.iter().position(|&p| p == m)?;
        self.mods[k].as_ref().map(|p| p.distance)
    }

    pub fn nucleus(&self) -> Nucleus {
        Nucleus::from_element(&self.atom_type)
    }
}

fn elem(s: &crate::structure::Structure, i: usize) -> &str {
    &s.atoms[i].element
}

fn heavy_neighbors<'a>(
    s: &'a crate::structure::Structure,
    g: &'a BondGraph,
    i: usize,
) -> impl Iterator<Item = usize> + 'a {
    g.neighbors(i).iter().copied().filter(move |&j| elem(s, j) != "H")
}

fn hydrogens(s: &crate::structure::Structure, g: &BondGraph, i: usize) -> Vec<usize> {
    g.neighbors(i).iter().copied().filter(|&j| elem(s, j) == "H").collect()
}

/// Residue codes that are a modification group in their own right.
fn group_for_code(code: &str) -> Option<Modification> {
    match code.trim().to_ascii_uppercase().as_str() {
        "ACE" | "ACX" | "ACY" | "NAC" => Some(Modification::Ac),
        "MEX" | "MEO" | "ME" => Some(Modification::Me),
        "SO3" | "SO4" | "SUL" => Some(Modification::S),
        "GC" | "GCO" => Some(Modification::Gc),
        "SER" => Some(Modification::Ser),
        _ => None,
    }
}

/// Atom indices of every modification group, found from bonding patterns
/// and from dedicated residues.
///
/// * Ac — carbonyl carbon with a terminal oxygen, a methyl and an N/O
///   attachment: `X–C(=O)–CH3`.
/// * Gc — the same with a hydroxymethyl on an N: `N–C(=O)–CH2–OH`.
/// * Me — a methyl carbon whose only heavy neighbour is an ether/ester O.
/// * S — a sulfur with its terminal oxygens.
/// * Ser — the atoms of a serine residue.
///
/// Hydrogens on member atoms are members too.
pub fn detect_modification_groups(
    ls: &LabeledStructure,
    g: &BondGraph,
) -> BTreeMap<Modification, BTreeSet<usize>> {
    let s = &ls.structure;
    let mut groups: BTreeMap<Modification, BTreeSet<usize>> = BTreeMap::new();
    let add = |m: Modification, atoms: &[usize], groups: &mut BTreeMap<Modification, BTreeSet<usize>>| {
        let set = groups.entry(m).or_default();
        for &a in atoms {
            set.insert(a);
            set.extend(hydrogens(s, g, a));
        }
    };
    let terminal = |i: usize, owner: usize| heavy_neighbors(s, g, i).all(|j| j == owner);

    for res in &s.residues {
        if let Some(m) = group_for_code(&res.code) {
            add(m, &res.atoms, &mut groups);
        }
    }

    for c in 0..s.atoms.len() {
        match elem(s, c) {
            "C" => {
                let heavy: Vec<usize> = heavy_neighbors(s, g, c).collect();
                // Carbonyl of an acyl group.
                if heavy.len() == 3 {
                    let oxo: Vec<usize> = heavy
                        .iter()
                        .copied()
                        .filter(|&o| elem(s, o) == "O" && terminal(o, c) && hydrogens(s, g, o).is_empty())
                        .collect();
                    if oxo.len() == 1 {
                        let rest: Vec<usize> = heavy.iter().copied().filter(|&j| j != oxo[0]).collect();
                        for (k, &m) in rest.iter().enumerate() {
                            let anchor = rest[1 - k];
                            if elem(s, m) != "C" {
                                continue;
                            }
                            let m_heavy: Vec<usize> = heavy_neighbors(s, g, m).filter(|&j| j != c).collect();
                            let anchor_el = elem(s, anchor);
                            if m_heavy.is_empty() && (anchor_el == "N" || anchor_el == "O") {
                                add(Modification::Ac, &[c, oxo[0], m], &mut groups);
                            } else if m_heavy.len() == 1
                                && elem(s, m_heavy[0]) == "O"
                                && terminal(m_heavy[0], m)
                                && anchor_el == "N"
                            {
                                add(Modification::Gc, &[c, oxo[0], m, m_heavy[0]], &mut groups);
                            }
                        }
                    }
                }
                // O-methyl.
                if heavy.len() == 1 && elem(s, heavy[0]) == "O" {
                    let o = heavy[0];
                    if heavy_neighbors(s, g, o).any(|j| j != c && elem(s, j) == "C") {
                        add(Modification::Me, &[c], &mut groups);
                    }
                }
            }
            "S" => {
                let mut members = vec![c];
                members.extend(heavy_neighbors(s, g, c).filter(|&o| elem(s, o) == "O" && terminal(o, c)));
                add(Modification::S, &members, &mut groups);
            }
            _ => {}
        }
    }
    groups.retain(|_, v| !v.is_empty());
    groups
}

/// Shortest path from every atom to each detected modification group.
///
/// Ties between equally short paths go to the smallest sequence of atom
/// serials, so the result does not depend on atom order in the file.
pub fn modification_paths(ls: &LabeledStructure, g: &BondGraph) -> Vec<[Option<ModPath>; 5]> {
    let s = &ls.structure;
    let n = s.atoms.len();
    // Work on a copy of the graph indexed by serial rank.
    let mut by_serial: Vec<usize> = (0..n).collect();
    by_serial.sort_by_key(|&i| s.atoms[i].serial);
    let mut rank = vec![0; n];
    for (r, &i) in by_serial.iter().enumerate() {
        rank[i] = r;
    }
    let ranked = BondGraph::from_edges(n, g.edges().into_iter().map(|(a, b)| (rank[a], rank[b])));

    let groups = detect_modification_groups(ls, g);
    let mut out: Vec<[Option<ModPath>; 5]> = vec![Default::default(); n];
    for (k, m) in PATH_MODIFICATIONS.iter().enumerate() {
        let Some(members) = groups.get(m) else {
            continue;
        };
        let targets: BTreeSet<usize> = members.iter().map(|&i| rank[i]).collect();
        for (a, slot) in out.iter_mut().enumerate() {
            if let Ok((d, path)) = shortest_atom_path(&ranked, rank[a], &targets) {
                *slot.get_mut(k).expect("five groups") = Some(ModPath {
                    distance: d,
                    path: path.iter().map(|&r| s.atoms[by_serial[r]].serial).collect(),
                });
            }
        }
    }
    out
}

/// One row per atom, in file order.
pub fn derive_features(
    ls: &LabeledStructure,
    m: &ResidueMatch,
    st: &ShiftTable,
    g: &BondGraph,
) -> Vec<AnnotatedRow> {
    let s = &ls.structure;
    let owner = s.atom_residues();
    let paths = modification_paths(ls, g);
    let ac = detect_modification_groups(ls, g).remove(&Modification::Ac).unwrap_or_default();

    let residue_info: Vec<(String, String, MonoName)> = s
        .residues
        .iter()
        .enumerate()
        .map(|(r, res)| match m.mapping.get(&r) {
            Some(&rec) => {
                let rec = &st.records[rec];
                (rec.mono_name.clone(), rec.lineage.clone(), parse_mono_name(&rec.mono_name))
            }
            None => (res.code.clone(), String::new(), MonoName::unknown()),
        })
        .collect();

    s.atoms
        .iter()
        .enumerate()
        .zip(paths)
        .map(|((i, atom), mods)| {
            let r = owner[i];
            let (name, lineage, mono) = &residue_info[r];
            let label = ls.labels.get(&atom.serial);
            let shift = label.map(|l| l.value);
            let ring_target = label.is_some_and(|l| l.ring && matches!(l.nucleus, Nucleus::C13 | Nucleus::H1));
            AnnotatedRow {
                atom_num: atom.serial,
                atom_name: atom.name.clone(),
                residual_name: s.residues[r].code.clone(),
                residual_num: s.residues[r].serial,
                x: atom.coord[0],
                y: atom.coord[1],
                z: atom.coord[2],
                atom_type: atom.element.clone(),
                residual_accurate_name: name.clone(),
                lineage: lineage.clone(),
                ac_component: ac.contains(&i),
                bound_ab: mono.anomer,
                fischer_projection_dl: mono.configuration,
                reformulated_standard_mono: mono.stem,
                carbon_number_pf: mono.ring,
                mods,
                main_ring_shift: if ring_target { shift } else { None },
                shift,
            }
        })
        .collect()
}
