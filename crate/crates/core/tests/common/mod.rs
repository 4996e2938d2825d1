//! Synthetic oligosaccharides for integration tests.
//!
//! Each residue is an idealized planar pyranose (ring radius 1.45 Å) with
//! radial substituents and out-of-plane hydrogens. Residues sit 25 Å apart
//! along x, so no bond is inferred between them; glycosidic bonds are given
//! as CONECT records from the child's anomeric carbon to the parent's
//! oxygen, the convention in which the parent keeps the bridging oxygen.

#![allow(dead_code)]

pub mod oracles;
pub mod synth;

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// C1–C6, O2–O6 (O1 only at the root).
    Hexose,
    /// 6-deoxy: C6 is a methyl.
    Deoxyhexose,
    /// Hexose with an N-acetyl on C2.
    HexNAc,
    /// Hexose with a methyl ether on O3.
    Methyl3,
    /// A phosphate residue (P + three oxygens), not a sugar.
    Phosphate,
}

#[derive(Debug, Clone)]
pub struct Res {
    pub code: &'static str,
    pub name: &'static str,
    pub kind: Kind,
    /// `(parent index, parent position)`; children always link through C1.
    pub parent: Option<(usize, u8)>,
}

pub fn res(code: &'static str, name: &'static str, kind: Kind, parent: Option<(usize, u8)>) -> Res {
    Res {
        code,
        name,
        kind,
        parent,
    }
}

#[derive(Debug, Clone)]
pub struct Atom {
    pub serial: u32,
    pub name: String,
    pub element: &'static str,
    pub residue: usize,
    pub coord: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: String,
    pub residues: Vec<Res>,
    pub atoms: Vec<Atom>,
    /// Intended bonds as atom-index pairs `(lo, hi)`, sorted.
    pub bonds: Vec<(usize, usize)>,
    /// Serial pairs for CONECT.
    pub links: Vec<(u32, u32)>,
}

const RING: f64 = 1.45;
const SUB: f64 = 1.43;
const HYD: f64 = 1.0;
const SPACING: f64 = 25.0;

fn ring_vertex(k: usize) -> [f64; 3] {
    let a = std::f64::consts::PI / 3.0 * k as f64;
    [RING * a.cos(), RING * a.sin(), 0.0]
}

fn outward(k: usize, dist: f64) -> [f64; 3] {
    let a = std::f64::consts::PI / 3.0 * k as f64;
    [(RING + dist) * a.cos(), (RING + dist) * a.sin(), 0.0]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Deterministic, residue-specific shifts.
pub fn carbon_shift(residue: usize, pos: u8) -> f64 {
    60.0 + 5.0 * pos as f64 + 0.25 * residue as f64
}

pub fn hydrogen_shift(residue: usize, pos: u8) -> f64 {
    3.0 + 0.1 * pos as f64 + 0.01 * residue as f64
}

pub fn is_sugar(kind: Kind) -> bool {
    kind != Kind::Phosphate
}

impl Fixture {
    pub fn build(id: &str, residues: Vec<Res>) -> Self {
        let mut f = Fixture {
            id: id.to_string(),
            residues: residues.clone(),
            atoms: Vec::new(),
            bonds: Vec::new(),
            links: Vec::new(),
        };
        let mut anchors: Vec<std::collections::HashMap<String, usize>> = Vec::new();
        for (r, spec) in residues.iter().enumerate() {
            let origin = [SPACING * r as f64, 0.0, 0.0];
            let mut local: Vec<(String, &'static str, [f64; 3])> = Vec::new();
            let mut bonds: Vec<(usize, usize)> = Vec::new();
            let is_child = spec.parent.is_some();
            match spec.kind {
                Kind::Phosphate => {
                    local.push(("P".into(), "P", [0.0; 3]));
                    for (k, d) in [[1.45, 0.0, 0.0], [-0.7, 1.27, 0.0], [-0.7, -1.27, 0.0]].iter().enumerate() {
                        local.push((format!("O{}P", k + 1), "O", *d));
                        bonds.push((0, k + 1));
                    }
                }
                kind => {
                    // Ring order: C1, C2, C3, C4, C5, O5 at vertices 0..5.
                    let ring = ["C1", "C2", "C3", "C4", "C5", "O5"];
                    for (k, n) in ring.iter().enumerate() {
                        local.push((n.to_string(), if k == 5 { "O" } else { "C" }, ring_vertex(k)));
                    }
                    for k in 0..6 {
                        bonds.push((k, (k + 1) % 6));
                    }
                    // Ring hydrogens.
                    for k in 0..5 {
                        let i = local.len();
                        local.push((format!("H{}", k + 1), "H", add(ring_vertex(k), [0.0, 0.0, HYD])));
                        bonds.push((k, i));
                    }
                    // Hydroxyl oxygens O2..O4, and O1 only on the root.
                    for k in 0..4 {
                        if k == 0 && is_child {
                            continue;
                        }
                        if k == 1 && kind == Kind::HexNAc {
                            continue;
                        }
                        let i = local.len();
                        local.push((format!("O{}", k + 1), "O", outward(k, SUB)));
                        bonds.push((k, i));
                    }
                    // C6 and its substituents.
                    let c6 = local.len();
                    local.push(("C6".into(), "C", outward(4, SUB)));
                    bonds.push((4, c6));
                    let h61 = local.len();
                    local.push(("H61".into(), "H", add(outward(4, SUB), [0.0, 0.0, HYD])));
                    bonds.push((c6, h61));
                    let h62 = local.len();
                    local.push(("H62".into(), "H", add(outward(4, SUB), [0.0, 0.0, -HYD])));
                    bonds.push((c6, h62));
                    if kind == Kind::Deoxyhexose {
                        let h63 = local.len();
                        local.push(("H63".into(), "H", outward(4, SUB + HYD)));
                        bonds.push((c6, h63));
                    } else {
                        let o6 = local.len();
                        local.push(("O6".into(), "O", outward(4, 2.0 * SUB)));
                        bonds.push((c6, o6));
                    }
                    if kind == Kind::HexNAc {
                        // N2–C7(=O7)–C8H3, laid out radially from C2.
                        let n2 = local.len();
                        local.push(("N2".into(), "N", outward(1, SUB)));
                        bonds.push((1, n2));
                        let c7 = local.len();
                        local.push(("C7".into(), "C", outward(1, 2.0 * SUB)));
                        bonds.push((n2, c7));
                        let o7 = local.len();
                        local.push(("O7".into(), "O", add(outward(1, 2.0 * SUB), [0.0, 0.0, 1.23])));
                        bonds.push((c7, o7));
                        let c8 = local.len();
                        local.push(("C8".into(), "C", outward(1, 3.0 * SUB)));
                        bonds.push((c7, c8));
                        for (j, dz) in [1.0, -1.0].iter().enumerate() {
                            let h = local.len();
                            local.push((format!("H8{}", j + 1), "H", add(outward(1, 3.0 * SUB), [0.0, 0.0, *dz])));
                            bonds.push((c8, h));
                        }
                        let h = local.len();
                        local.push(("H83".into(), "H", outward(1, 3.0 * SUB + HYD)));
                        bonds.push((c8, h));
                    }
                    if kind == Kind::Methyl3 {
                        let o3 = local.iter().position(|(n, _, _)| n == "O3").unwrap();
                        let cm = local.len();
                        local.push(("CM".into(), "C", outward(2, 2.0 * SUB)));
                        bonds.push((o3, cm));
                        let h = local.len();
                        local.push(("HM1".into(), "H", add(outward(2, 2.0 * SUB), [0.0, 0.0, HYD])));
                        bonds.push((cm, h));
                    }
                }
            }
            let base = f.atoms.len();
            let mut names = std::collections::HashMap::new();
            for (name, el, c) in local {
                names.insert(name.clone(), f.atoms.len());
                f.atoms.push(Atom {
                    serial: f.atoms.len() as u32 + 1,
                    name,
                    element: el,
                    residue: r,
                    coord: add(origin, c),
                });
            }
            f.bonds.extend(bonds.into_iter().map(|(a, b)| (base + a.min(b), base + a.max(b))));
            anchors.push(names);
        }
        for (r, spec) in residues.iter().enumerate() {
            if let Some((p, pos)) = spec.parent {
                let (child_atom, parent_atom) = match spec.kind {
                    Kind::Phosphate => (anchors[r]["P"], anchors[p][&format!("O{pos}")]),
                    _ => (anchors[r]["C1"], anchors[p][&format!("O{pos}")]),
                };
                f.links.push((f.atoms[child_atom].serial, f.atoms[parent_atom].serial));
                f.bonds.push((child_atom.min(parent_atom), child_atom.max(parent_atom)));
            }
        }
        f.bonds.sort_unstable();
        f
    }

    pub fn pdb(&self) -> String {
        let mut out = String::from("REMARK   synthetic fixture\n");
        for a in &self.atoms {
            let code = self.residues[a.residue].code;
            let name = if a.name.len() < 4 {
                format!(" {:<3}", a.name)
            } else {
                a.name.clone()
            };
            let _ = writeln!(
                out,
                "HETATM{:>5} {:<4} {:>3} A{:>4}    {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
                a.serial,
                name,
                code,
                a.residue + 1,
                a.coord[0],
                a.coord[1],
                a.coord[2],
                1.0,
                0.0,
                a.element.to_uppercase()
            );
        }
        for (a, b) in &self.links {
            let _ = writeln!(out, "CONECT{a:>5}{b:>5}");
        }
        out.push_str("END\n");
        out
    }

    /// Ring positions with a recorded shift for one residue.
    fn positions(&self, r: usize) -> Vec<u8> {
        match self.residues[r].kind {
            Kind::Phosphate => vec![],
            _ => (1..=6).collect(),
        }
    }

    /// Incoming linkage as `1-p`, or empty for the root.
    pub fn exp_lineage(&self, r: usize) -> String {
        match self.residues[r].parent {
            Some((_, pos)) => format!("1-{pos}"),
            None => String::new(),
        }
    }

    /// Parent positions from the root down, `, 4, 2` style.
    pub fn sim_lineage(&self, r: usize) -> String {
        let mut steps = Vec::new();
        let mut at = r;
        while let Some((p, pos)) = self.residues[at].parent {
            steps.push(pos);
            at = p;
        }
        steps.reverse();
        steps.iter().map(|p| format!(", {p}")).collect()
    }

    /// Experimental CSV with records in `order` (residue indices).
    pub fn exp_csv(&self, order: &[usize]) -> String {
        let mut out = String::from("residue,linkage,atom,shift\n");
        for &r in order {
            let name = self.residues[r].name;
            let lin = self.exp_lineage(r);
            if self.positions(r).is_empty() {
                let _ = writeln!(out, "{name},\"{lin}\",P,");
                continue;
            }
            for p in self.positions(r) {
                let _ = writeln!(out, "{name},\"{lin}\",C{p},{}", carbon_shift(r, p));
            }
            for p in self.positions(r) {
                if p == 6 {
                    let _ = writeln!(out, "{name},\"{lin}\",H61,{}", hydrogen_shift(r, p));
                    let _ = writeln!(out, "{name},\"{lin}\",H62,{}", hydrogen_shift(r, p) + 0.05);
                } else {
                    let _ = writeln!(out, "{name},\"{lin}\",H{p},{}", hydrogen_shift(r, p));
                }
            }
        }
        out
    }

    /// Simulated carbon/hydrogen tables, sugar residues only, in `order`.
    pub fn sim_tables(&self, order: &[usize]) -> (String, String) {
        let mut c = String::from("residue\tlinkage\t1\t2\t3\t4\t5\t6\n");
        let mut h = String::from("residue\tlinkage\t1\t2\t3\t4\t5\t6a\t6b\n");
        for &r in order.iter().filter(|&&r| is_sugar(self.residues[r].kind)) {
            let name = self.residues[r].name;
            let lin = self.sim_lineage(r);
            let _ = write!(c, "{name}\t{lin}");
            let _ = write!(h, "{name}\t{lin}");
            for p in 1..=6u8 {
                let _ = write!(c, "\t{}", carbon_shift(r, p));
                if p == 6 {
                    let _ = write!(h, "\t{}\t{}", hydrogen_shift(r, p), hydrogen_shift(r, p) + 0.05);
                } else {
                    let _ = write!(h, "\t{}", hydrogen_shift(r, p));
                }
            }
            c.push('\n');
            h.push('\n');
        }
        (c, h)
    }

    pub fn natural_order(&self) -> Vec<usize> {
        (0..self.residues.len()).collect()
    }

    /// Expected `(atom serial → shift)` for every labelled atom.
    pub fn expected_labels(&self) -> std::collections::BTreeMap<u32, f64> {
        let mut out = std::collections::BTreeMap::new();
        for a in &self.atoms {
            let r = a.residue;
            if !is_sugar(self.residues[r].kind) {
                continue;
            }
            let v = match a.name.as_str() {
                n @ ("C1" | "C2" | "C3" | "C4" | "C5" | "C6") => Some(carbon_shift(r, n[1..].parse().unwrap())),
                n @ ("H1" | "H2" | "H3" | "H4" | "H5") => Some(hydrogen_shift(r, n[1..].parse().unwrap())),
                "H61" => Some(hydrogen_shift(r, 6)),
                "H62" => Some(hydrogen_shift(r, 6) + 0.05),
                _ => None,
            };
            if let Some(v) = v {
                out.insert(a.serial, v);
            }
        }
        out
    }
}

/// A (1-4)-linked chain of `n` residues; names repeat after five.
pub fn linear_chain(n: usize) -> Fixture {
    let names = ["a-D-Glcp", "b-D-Galp", "b-D-Glcp", "a-D-Manp", "a-L-Rhap"];
    let codes = ["GLC", "GAL", "BGC", "MAN", "RAM"];
    let residues = (0..n)
        .map(|i| {
            let kind = if i % 5 == 4 { Kind::Deoxyhexose } else { Kind::Hexose };
            res(codes[i % 5], names[i % 5], kind, (i > 0).then(|| (i - 1, 4)))
        })
        .collect();
    Fixture::build("chain", residues)
}

/// Branched: root Man with Glc on O3, GlcNAc on O6, and Fuc on the Glc's O2.
pub fn branched_tree() -> Fixture {
    Fixture::build(
        "branched",
        vec![
            res("MAN", "b-D-Manp", Kind::Hexose, None),
            res("GLC", "a-D-Glcp", Kind::Hexose, Some((0, 3))),
            res("NAG", "b-D-GlcpNAc", Kind::HexNAc, Some((0, 6))),
            res("FUC", "a-L-Fucp", Kind::Deoxyhexose, Some((1, 2))),
        ],
    )
}

/// Disaccharide with a phosphate on the root's O6.
pub fn phosphoryl() -> Fixture {
    Fixture::build(
        "phospho",
        vec![
            res("GLC", "a-D-Glcp", Kind::Hexose, None),
            res("GAL", "b-D-Galp", Kind::Hexose, Some((0, 4))),
            res("PO3", "PO3", Kind::Phosphate, Some((0, 6))),
        ],
    )
}

/// Two identically named Gal residues on the same root, told apart only by
/// their linkage positions (1-3 vs 1-4).
pub fn duplicate_names() -> Fixture {
    Fixture::build(
        "dupes",
        vec![
            res("GLC", "b-D-Glcp", Kind::Hexose, None),
            res("GAL", "b-D-Galp", Kind::Hexose, Some((0, 4))),
            res("GAL", "b-D-Galp", Kind::Hexose, Some((0, 3))),
            res("GLC", "a-D-Glcp", Kind::Methyl3, Some((1, 6))),
        ],
    )
}
