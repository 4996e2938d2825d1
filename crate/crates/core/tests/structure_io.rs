use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

mod common;

use common::oracles::{brute_force_bonds, random_structure};
use glycoshift::bonds::{infer_bonds, shortest_atom_path, BondGraph, BondThresholds};
use glycoshift::structure::{parse_pdb, serialize_structure};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture_texts() -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pdb");
    let mut out: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn ten_fixtures_round_trip_exactly() {
    let fixtures = fixture_texts();
    assert_eq!(fixtures.len(), 10);
    for (name, text) in fixtures {
        let s = parse_pdb(&name, &text).unwrap();
        assert_eq!(serialize_structure(&s), text, "{name}");
        assert_eq!(parse_pdb(&name, &serialize_structure(&s)).unwrap(), s, "{name}");
    }
}

#[test]
fn fixture_contents() {
    let text = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pdb/07_ions.pdb")).unwrap();
    let s = parse_pdb("ions", &text).unwrap();
    let els: Vec<&str> = s.atoms.iter().map(|a| a.element.as_str()).collect();
    assert_eq!(els, ["Na", "Cl", "Ca"]);
    assert_eq!(s.residues.len(), 3);

    let text = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pdb/04_remarks.pdb")).unwrap();
    let s = parse_pdb("remarks", &text).unwrap();
    assert_eq!(s.remarks.len(), 3);
    assert!(s.remarks[1].starts_with("SWECON"));
}

#[test]
fn bonds_match_brute_force_on_100_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let t = BondThresholds::default();
    for k in 0..100 {
        let n = rng.random_range(2..60);
        // Dense enough that many pairs fall near the cut-offs.
        let s = random_structure(&mut rng, n, 1.0 + 0.05 * k as f64);
        assert_eq!(infer_bonds(&s, &t).edges(), brute_force_bonds(&s, &t), "graph {k}");
    }
}

#[test]
fn bonds_exactly_at_the_cutoff_count() {
    let mut s = random_structure(&mut ChaCha8Rng::seed_from_u64(1), 2, 1.0);
    s.connect_pairs.clear();
    s.atoms[0].element = "C".into();
    s.atoms[1].element = "O".into();
    s.atoms[0].coord = [0.0; 3];
    s.atoms[1].coord = [1.5, 0.0, 0.0];
    assert_eq!(infer_bonds(&s, &BondThresholds::default()).edge_count(), 1);
    s.atoms[1].coord = [1.5000001, 0.0, 0.0];
    assert_eq!(infer_bonds(&s, &BondThresholds::default()).edge_count(), 0);
}

/// All simple paths from `from` ending at the first target they reach.
fn all_simple_paths(g: &BondGraph, from: usize, targets: &BTreeSet<usize>) -> Vec<Vec<usize>> {
    fn go(g: &BondGraph, path: &mut Vec<usize>, targets: &BTreeSet<usize>, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if targets.contains(&u) {
            out.push(path.clone());
            return;
        }
        for &v in g.neighbors(u) {
            if !path.contains(&v) {
                path.push(v);
                go(g, path, targets, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(g, &mut vec![from], targets, &mut out);
    out
}

#[test]
fn paths_match_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let n = rng.random_range(2..10);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.3) {
                    edges.push((a, b));
                }
            }
        }
        let g = BondGraph::from_edges(n, edges);
        let targets: BTreeSet<usize> = (0..n).filter(|_| rng.random_bool(0.25)).collect();
        for from in 0..n {
            let best = all_simple_paths(&g, from, &targets)
                .into_iter()
                .min_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
            match (shortest_atom_path(&g, from, &targets), best) {
                (Ok((d, p)), Some(b)) => {
                    assert_eq!(d, b.len() - 1);
                    assert_eq!(p, b);
                }
                (Err(_), None) => {}
                (got, want) => panic!("from {from}: {got:?} vs {want:?}"),
            }
        }
    }
}

fn pdb_line(serial: u32, name: &str, code: &str, res: i32, c: [f64; 3], el: &str, het: bool) -> String {
    let rec = if het { "HETATM" } else { "ATOM" };
    let name = if name.len() >= 4 { name.to_string() } else { format!(" {name}") };
    format!(
        "{rec:<6}{serial:>5} {name:<4} {code:>3} A{res:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00          {el:>2}\n",
        c[0], c[1], c[2]
    )
}

proptest! {
    #[test]
    fn canonical_text_is_a_fixed_point(
        atoms in prop::collection::vec(
            (
                prop::sample::select(vec!["C1", "O5", "H61", "C", "HO2'", "N2"]),
                prop::sample::select(vec!["GLC", "NAG", "SO4"]),
                1i32..4,
                prop::array::uniform3(-99_999i64..99_999),
                prop::sample::select(vec!["C", "O", "H", "N"]),
                any::<bool>(),
            ),
            1..25,
        ),
        links in prop::collection::vec((0usize..25, 0usize..25), 0..5),
    ) {
        let mut text = String::new();
        for (i, (name, code, res, c, el, het)) in atoms.iter().enumerate() {
            text += &pdb_line(i as u32 + 1, name, code, *res, c.map(|v| v as f64 / 1000.0), el, *het);
        }
        text += "TER\n";
        let n = atoms.len();
        let pairs: BTreeSet<(usize, usize)> = links
            .iter()
            .map(|&(a, b)| (a % n + 1, b % n + 1))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        for (a, b) in &pairs {
            text += &format!("CONECT{a:>5}{b:>5}\n");
        }
        text += "END\n";
        let s = parse_pdb("p", &text).unwrap();
        let back = serialize_structure(&s);
        prop_assert_eq!(parse_pdb("p", &back).unwrap(), s.clone());
        prop_assert_eq!(serialize_structure(&parse_pdb("p", &back).unwrap()), back);
        prop_assert_eq!(s.atoms.len(), n);
    }

    #[test]
    fn bond_graph_is_symmetric_and_loop_free(seed in any::<u64>(), n in 1usize..40) {
        let s = random_structure(&mut ChaCha8Rng::seed_from_u64(seed), n, 3.0);
        let g = infer_bonds(&s, &BondThresholds::default());
        for i in 0..n {
            prop_assert!(!g.has_edge(i, i));
            for &j in g.neighbors(i) {
                prop_assert!(g.has_edge(j, i));
            }
        }
    }
}
