//! Independent reference implementations shared by the test suites and the
//! acceptance runner.

use std::collections::{BTreeMap, BTreeSet};

use glycoshift::analysis::{AnalysisError, CoalitionGame};
use glycoshift::annotate::{assign_shifts, match_residues};
use glycoshift::bonds::{distance, infer_bonds, residue_linkage_graph, BondThresholds};
use glycoshift::model::{GcnModel, MolecularGraph};
use glycoshift::shifts::{parse_exp_shifts, parse_sim_shifts, ShiftTable};
use glycoshift::structure::{parse_pdb, Atom, ResidueRecord, Structure};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{branched_tree, duplicate_names, linear_chain, phosphoryl, Fixture};

/// Every pair within its element cut-off, plus CONECT pairs.
pub fn brute_force_bonds(s: &Structure, t: &BondThresholds) -> Vec<(usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..s.atoms.len() {
        for j in i + 1..s.atoms.len() {
            let (a, b) = (&s.atoms[i], &s.atoms[j]);
            if distance(&a.coord, &b.coord) <= t.for_pair(&a.element, &b.element) {
                out.insert((i, j));
            }
            if s.connect_pairs.contains(&(a.serial.min(b.serial), a.serial.max(b.serial))) {
                out.insert((i, j));
            }
        }
    }
    out.into_iter().collect()
}

pub fn random_structure(rng: &mut ChaCha8Rng, n: usize, box_size: f64) -> Structure {
    const ELEMENTS: [&str; 5] = ["C", "C", "O", "H", "N"];
    let atoms: Vec<Atom> = (0..n)
        .map(|i| Atom {
            serial: i as u32 + 1,
            name: format!("X{i}"),
            element: ELEMENTS[rng.random_range(0..ELEMENTS.len())].to_string(),
            residue_serial: 1,
            coord: [0, 1, 2].map(|_| rng.random_range(-box_size..box_size)),
            hetero: true,
        })
        .collect();
    let mut connect_pairs = BTreeSet::new();
    for _ in 0..rng.random_range(0..3) {
        let a = rng.random_range(1..=n as u32);
        let b = rng.random_range(1..=n as u32);
        if a != b {
            connect_pairs.insert((a.min(b), a.max(b)));
        }
    }
    Structure {
        id: "rand".into(),
        atoms,
        residues: vec![ResidueRecord {
            serial: 1,
            code: "UNK".into(),
            atoms: (0..n).collect(),
        }],
        connect_pairs,
        remarks: vec![],
    }
}

pub fn fixtures() -> Vec<Fixture> {
    vec![linear_chain(5), branched_tree(), phosphoryl(), duplicate_names()]
}

/// Atom serial → (label, value) after matching.
pub fn labels(f: &Fixture, st: &ShiftTable) -> BTreeMap<u32, (String, f64)> {
    let s = parse_pdb(&f.id, &f.pdb()).unwrap();
    let g = infer_bonds(&s, &BondThresholds::default());
    let lg = residue_linkage_graph(&s, &g);
    let m = match_residues(&s, &lg, st).unwrap();
    assign_shifts(&s, st, &m)
        .labels
        .into_iter()
        .map(|(k, l)| (k, (l.label, l.value)))
        .collect()
}

pub fn exp(f: &Fixture, order: &[usize]) -> ShiftTable {
    parse_exp_shifts(&f.id, &f.exp_csv(order)).unwrap()
}

pub fn sim(f: &Fixture, order: &[usize]) -> ShiftTable {
    let (c, h) = f.sim_tables(order);
    parse_sim_shifts(&f.id, &c, &h).unwrap()
}

pub fn small_model(rng: &mut ChaCha8Rng, d: usize, heads: usize) -> GcnModel {
    let mut m = GcnModel::init(d, 8, 2, heads, rng);
    m.target_mean = (0..heads).map(|_| rng.random_range(-1.0..1.0)).collect();
    m.target_std = (0..heads).map(|_| rng.random_range(0.5..2.0)).collect();
    m
}

/// Central differences are only an oracle where the loss is smooth on
/// `[θ − ε, θ + ε]`; entries whose perturbation flips a ReLU are reported
/// separately instead of compared.
pub struct GradCheck {
    /// ‖a − n‖ / (‖a‖ + ‖n‖) per parameter tensor over the smooth entries.
    pub errors: Vec<f64>,
    pub checked: usize,
    pub kinks: usize,
}

pub fn gradient_check(m: &GcnModel, g: &MolecularGraph, eps: f64) -> GradCheck {
    let (_, grads) = m.loss_and_grad(g).unwrap();
    let pattern = m.relu_pattern(g).unwrap();
    let mut out = GradCheck {
        errors: Vec::new(),
        checked: 0,
        kinks: 0,
    };
    for (p, analytic) in grads.iter().enumerate() {
        let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
        for idx in ndarray::indices(analytic.raw_dim()) {
            let mut plus = m.clone();
            plus.params[p][idx] += eps;
            let mut minus = m.clone();
            minus.params[p][idx] -= eps;
            if plus.relu_pattern(g).unwrap() != pattern || minus.relu_pattern(g).unwrap() != pattern {
                out.kinks += 1;
                continue;
            }
            out.checked += 1;
            let numeric = (plus.loss(g).unwrap() - minus.loss(g).unwrap()) / (2.0 * eps);
            diff += (analytic[idx] - numeric).powi(2);
            na += analytic[idx].powi(2);
            nn += numeric * numeric;
        }
        let scale = na.sqrt() + nn.sqrt();
        out.errors.push(if scale == 0.0 { 0.0 } else { diff.sqrt() / scale });
    }
    out
}

/// Exact Shapley values by the subset formula.
pub fn exact_shapley<G: CoalitionGame>(game: &G) -> (Vec<f64>, BTreeMap<u64, f64>) {
    let n = game.players();
    let v: BTreeMap<u64, f64> = (0..1u64 << n).map(|m| (m, game.payoff(m).unwrap())).collect();
    let fact = |k: usize| (1..=k).product::<usize>() as f64;
    let phi = (0..n)
        .map(|i| {
            v.keys()
                .filter(|&&s| s & (1 << i) == 0)
                .map(|&s| {
                    let size = s.count_ones() as usize;
                    let w = fact(size) * fact(n - size - 1) / fact(n);
                    w * (v[&(s | 1 << i)] - v[&s])
                })
                .sum()
        })
        .collect();
    (phi, v)
}

pub struct TableGame(pub BTreeMap<u64, f64>, pub usize);

impl CoalitionGame for TableGame {
    fn players(&self) -> usize {
        self.1
    }
    fn payoff(&self, c: u64) -> Result<f64, AnalysisError> {
        Ok(self.0[&c])
    }
}

