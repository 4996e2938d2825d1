//! Synthetic graphs for the numerical and learning tests.

use glycoshift::model::MolecularGraph;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// A connected random graph: a random tree plus a few extra edges, with
/// uniform features, labels, and a mask that keeps at least one node.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, d: usize, heads: usize) -> MolecularGraph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    for _ in 0..n / 3 {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && !edges.contains(&(a.min(b), a.max(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0));
    let y = Array2::from_shape_fn((n, heads), |_| rng.random_range(-2.0..2.0));
    let mut mask = Array2::from_shape_fn((n, heads), |_| rng.random_bool(0.6));
    for k in 0..heads {
        mask[[rng.random_range(0..n), k]] = true;
    }
    MolecularGraph::new("random", x, edges, y, mask)
}

/// Ring-shaped molecules whose labels are linear in the node features.
///
/// Each graph is a handful of disjoint 5- or 6-rings. Features are drawn per
/// ring and shared by its atoms; since every ring is 2-regular, the
/// normalized adjacency maps that signal to itself and the linear target is
/// exactly representable by the network. `noise` is the label noise σ.
pub struct RingCorpus {
    pub graphs: Vec<MolecularGraph>,
    pub weights: Array1<f64>,
}

pub fn ring_corpus(n_graphs: usize, d: usize, noise: f64, seed: u64) -> RingCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Uniform(0,1) features have variance 1/12; scale so the labels have
    // roughly unit spread.
    let weights = Array1::from_shape_fn(d, |_| rng.random_range(-1.0..1.0) * (12.0 / d as f64).sqrt() * 1.4);
    ring_corpus_with(n_graphs, weights, noise, seed)
}

/// As [`ring_corpus`], with given weights (a zero weight makes a feature
/// irrelevant).
pub fn ring_corpus_with(n_graphs: usize, weights: Array1<f64>, noise: f64, seed: u64) -> RingCorpus {
    let d = weights.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let eps = Normal::new(0.0, noise).unwrap();
    let graphs = (0..n_graphs)
        .map(|g| {
            let rings: Vec<usize> = (0..rng.random_range(2..=4)).map(|_| rng.random_range(5..=6)).collect();
            let n: usize = rings.iter().sum();
            let mut x = Array2::zeros((n, d));
            let mut edges = Vec::new();
            let mut start = 0;
            for &len in &rings {
                let f: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
                for i in 0..len {
                    for (k, v) in f.iter().enumerate() {
                        x[[start + i, k]] = *v;
                    }
                    edges.push((start + i, start + (i + 1) % len));
                }
                start += len;
            }
            let clean = x.dot(&weights);
            let y = Array2::from_shape_fn((n, 1), |(i, _)| clean[i] + eps.sample(&mut rng));
            let mask = Array2::from_shape_fn((n, 1), |_| rng.random_bool(0.8));
            MolecularGraph::new(format!("ring{g}"), x, edges, y, mask)
        })
        .collect();
    RingCorpus { graphs, weights }
}

/// Standard deviation of all masked labels.
pub fn label_std(graphs: &[MolecularGraph]) -> f64 {
    let v: Vec<f64> = graphs
        .iter()
        .flat_map(|g| g.y.iter().zip(g.mask.iter()).filter(|(_, m)| **m).map(|(y, _)| *y).collect::<Vec<_>>())
        .collect();
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}
