mod common;

use std::collections::BTreeMap;

use common::oracles::{exact_shapley, TableGame};
use common::synth::ring_corpus_with;
use common::{linear_chain, res, Fixture, Kind};
use glycoshift::analysis::shapley::shapley_sampled;
use glycoshift::analysis::{
    ablate, dataset_stats, select_columns, shapley_estimate, AnalysisError, FeatureBlocks, RetrainGame,
};
use glycoshift::bonds::BondThresholds;
use glycoshift::dataset::{annotate_carbohydrate, ShiftSource};
use glycoshift::features::AnnotatedRow;
use glycoshift::model::{train, MolecularGraph, TrainConfig};
use ndarray::array;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg() -> TrainConfig {
    TrainConfig {
        learning_rate: 0.01,
        hidden: 32,
        max_epochs: 300,
        seed: 4,
        ..TrainConfig::default()
    }
}

/// Four feature columns: block A = {0, 1} carries the signal, block B =
/// {2, 3} is irrelevant.
fn depends_on_a() -> (Vec<MolecularGraph>, FeatureBlocks) {
    let corpus = ring_corpus_with(20, array![2.0, -1.5, 0.0, 0.0], 0.01, 21);
    let blocks = FeatureBlocks {
        names: vec!["A".into(), "B".into()],
        columns: vec![vec![0, 1], vec![2, 3]],
        base: vec![],
    };
    (corpus.graphs, blocks)
}

#[test]
fn none_row_equals_plain_training() {
    let (graphs, blocks) = depends_on_a();
    let report = ablate(&graphs, &blocks, &["A".into()], &cfg()).unwrap();
    assert_eq!(report.rows[0].0, "None");
    let plain = train(&select_columns(&graphs, &blocks.columns_for(blocks.all())), &cfg()).unwrap();
    assert_eq!(report.get("None").unwrap(), plain.val_rmse.as_slice());
    // With every column selected this is the original matrix.
    assert_eq!(train(&graphs, &cfg()).unwrap().val_rmse, plain.val_rmse);
}

#[test]
fn ablation_tracks_the_informative_feature() {
    let (graphs, blocks) = depends_on_a();
    let report = ablate(&graphs, &blocks, &["A".into(), "B".into()], &cfg()).unwrap();
    let none = report.get("None").unwrap()[0];
    let drop_a = report.get("A").unwrap()[0];
    let drop_b = report.get("B").unwrap()[0];
    assert!(drop_a > none, "{report:?}");
    // Dropping B changes the error by at most a small fraction of what
    // dropping A costs.
    assert!((drop_b - none).abs() < 0.1 * (drop_a - none), "{report:?}");
    assert!(report.rows.iter().all(|(_, v)| v.iter().all(|&x| x >= 0.0)));
    assert!(report.to_csv().starts_with("# ablation seed=4\n"));
}

#[test]
fn unknown_feature_is_an_error() {
    let (graphs, blocks) = depends_on_a();
    assert_eq!(
        ablate(&graphs, &blocks, &["C".into()], &cfg()).unwrap_err(),
        AnalysisError::NotEncoded("C".into())
    );
}

#[test]
fn sampled_shapley_matches_exact_enumeration() {
    let (graphs, blocks) = depends_on_a();
    let report = shapley_estimate(&graphs, &blocks, 200, &cfg()).unwrap();
    let (exact, _) = exact_shapley(&RetrainGame {
        graphs: &graphs,
        blocks: &blocks,
        cfg: &cfg(),
    });
    for k in 0..2 {
        let gap = (report.values[k] - exact[k]).abs();
        assert!(gap <= 2.0 * report.stderr[k] + 1e-12, "{}: {} vs {}", report.names[k], report.values[k], exact[k]);
    }
    // A lowers the error; B barely matters.
    assert!(report.values[0] > 0.0);
    assert!(report.values[0] > 10.0 * report.values[1].abs());
}

#[test]
fn efficiency_on_three_features() {
    let corpus = ring_corpus_with(12, array![1.5, 0.0, -1.0, 0.5, 0.0, 0.0], 0.01, 5);
    let blocks = FeatureBlocks {
        names: vec!["A".into(), "B".into(), "C".into()],
        columns: vec![vec![0, 1], vec![2, 3], vec![4, 5]],
        base: vec![],
    };
    let c = TrainConfig { max_epochs: 100, ..cfg() };
    let game = RetrainGame {
        graphs: &corpus.graphs,
        blocks: &blocks,
        cfg: &c,
    };
    let (phi, v) = exact_shapley(&game);
    let total = v[&0b111] - v[&0];
    assert!((phi.iter().sum::<f64>() - total).abs() < 1e-9);

    // Sampled estimates on the same payoff table add up too: each ordering's
    // marginals telescope to v(all) − v(none).
    let names: Vec<String> = blocks.names.clone();
    let sampled = shapley_sampled(&TableGame(v.clone(), 3), &names, 200, 1).unwrap();
    let err: f64 = sampled.stderr.iter().map(|e| e * e).sum::<f64>().sqrt();
    assert!((sampled.values.iter().sum::<f64>() - total).abs() <= 2.0 * err + 1e-9);
    for k in 0..3 {
        assert!((sampled.values[k] - phi[k]).abs() <= 3.0 * sampled.stderr[k] + 1e-12);
    }
}

#[test]
fn null_player_gets_zero() {
    let mut v = BTreeMap::new();
    for m in 0u64..8 {
        // Player 1 never changes the payoff.
        let a = (m & 1 != 0) as u8 as f64;
        let c = (m & 4 != 0) as u8 as f64;
        v.insert(m, -3.0 + 1.0 * a + 0.5 * c + 0.25 * a * c);
    }
    let names: Vec<String> = ["a", "null", "c"].map(String::from).to_vec();
    let r = shapley_sampled(&TableGame(v, 3), &names, 50, 2).unwrap();
    assert_eq!(r.values[1], 0.0);
    assert_eq!(r.stderr[1], 0.0);
    assert!(r.to_csv().starts_with("# shapley samples=50 seed=2\n"));
}

fn rows_of(f: &Fixture) -> Vec<AnnotatedRow> {
    let (carbon, hydrogen) = f.sim_tables(&f.natural_order());
    annotate_carbohydrate(&f.id, &f.pdb(), &ShiftSource::Sim { carbon, hydrogen }, &BondThresholds::default())
        .unwrap()
        .rows
}

fn stats_corpus() -> Vec<Vec<AnnotatedRow>> {
    let three = Fixture::build(
        "glc3",
        vec![
            res("GLC", "a-D-Glcp", Kind::Hexose, None),
            res("BGC", "b-D-Glcp", Kind::Hexose, Some((0, 4))),
            res("GLC", "a-D-Glcp", Kind::Hexose, Some((1, 6))),
        ],
    );
    vec![rows_of(&three), rows_of(&linear_chain(2))]
}

#[test]
fn stats_on_hand_counted_fixtures() {
    let corpus = stats_corpus();
    let st = dataset_stats(corpus.iter().map(|r| r.as_slice()));
    assert_eq!(st.carb_count, 2);
    assert_eq!(st.mono_count, 5);
    assert_eq!(st.length_histogram, BTreeMap::from([(2, 1), (3, 1)]));
    assert_eq!(st.stem_percentages, BTreeMap::from([("Gal".to_string(), 20.0), ("Glc".to_string(), 80.0)]));
    assert_eq!(st.atom_count, corpus.iter().map(Vec::len).sum::<usize>());
    // 6 carbons and 7 hydrogens per residue.
    assert_eq!(st.labeled_shift_count, 5 * 13);
    assert_eq!(st.shift_by_position[&("C".to_string(), 1)].len(), 5);
    assert!(st.stems_csv().starts_with("stem,percent\nGlc,80.0000\nGal,20.0000\n"));
}

#[test]
fn stats_ignore_input_order() {
    let corpus = stats_corpus();
    let base = dataset_stats(corpus.iter().map(|r| r.as_slice()));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let mut c = corpus.clone();
        c.shuffle(&mut rng);
        for rows in &mut c {
            rows.shuffle(&mut rng);
        }
        let st = dataset_stats(c.iter().map(|r| r.as_slice()));
        assert_eq!(st, base);
        assert_eq!(st.shifts_csv(), base.shifts_csv());
        let total: f64 = st.stem_percentages.values().sum();
        assert!((total - 100.0).abs() < 0.1);
    }
}
