mod common;

use common::{random_row, walk_margin};
use phi_sentinel::gbt::{fit_platt, load_model, save_model, sigmoid, train, train_rows, GbtModel, TrainParams};
use phi_sentinel::metafeatures::NUM_SLOTS;
use phi_sentinel::pipeline::LabeledSet;
use phi_sentinel::synthgen::{generate_corpus, CorpusSpec};
use phi_sentinel::{builtin_library, pipeline, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn mean_logloss(model: &GbtModel, rows: &[Vec<f64>], y: &[u8]) -> f64 {
    rows.iter()
        .zip(y)
        .map(|(x, &l)| {
            let p = sigmoid(walk_margin(model, x));
            if l == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / rows.len() as f64
}

/// Noisy labels driven by two of the features, with missing cells.
fn random_dataset(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<u8>) {
    let n = rng.random_range(20..200);
    let width = rng.random_range(1..12);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_row(rng, width, 0.1)).collect();
    let mut y: Vec<u8> = rows
        .iter()
        .map(|r| {
            let s = r[0].max(-1.0) - r[width - 1].min(1.0) * 0.5 + rng.random_range(-0.8..0.8);
            u8::from(s > 0.0)
        })
        .collect();
    y[0] = 1;
    y[1] = 0;
    (rows, y)
}

fn small_corpus_set() -> LabeledSet {
    let spec = CorpusSpec {
        n_datasets: 2,
        total_columns: 200,
        rows: 300,
        phi_fraction: 0.15,
        seed: 8,
        ..CorpusSpec::default()
    };
    let corpus = generate_corpus(&spec).unwrap();
    let datasets: Vec<_> = corpus.datasets.into_iter().map(|d| d.dataset).collect();
    let ev = pipeline::corpus_evidence(&datasets, &builtin_library(), 300, 1);
    LabeledSet::from_evidence(&ev).unwrap()
}

#[test]
fn training_loss_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let params = TrainParams {
        rounds: 40,
        ..TrainParams::default()
    };
    for _ in 0..50 {
        let (rows, y) = random_dataset(&mut rng);
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let (model, report) = train_rows(&refs, &y, &params).unwrap();
        assert_eq!(report.losses.len(), params.rounds + 1);
        for w in report.losses.windows(2) {
            assert!(w[1] <= w[0], "loss rose from {} to {}", w[0], w[1]);
        }
        // Recompute the trace from raw margins of truncated ensembles.
        for t in [0, 1, params.rounds / 2, params.rounds] {
            let mut partial = model.clone();
            partial.trees.truncate(t);
            let oracle = mean_logloss(&partial, &rows, &y);
            assert!((oracle - report.losses[t]).abs() < 1e-9);
        }
    }
}

#[test]
fn loss_trace_on_corpus_features() {
    let set = small_corpus_set();
    let (_, report) = train(&set.vectors, &set.labels, &TrainParams::default()).unwrap();
    for w in report.losses.windows(2) {
        assert!(w[1] <= w[0]);
    }
    assert!(report.losses.last().unwrap() < &(report.losses[0] * 0.1));
}

#[test]
fn separable_toy_is_fit_exactly() {
    let xs: Vec<Vec<f64>> = (1..=50).flat_map(|i| [vec![-(i as f64)], vec![i as f64]]).collect();
    let y: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let (m, _) = train_rows(&refs, &y, &TrainParams::default()).unwrap();
    for (x, &l) in xs.iter().zip(&y) {
        assert_eq!(u8::from(m.predict_proba_raw(x).unwrap() > 0.5), l);
    }
}

#[test]
fn identical_rows_predict_the_prior() {
    let xs = vec![vec![1.0, 2.0]; 10];
    let y = [1, 0, 0, 0, 1, 0, 0, 0, 0, 0];
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let (m, _) = train_rows(&refs, &y, &TrainParams::default()).unwrap();
    assert!((m.predict_proba_raw(&[5.0, -3.0]).unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn training_errors() {
    let xs = [vec![1.0], vec![2.0]];
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let p = TrainParams::default();
    assert!(matches!(train_rows(&refs, &[1, 1], &p), Err(Error::DegenerateLabels(_))));
    assert!(matches!(train_rows(&refs, &[1], &p), Err(Error::Dimension { .. })));
}

#[test]
fn trees_respect_depth_and_gain_rules() {
    let set = small_corpus_set();
    let (m, _) = train(&set.vectors, &set.labels, &TrainParams::default()).unwrap();
    assert_eq!(m.trees.len(), 100);
    assert!(m.trees.iter().all(|t| t.depth() <= 6));
    assert_eq!(m.eta, 0.09);
}

#[test]
fn margins_match_independent_walker() {
    let set = small_corpus_set();
    let (m, _) = train(&set.vectors, &set.labels, &TrainParams::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for v in &set.vectors {
        assert_eq!(m.margin_of(v).unwrap(), walk_margin(&m, &v.values));
    }
    let mut margins = Vec::new();
    for _ in 0..100 {
        let x = random_row(&mut rng, NUM_SLOTS, 0.3);
        let s = m.predict_margin(&x).unwrap();
        assert_eq!(s, walk_margin(&m, &x));
        margins.push((s, m.predict_proba_raw(&x).unwrap()));
    }
    margins.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(margins.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(m.predict_margin(&[f64::NAN; NUM_SLOTS]).unwrap().is_finite());
    assert!(matches!(m.predict_margin(&[0.0; 3]), Err(Error::Dimension { .. })));
}

#[test]
fn empty_ensemble_and_sigmoid_limits() {
    let m = GbtModel::constant(-1.25);
    assert_eq!(m.predict_margin(&[0.0; NUM_SLOTS]).unwrap(), -1.25);
    assert_eq!(sigmoid(0.0), 0.5);
    assert!(sigmoid(800.0) <= 1.0 && sigmoid(800.0) > 1.0 - 1e-12);
}

#[test]
fn model_round_trips_exactly() {
    let set = small_corpus_set();
    let (mut m, _) = train(&set.vectors, &set.labels, &TrainParams::default()).unwrap();
    m.platt_a = -0.731;
    m.platt_b = 0.1 + 0.2;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    save_model(&m, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.hash(), m.hash());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let x = random_row(&mut rng, NUM_SLOTS, 0.2);
        assert_eq!(
            back.predict_proba_calibrated(&x).unwrap().to_bits(),
            m.predict_proba_calibrated(&x).unwrap().to_bits()
        );
    }

    save_model(&GbtModel::constant(0.5), &path).unwrap();
    assert_eq!(load_model(&path).unwrap(), GbtModel::constant(0.5));

    let s = m.to_json().unwrap();
    std::fs::write(&path, &s[..s.len() - 40]).unwrap();
    assert!(load_model(&path).is_err());
}

#[test]
fn models_are_identical_across_thread_counts() {
    let set = small_corpus_set();
    let fit = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| phi_sentinel::gbt::train_calibrated(&set.vectors, &set.labels, &TrainParams::default()))
            .unwrap()
            .0
    };
    let one = fit(1);
    assert_eq!(one.to_json().unwrap(), fit(4).to_json().unwrap());
}

#[test]
fn platt_recovers_true_logits() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let normal = Normal::new(0.0, 2.0).unwrap();
    let scores: Vec<f64> = (0..2000).map(|_| normal.sample(&mut rng)).collect();
    let labels: Vec<u8> = scores.iter().map(|&s| u8::from(rng.random_bool(sigmoid(s)))).collect();
    let (a, b) = fit_platt(&scores, &labels).unwrap();
    assert!((a + 1.0).abs() < 0.15 && b.abs() < 0.15, "A={a} B={b}");

    let m = GbtModel {
        platt_a: a,
        platt_b: b,
        ..GbtModel::constant(0.0)
    };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
    let cal: Vec<f64> = order.iter().map(|&i| m.calibrate(scores[i])).collect();
    assert!(cal.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn platt_symmetry_and_sign() {
    let scores: Vec<f64> = (0..40).map(|i| if i < 20 { -1.0 } else { 1.0 }).collect();
    let labels: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
    let (a, b) = fit_platt(&scores, &labels).unwrap();
    assert!(a < 0.0);
    assert!(b.abs() < 1e-9);
    assert!(matches!(fit_platt(&[0.1, 0.2], &[0, 0]), Err(Error::Calibration(_))));
}

#[test]
fn calibrated_vector_probabilities_are_open_interval() {
    let set = small_corpus_set();
    let (m, _) = phi_sentinel::gbt::train_calibrated(&set.vectors, &set.labels, &TrainParams::default()).unwrap();
    for v in &set.vectors {
        let p = m.predict_proba_calibrated(&v.values).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }
}
