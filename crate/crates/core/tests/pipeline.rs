use phi_sentinel::folds::{split, stratified_folds};
use phi_sentinel::gbt::{GbtModel, TrainParams};
use phi_sentinel::pipeline::{
    corpus_evidence, cross_validate, scan, scan_evidence, write_report, ColumnVerdict, CvOptions, LabeledSet,
    Report, ReportMeta, ScanOptions,
};
use phi_sentinel::synthgen::{generate_corpus, CorpusSpec, Generator};
use phi_sentinel::{builtin_library, Column, Dataset};

fn corpus_set(seed: u64) -> (Vec<Dataset>, LabeledSet) {
    let spec = CorpusSpec {
        n_datasets: 3,
        total_columns: 300,
        rows: 300,
        phi_fraction: 0.12,
        seed,
        ..CorpusSpec::default()
    };
    let datasets: Vec<Dataset> = generate_corpus(&spec).unwrap().datasets.into_iter().map(|d| d.dataset).collect();
    let ev = corpus_evidence(&datasets, &builtin_library(), 300, 42);
    let set = LabeledSet::from_evidence(&ev).unwrap();
    (datasets, set)
}

fn cv_opts() -> CvOptions {
    CvOptions {
        params: TrainParams {
            rounds: 30,
            ..TrainParams::default()
        },
        ..CvOptions::default()
    }
}

#[test]
fn base_rate_model_still_flags_regex_hits() {
    // A model with no trees predicts the prior for every column.
    let ssn: Vec<String> = (0..200).map(|i| format!("{:03}-{:02}-{:04}", 200 + i, 11 + i % 70, 3000 + i)).collect();
    let lab: Vec<String> = (0..200).map(|i| format!("{}.{}", 5 + i % 4, i % 10)).collect();
    let ds = Dataset::new("d", vec![Column::from_tokens("ssn", &ssn), Column::from_tokens("lab", &lab)]).unwrap();
    let prior = GbtModel::constant((0.075f64 / 0.925).ln());
    let v = scan(&ds, &prior, &builtin_library(), &ScanOptions::default());
    assert!(v[0].predicted);
    assert_eq!(v[0].prob_final, 1.0);
    assert_eq!(v[0].best_pattern_id.as_deref(), Some("ssn"));
    assert!(!v[1].predicted);
    assert!((v[1].prob_ml_calibrated - 0.075).abs() < 1e-12);
}

#[test]
fn ensemble_dominates_both_detectors() {
    let (datasets, set) = corpus_set(3);
    let (model, _) = phi_sentinel::gbt::train_calibrated(&set.vectors, &set.labels, &cv_opts().params).unwrap();
    for t in [0.2, 0.5, 0.8] {
        let opts = ScanOptions {
            threshold: t,
            ..ScanOptions::default()
        };
        for ds in &datasets {
            for v in scan(ds, &model, &builtin_library(), &opts) {
                assert!(v.prob_final >= v.prob_regex && v.prob_final >= v.prob_ml_calibrated);
                assert_eq!(v.prob_final, v.prob_regex.max(v.prob_ml_calibrated));
                assert_eq!(v.predicted, v.prob_final >= t);
                if v.prob_regex >= t || v.prob_ml_calibrated >= t {
                    assert!(v.predicted);
                }
            }
        }
    }
}

#[test]
fn folds_partition_and_have_expected_sizes() {
    let labels: Vec<u8> = (0..889).map(|i| u8::from(i < 67)).collect();
    let folds = stratified_folds(&labels, 5, 42).unwrap();
    let mut seen = vec![0; 889];
    for f in 0..5 {
        let (train, test) = split(&folds, f);
        assert!(test.len() == 177 || test.len() == 178);
        assert_eq!(train.len() + test.len(), 889);
        let pos = test.iter().filter(|&&i| labels[i] == 1).count();
        assert!((13..=14).contains(&pos));
        for i in test {
            seen[i] += 1;
        }
    }
    assert!(seen.iter().all(|&c| c == 1));
    assert!(stratified_folds(&[1, 0, 0, 0, 0, 0], 5, 1).is_err());
}

#[test]
fn cv_summary_matches_per_fold_arithmetic_and_repeats() {
    let (_, set) = corpus_set(4);
    let r = cross_validate(&set.vectors, &set.labels, &set.regex_probs, &cv_opts()).unwrap();
    assert_eq!(r.folds.len(), 5);
    let ml: Vec<[f64; 8]> = r.folds.iter().map(|f| f.metrics.ml.to_array()).collect();
    for j in 0..8 {
        let mean = ml.iter().map(|m| m[j]).sum::<f64>() / 5.0;
        let var = ml.iter().map(|m| (m[j] - mean).powi(2)).sum::<f64>() / 5.0;
        assert!((r.summary.ml.mean.to_array()[j] - mean).abs() < 1e-12);
        assert!((r.summary.ml.std.to_array()[j] - var.sqrt()).abs() < 1e-12);
    }
    for (i, (&e, &m)) in r.oof_ensemble.iter().zip(&r.oof_ml).enumerate() {
        assert_eq!(e, m.max(set.regex_probs[i]));
    }
    let again = cross_validate(&set.vectors, &set.labels, &set.regex_probs, &cv_opts()).unwrap();
    assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
    assert!(r.summary.ensemble.mean.auroc >= r.summary.regex.mean.auroc);
}

#[test]
fn report_round_trips_probabilities_exactly() {
    let (datasets, set) = corpus_set(5);
    let (model, _) = phi_sentinel::gbt::train_calibrated(&set.vectors, &set.labels, &cv_opts().params).unwrap();
    let lib = builtin_library();
    let ev = corpus_evidence(&datasets[..1], &lib, 300, 42);
    let opts = ScanOptions {
        top_attributions: 3,
        ..ScanOptions::default()
    };
    let columns = scan_evidence(&ev, &model, &opts, &set.vectors[..50]);
    assert!(columns.iter().filter(|c| !c.no_data).all(|c| c.top_attributions.len() == 3));
    let report = Report {
        meta: ReportMeta {
            tool_version: phi_sentinel::TOOL_VERSION.into(),
            library_version: lib.version.clone(),
            model_hash: model.hash(),
            k: 300,
            seed: 42,
            threshold: 0.5,
        },
        columns,
        metrics: None,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_report(&report, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let back = Report::from_json(&text).unwrap();
    for (a, b) in report.columns.iter().zip(&back.columns) {
        for (x, y) in [
            (a.prob_regex, b.prob_regex),
            (a.prob_ml_raw, b.prob_ml_raw),
            (a.prob_ml_calibrated, b.prob_ml_calibrated),
            (a.prob_final, b.prob_final),
        ] {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["tool_version", "library_version", "model_hash", "k", "seed", "threshold"] {
        assert!(doc["meta"].get(key).is_some(), "meta.{key} missing");
    }
    assert!(doc["columns"].is_array());

    let empty = Report {
        columns: Vec::<ColumnVerdict>::new(),
        ..report
    };
    let v: serde_json::Value = serde_json::from_str(&empty.to_json().unwrap()).unwrap();
    assert_eq!(v["columns"].as_array().unwrap().len(), 0);
}

#[test]
fn regex_misses_coded_columns_the_model_catches() {
    let corpus = generate_corpus(&CorpusSpec {
        n_datasets: 3,
        total_columns: 300,
        rows: 300,
        phi_fraction: 0.12,
        seed: 6,
        ..CorpusSpec::default()
    })
    .unwrap();
    let manifest: Vec<_> = corpus.datasets.iter().flat_map(|d| d.columns.clone()).collect();
    let datasets: Vec<Dataset> = corpus.datasets.into_iter().map(|d| d.dataset).collect();
    let set = LabeledSet::from_evidence(&corpus_evidence(&datasets, &builtin_library(), 300, 42)).unwrap();
    let r = cross_validate(&set.vectors, &set.labels, &set.regex_probs, &cv_opts()).unwrap();
    assert!(r.summary.regex.mean.sensitivity < 0.9);

    let coded: Vec<usize> = manifest
        .iter()
        .enumerate()
        .filter(|(_, m)| matches!((m.generator, m.format.as_str()), (Generator::Race, "coded") | (Generator::Sex, "coded01")))
        .map(|(i, _)| i)
        .collect();
    assert!(!coded.is_empty());
    assert!(coded.iter().all(|&i| set.regex_probs[i] < 0.5));
    let caught = coded.iter().filter(|&&i| r.oof_ml[i] >= 0.5).count();
    assert!(caught * 2 > coded.len(), "model caught {caught} of {}", coded.len());
}
