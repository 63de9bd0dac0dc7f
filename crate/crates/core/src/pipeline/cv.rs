use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, MetricSet};
use super::scan::combine;
use crate::error::{Error, Result};
use crate::folds;
use crate::gbt::{train_calibrated, GbtModel, TrainParams};
use crate::metafeatures::MetaFeatureVector;

/// Mean and population standard deviation of each metric across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: MetricSet,
    pub std: MetricSet,
}

impl MetricSummary {
    pub fn from_folds(sets: &[MetricSet]) -> Self {
        let n = sets.len().max(1) as f64;
        let mut mean = [0.0; 8];
        for s in sets {
            for (m, v) in mean.iter_mut().zip(s.to_array()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; 8];
        for s in sets {
            for ((acc, v), m) in var.iter_mut().zip(s.to_array()).zip(mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let std = var.map(|v| (v / n).sqrt());
        MetricSummary {
            mean: MetricSet::from_array(mean),
            std: MetricSet::from_array(std),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorMetrics<T> {
    pub regex: T,
    pub ml: T,
    pub ensemble: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub metrics: DetectorMetrics<MetricSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub summary: DetectorMetrics<MetricSummary>,
    /// Out-of-fold calibrated ML probability for every item.
    pub oof_ml: Vec<f64>,
    /// Out-of-fold ensemble probability for every item.
    pub oof_ensemble: Vec<f64>,
    #[serde(skip)]
    pub models: Vec<GbtModel>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub threshold: f64,
    pub params: TrainParams,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 5,
            seed: 42,
            threshold: super::scan::DEFAULT_THRESHOLD,
            params: TrainParams::default(),
        }
    }
}

/// Stratified k-fold evaluation of the regex screen, the calibrated model
/// and their max-ensemble. The screen needs no training, so its per-fold
/// numbers come straight from `regex_probs`.
pub fn cross_validate(
    vectors: &[MetaFeatureVector],
    labels: &[u8],
    regex_probs: &[f64],
    opts: &CvOptions,
) -> Result<CvResult> {
    for len in [labels.len(), regex_probs.len()] {
        if len != vectors.len() {
            return Err(Error::Dimension {
                expected: vectors.len(),
                got: len,
            });
        }
    }
    let assignment = folds::stratified_folds(labels, opts.folds, opts.seed)?;

    let per_fold: Vec<(GbtModel, Vec<usize>, Vec<f64>)> = (0..opts.folds)
        .into_par_iter()
        .map(|f| {
            let (train_idx, test_idx) = folds::split(&assignment, f);
            let x: Vec<MetaFeatureVector> = train_idx.iter().map(|&i| vectors[i].clone()).collect();
            let y: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
            let (model, _) = train_calibrated(&x, &y, &opts.params)?;
            let probs = test_idx
                .iter()
                .map(|&i| model.calibrate(model.margin_unchecked(&vectors[i].values)))
                .collect();
            Ok((model, test_idx, probs))
        })
        .collect::<Result<_>>()?;

    let mut oof_ml = vec![0.0; vectors.len()];
    let mut oof_ensemble = vec![0.0; vectors.len()];
    let mut fold_results = Vec::with_capacity(opts.folds);
    let mut models = Vec::with_capacity(opts.folds);
    for (f, (model, test_idx, ml)) in per_fold.into_iter().enumerate() {
        let y: Vec<u8> = test_idx.iter().map(|&i| labels[i]).collect();
        let rx: Vec<f64> = test_idx.iter().map(|&i| regex_probs[i]).collect();
        let ens: Vec<f64> = rx.iter().zip(&ml).map(|(&r, &m)| combine(r, m)).collect();
        for (j, &i) in test_idx.iter().enumerate() {
            oof_ml[i] = ml[j];
            oof_ensemble[i] = ens[j];
        }
        fold_results.push(FoldResult {
            fold: f,
            metrics: DetectorMetrics {
                regex: compute_metrics(&rx, &y, opts.threshold)?,
                ml: compute_metrics(&ml, &y, opts.threshold)?,
                ensemble: compute_metrics(&ens, &y, opts.threshold)?,
            },
            test_indices: test_idx,
        });
        models.push(model);
    }

    let pick = |g: fn(&DetectorMetrics<MetricSet>) -> MetricSet| {
        let sets: Vec<MetricSet> = fold_results.iter().map(|r| g(&r.metrics)).collect();
        MetricSummary::from_folds(&sets)
    };
    let summary = DetectorMetrics {
        regex: pick(|m| m.regex),
        ml: pick(|m| m.ml),
        ensemble: pick(|m| m.ensemble),
    };
    Ok(CvResult {
        folds: fold_results,
        summary,
        oof_ml,
        oof_ensemble,
        models,
    })
}

fn cell(mean: f64, std: f64) -> String {
    let f = |v: f64| {
        let s = format!("{v:.3}");
        match s.strip_prefix("0.") {
            Some(rest) => format!(".{rest}"),
            None => s,
        }
    };
    format!("{}({})", f(mean), f(std))
}

/// Plain-text table with one `mean(std)` cell per detector and metric.
pub fn format_summary_table(summary: &DetectorMetrics<MetricSummary>) -> String {
    let mut out = format!("{:<10}", "model");
    for name in MetricSet::NAMES {
        out.push_str(&format!(" {name:>12}"));
    }
    out.push('\n');
    for (label, s) in [
        ("Regex", &summary.regex),
        ("ML", &summary.ml),
        ("Ensemble", &summary.ensemble),
    ] {
        out.push_str(&format!("{label:<10}"));
        for (m, sd) in s.mean.to_array().into_iter().zip(s.std.to_array()) {
            out.push_str(&format!(" {:>12}", cell(m, sd)));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_uses_population_std() {
        let a = MetricSet::from_array([1.0; 8]);
        let b = MetricSet::from_array([0.0; 8]);
        let s = MetricSummary::from_folds(&[a, b]);
        assert_eq!(s.mean.auroc, 0.5);
        assert_eq!(s.std.f1, 0.5);
    }

    #[test]
    fn cells_drop_leading_zero() {
        assert_eq!(cell(0.54, 0.052), ".540(.052)");
        assert_eq!(cell(1.0, 0.0), "1.000(.000)");
    }
}
