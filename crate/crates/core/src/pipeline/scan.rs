use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::shap_rows;
use crate::gbt::{sigmoid, GbtModel};
use crate::ingest::{sample_column, Column, Dataset, DEFAULT_K};
use crate::metafeatures::{compute_metafeatures, flatten, MetaFeatureVector};
use crate::regex_screen::{screen_column, PatternLibrary, RegexVerdict};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const PARANOID_THRESHOLD: f64 = 0.2;

/// The ensemble combiner: a column flagged by either detector stays
/// flagged.
#[inline]
pub fn combine(prob_regex: f64, prob_ml_calibrated: f64) -> f64 {
    prob_regex.max(prob_ml_calibrated)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotContribution {
    pub slot: usize,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnVerdict {
    pub column_name: String,
    pub prob_regex: f64,
    pub prob_ml_raw: f64,
    pub prob_ml_calibrated: f64,
    pub prob_final: f64,
    pub predicted: bool,
    pub best_pattern_id: Option<String>,
    /// No non-null values were available, so neither detector ran.
    pub no_data: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub top_attributions: Vec<SlotContribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub k: usize,
    pub seed: u64,
    pub threshold: f64,
    /// How many attributions to attach per column (0 disables).
    pub top_attributions: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            k: DEFAULT_K,
            seed: 42,
            threshold: DEFAULT_THRESHOLD,
            top_attributions: 0,
        }
    }
}

/// Both detector inputs for one column, computed from a single sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnEvidence {
    pub column_name: String,
    pub regex: RegexVerdict,
    /// `None` when the column had no data.
    pub vector: Option<MetaFeatureVector>,
    pub label: Option<u8>,
}

impl ColumnEvidence {
    /// Feature row for the model; columns without data become all-missing.
    pub fn vector_or_missing(&self) -> MetaFeatureVector {
        self.vector
            .clone()
            .unwrap_or_else(|| MetaFeatureVector::all_missing(&self.column_name))
    }
}

pub fn column_evidence(column: &Column, library: &PatternLibrary, k: usize, seed: u64) -> ColumnEvidence {
    let sampled = sample_column(column, k, seed).ok().and_then(|s| {
        let regex = screen_column(&s, library).ok()?;
        let features = compute_metafeatures(&s).ok()?;
        Some((regex, flatten(&features, &column.name)))
    });
    let (regex, vector) = match sampled {
        Some((r, v)) => (r, Some(v)),
        None => (RegexVerdict::no_data(&column.name), None),
    };
    ColumnEvidence {
        column_name: column.name.clone(),
        regex,
        vector,
        label: column.label,
    }
}

/// Evidence for every column in order, computed in parallel.
pub fn dataset_evidence(dataset: &Dataset, library: &PatternLibrary, k: usize, seed: u64) -> Vec<ColumnEvidence> {
    dataset
        .columns
        .par_iter()
        .map(|c| column_evidence(c, library, k, seed))
        .collect()
}

/// Evidence for every column of several datasets, in dataset order.
pub fn corpus_evidence(datasets: &[Dataset], library: &PatternLibrary, k: usize, seed: u64) -> Vec<ColumnEvidence> {
    datasets
        .iter()
        .flat_map(|d| dataset_evidence(d, library, k, seed))
        .collect()
}

/// Feature rows, labels and regex probabilities for supervised use.
/// Every column must carry a label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub vectors: Vec<MetaFeatureVector>,
    pub labels: Vec<u8>,
    pub regex_probs: Vec<f64>,
}

impl LabeledSet {
    pub fn from_evidence(evidence: &[ColumnEvidence]) -> Result<Self> {
        let mut set = LabeledSet {
            vectors: Vec::with_capacity(evidence.len()),
            labels: Vec::with_capacity(evidence.len()),
            regex_probs: Vec::with_capacity(evidence.len()),
        };
        for ev in evidence {
            let label = ev
                .label
                .ok_or_else(|| Error::MissingLabel(ev.column_name.clone()))?;
            set.vectors.push(ev.vector_or_missing());
            set.labels.push(label);
            set.regex_probs.push(ev.regex.prob_phi);
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn verdict_from_evidence(
    ev: &ColumnEvidence,
    model: &GbtModel,
    threshold: f64,
) -> ColumnVerdict {
    let base = ColumnVerdict {
        column_name: ev.column_name.clone(),
        prob_regex: 0.0,
        prob_ml_raw: 0.0,
        prob_ml_calibrated: 0.0,
        prob_final: 0.0,
        predicted: false,
        best_pattern_id: None,
        no_data: true,
        top_attributions: Vec::new(),
        label: ev.label,
    };
    let Some(v) = &ev.vector else { return base };
    let Ok(margin) = model.predict_margin(&v.values) else {
        return base;
    };
    let prob_ml_calibrated = model.calibrate(margin);
    let prob_final = combine(ev.regex.prob_phi, prob_ml_calibrated);
    ColumnVerdict {
        prob_regex: ev.regex.prob_phi,
        prob_ml_raw: sigmoid(margin),
        prob_ml_calibrated,
        prob_final,
        predicted: prob_final >= threshold,
        best_pattern_id: ev.regex.best_pattern_id.clone(),
        no_data: false,
        ..base
    }
}

fn attach_attributions(
    verdicts: &mut [ColumnVerdict],
    evidence: &[ColumnEvidence],
    model: &GbtModel,
    background: &[MetaFeatureVector],
    top: usize,
) {
    let bg: Vec<&[f64]> = background.iter().map(|v| v.values.as_slice()).collect();
    if bg.is_empty() || top == 0 {
        return;
    }
    verdicts
        .par_iter_mut()
        .zip(evidence)
        .for_each(|(verdict, ev)| {
            let Some(v) = &ev.vector else { return };
            let Ok((_, phi)) = shap_rows(model, &v.values, &bg) else {
                return;
            };
            let mut ranked: Vec<(usize, f64)> = phi.into_iter().enumerate().collect();
            ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
            verdict.top_attributions = ranked
                .into_iter()
                .take(top)
                .map(|(slot, value)| SlotContribution {
                    slot,
                    name: model.slot_names[slot].clone(),
                    value,
                })
                .collect();
        });
}

/// Run both detectors over every column and combine them. Columns without
/// data are reported with `prob_final = 0` and `no_data` set; a bad column
/// never aborts the scan.
pub fn scan(
    dataset: &Dataset,
    model: &GbtModel,
    library: &PatternLibrary,
    opts: &ScanOptions,
) -> Vec<ColumnVerdict> {
    let evidence = dataset_evidence(dataset, library, opts.k, opts.seed);
    scan_evidence(&evidence, model, opts, &[])
}

/// As [`scan`], on precomputed evidence, attaching the top attributions
/// against `background` when requested.
pub fn scan_evidence(
    evidence: &[ColumnEvidence],
    model: &GbtModel,
    opts: &ScanOptions,
    background: &[MetaFeatureVector],
) -> Vec<ColumnVerdict> {
    let mut verdicts: Vec<ColumnVerdict> = evidence
        .iter()
        .map(|ev| verdict_from_evidence(ev, model, opts.threshold))
        .collect();
    attach_attributions(&mut verdicts, evidence, model, background, opts.top_attributions);
    verdicts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex_screen::builtin_library;

    #[test]
    fn max_combiner() {
        assert_eq!(combine(0.3, 0.8), 0.8);
        assert_eq!(combine(1.0, 0.01), 1.0);
    }

    #[test]
    fn empty_column_is_flagged_not_fatal() {
        let ds = Dataset::new(
            "d",
            vec![
                Column::new("empty", vec![None, None]),
                Column::from_tokens("ssn", &["123-45-6789", "987-65-4321"]),
            ],
        )
        .unwrap();
        let v = scan(&ds, &GbtModel::constant(-3.0), &builtin_library(), &ScanOptions::default());
        assert!(v[0].no_data);
        assert_eq!(v[0].prob_final, 0.0);
        assert!(!v[0].predicted);
        assert!(v[1].predicted);
        assert_eq!(v[1].prob_regex, 1.0);
    }
}
