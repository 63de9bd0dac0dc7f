//! Engineered metadata features for a sampled column and their flattening
//! into the fixed 49-slot row of the derived matrix.
//!
//! Features split into two families:
//!
//! * frequency features (mode ratio, cardinality, category ratios, Gini
//!   impurity, diversity) are computed on raw tokens for every type and are
//!   therefore unchanged by any bijective recoding of the token alphabet;
//! * numeric features (moments, quantiles, histogram, digit precision) are
//!   computed on parsed numbers for `int`/`float` columns and on epoch
//!   seconds for `datetime` columns, and are missing for `string` columns.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datetime;
use crate::error::{Error, Result};
use crate::ingest::{parse_number, sample_column, ColumnSample, Dataset, InferredType};
use crate::stats::{self, HISTOGRAM_BINS};

/// Number of slots in a flattened feature vector.
pub const NUM_SLOTS: usize = 49;

/// Marker stored in slots whose statistic is undefined for the column.
pub const MISSING: f64 = f64::NAN;

pub fn is_missing(v: f64) -> bool {
    v.is_nan()
}

pub const QUANTILE_LEVELS: [f64; 4] = [0.05, 0.25, 0.75, 0.95];

/// Canonical slot names, in vector order.
pub const SLOT_NAMES: [&str; NUM_SLOTS] = [
    "type_int",
    "type_float",
    "type_string",
    "type_datetime",
    "categorical",
    "order_asc",
    "order_desc",
    "null_count",
    "null_ratio",
    "min",
    "max",
    "mode_ratio",
    "median",
    "mad",
    "sum",
    "mean",
    "variance",
    "stddev",
    "skewness",
    "kurtosis",
    "num_zeros",
    "num_negatives",
    "hist_0",
    "hist_1",
    "hist_2",
    "hist_3",
    "hist_4",
    "hist_5",
    "hist_6",
    "hist_7",
    "hist_8",
    "hist_9",
    "bin_width",
    "q05",
    "q25",
    "q75",
    "q95",
    "unique_count",
    "unique_ratio",
    "max_category_ratio",
    "min_category_ratio",
    "gini_impurity",
    "diversity_index",
    "precision_min",
    "precision_max",
    "precision_mean",
    "precision_var",
    "precision_std",
    "precision_moe",
];

pub fn slot_index(name: &str) -> Option<usize> {
    SLOT_NAMES.iter().position(|s| *s == name)
}

/// Statistics over per-token digit counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitPrecision {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub var: f64,
    pub std: f64,
    /// 95% normal-approximation margin of error of the mean digit count.
    pub moe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatures {
    pub data_type: InferredType,
    pub categorical: bool,
    pub order_asc: bool,
    pub order_desc: bool,
    pub null_count: usize,
    pub null_ratio: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mode_ratio: f64,
    pub median: Option<f64>,
    pub mad: Option<f64>,
    pub sum: Option<f64>,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub stddev: Option<f64>,
    pub skewness: Option<f64>,
    /// Excess kurtosis (normal = 0, uniform = -1.2).
    pub kurtosis: Option<f64>,
    pub num_zeros: Option<usize>,
    pub num_negatives: Option<usize>,
    pub histogram_counts: Option<[f64; HISTOGRAM_BINS]>,
    pub bin_width: Option<f64>,
    pub quantiles: Option<[f64; 4]>,
    pub unique_count: usize,
    pub unique_ratio: f64,
    pub max_category_ratio: Option<f64>,
    pub min_category_ratio: Option<f64>,
    pub gini_impurity: f64,
    pub diversity_index: f64,
    pub precision: Option<DigitPrecision>,
}

/// Token frequencies sorted descending; the order is independent of the
/// tokens themselves, which keeps frequency features bit-identical under
/// recoding.
fn sorted_counts<S: AsRef<str>>(values: &[S]) -> Vec<usize> {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for v in values {
        *freq.entry(v.as_ref()).or_insert(0) += 1;
    }
    let mut counts: Vec<usize> = freq.into_values().collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts
}

fn gini_from_counts(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

fn diversity_from_counts(counts: &[usize], n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let same: f64 = counts.iter().map(|&c| (c * c.saturating_sub(1)) as f64).sum();
    1.0 - same / (n as f64 * (n - 1) as f64)
}

/// Gini impurity `1 - Σ pᵢ²` over token frequencies.
pub fn gini_impurity<S: AsRef<str>>(values: &[S]) -> f64 {
    gini_from_counts(&sorted_counts(values), values.len())
}

/// Probability that two entries drawn without replacement differ.
pub fn diversity_index<S: AsRef<str>>(values: &[S]) -> f64 {
    diversity_from_counts(&sorted_counts(values), values.len())
}

/// Digit-count statistics over the tokens that parse as numbers; `None`
/// when no token does.
pub fn digit_precision_stats<S: AsRef<str>>(values: &[S]) -> Option<DigitPrecision> {
    let digits: Vec<f64> = values
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| parse_number(t).is_some())
        .map(|t| stats::digit_count(t) as f64)
        .collect();
    let mean = stats::mean(&digits)?;
    let (var, _, _) = stats::central_moments(&digits)?;
    let std = var.sqrt();
    let (min, max) = min_max(&digits)?;
    Some(DigitPrecision {
        min,
        max,
        mean,
        var,
        std,
        moe: 1.96 * std / (digits.len() as f64).sqrt(),
    })
}

pub fn histogram(values: &[f64]) -> Option<([f64; HISTOGRAM_BINS], f64)> {
    stats::histogram(values)
}

fn min_max(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    Some(
        xs.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x))),
    )
}

/// Numeric view of the sample: parsed numbers, epoch seconds, or nothing.
fn numeric_values(sample: &ColumnSample) -> Option<Vec<f64>> {
    let parse: fn(&str) -> Option<f64> = match sample.inferred_type {
        InferredType::Int | InferredType::Float => parse_number,
        InferredType::Datetime => datetime::epoch_seconds,
        InferredType::String => return None,
    };
    let xs: Vec<f64> = sample.values.iter().filter_map(|v| parse(v)).collect();
    (!xs.is_empty()).then_some(xs)
}

fn is_monotone<T, F: Fn(&T, &T) -> bool>(xs: &[T], ok: F) -> bool {
    xs.windows(2).all(|w| ok(&w[0], &w[1]))
}

pub fn categorical_threshold(k: usize) -> f64 {
    (0.05 * k as f64).max(20.0)
}

pub fn compute_metafeatures(sample: &ColumnSample) -> Result<MetaFeatures> {
    let k = sample.values.len();
    if k == 0 {
        return Err(Error::EmptySample(sample.column_name.clone()));
    }

    let counts = sorted_counts(&sample.values);
    let unique_count = counts.len();
    let categorical = unique_count as f64 <= categorical_threshold(k);
    let kf = k as f64;
    let mode_ratio = counts[0] as f64 / kf;
    let (max_category_ratio, min_category_ratio) = if categorical {
        (
            Some(counts[0] as f64 / kf),
            Some(counts[counts.len() - 1] as f64 / kf),
        )
    } else {
        (None, None)
    };

    let numeric = numeric_values(sample);
    let (order_asc, order_desc) = match &numeric {
        Some(xs) => (is_monotone(xs, |a, b| a <= b), is_monotone(xs, |a, b| a >= b)),
        None => (
            is_monotone(&sample.values, |a, b| a <= b),
            is_monotone(&sample.values, |a, b| a >= b),
        ),
    };

    let mut f = MetaFeatures {
        data_type: sample.inferred_type,
        categorical,
        order_asc,
        order_desc,
        null_count: sample.null_count,
        null_ratio: if sample.total_cells > 0 {
            sample.null_count as f64 / sample.total_cells as f64
        } else {
            0.0
        },
        min: None,
        max: None,
        mode_ratio,
        median: None,
        mad: None,
        sum: None,
        mean: None,
        variance: None,
        stddev: None,
        skewness: None,
        kurtosis: None,
        num_zeros: None,
        num_negatives: None,
        histogram_counts: None,
        bin_width: None,
        quantiles: None,
        unique_count,
        unique_ratio: unique_count as f64 / kf,
        max_category_ratio,
        min_category_ratio,
        gini_impurity: gini_from_counts(&counts, k),
        diversity_index: diversity_from_counts(&counts, k),
        precision: None,
    };

    if let Some(xs) = numeric {
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        f.min = Some(lo);
        f.max = Some(hi);
        f.median = stats::median_sorted(&sorted);
        f.mad = stats::mad_sorted(&sorted);
        f.sum = Some(xs.iter().sum());
        f.mean = stats::mean(&xs);
        let (m2, m3, m4) = stats::central_moments(&xs).expect("non-empty");
        f.variance = Some(m2);
        f.stddev = Some(m2.sqrt());
        if hi > lo && m2 > 0.0 {
            f.skewness = Some(m3 / m2.powf(1.5));
            f.kurtosis = Some(m4 / (m2 * m2) - 3.0);
        }
        f.num_zeros = Some(xs.iter().filter(|&&x| x == 0.0).count());
        f.num_negatives = Some(xs.iter().filter(|&&x| x < 0.0).count());
        if let Some((h, w)) = stats::histogram(&xs) {
            f.histogram_counts = Some(h);
            f.bin_width = Some(w);
        }
        let mut q = [0.0; 4];
        for (slot, &p) in q.iter_mut().zip(QUANTILE_LEVELS.iter()) {
            *slot = stats::quantile_sorted(&sorted, p).expect("non-empty");
        }
        f.quantiles = Some(q);
    }

    if sample.inferred_type.is_numeric() {
        f.precision = digit_precision_stats(&sample.values);
    }
    Ok(f)
}

/// One row of the derived matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub column_name: String,
    pub values: Vec<f64>,
}

impl MetaFeatureVector {
    pub fn new(column_name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != NUM_SLOTS {
            return Err(Error::Dimension {
                expected: NUM_SLOTS,
                got: values.len(),
            });
        }
        Ok(MetaFeatureVector {
            column_name: column_name.into(),
            values,
        })
    }

    pub fn all_missing(column_name: impl Into<String>) -> Self {
        MetaFeatureVector {
            column_name: column_name.into(),
            values: vec![MISSING; NUM_SLOTS],
        }
    }

    pub fn get(&self, slot: &str) -> Option<f64> {
        slot_index(slot).map(|i| self.values[i])
    }
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(MISSING)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn flatten(features: &MetaFeatures, column_name: &str) -> MetaFeatureVector {
    let mut v = Vec::with_capacity(NUM_SLOTS);
    for t in InferredType::ALL {
        v.push(flag(features.data_type == t));
    }
    v.push(flag(features.categorical));
    v.push(flag(features.order_asc));
    v.push(flag(features.order_desc));
    v.push(features.null_count as f64);
    v.push(features.null_ratio);
    v.push(opt(features.min));
    v.push(opt(features.max));
    v.push(features.mode_ratio);
    v.push(opt(features.median));
    v.push(opt(features.mad));
    v.push(opt(features.sum));
    v.push(opt(features.mean));
    v.push(opt(features.variance));
    v.push(opt(features.stddev));
    v.push(opt(features.skewness));
    v.push(opt(features.kurtosis));
    v.push(opt(features.num_zeros.map(|c| c as f64)));
    v.push(opt(features.num_negatives.map(|c| c as f64)));
    match features.histogram_counts {
        Some(h) => v.extend_from_slice(&h),
        None => v.extend_from_slice(&[MISSING; HISTOGRAM_BINS]),
    }
    v.push(opt(features.bin_width));
    match features.quantiles {
        Some(q) => v.extend_from_slice(&q),
        None => v.extend_from_slice(&[MISSING; 4]),
    }
    v.push(features.unique_count as f64);
    v.push(features.unique_ratio);
    v.push(opt(features.max_category_ratio));
    v.push(opt(features.min_category_ratio));
    v.push(features.gini_impurity);
    v.push(features.diversity_index);
    match features.precision {
        Some(p) => v.extend_from_slice(&[p.min, p.max, p.mean, p.var, p.std, p.moe]),
        None => v.extend_from_slice(&[MISSING; 6]),
    }
    debug_assert_eq!(v.len(), NUM_SLOTS);
    MetaFeatureVector {
        column_name: column_name.to_string(),
        values: v,
    }
}

/// Sample and featurise one column; `None` when it has no data.
pub fn column_vector(
    column: &crate::ingest::Column,
    k: usize,
    seed: u64,
) -> Option<MetaFeatureVector> {
    let sample = sample_column(column, k, seed).ok()?;
    compute_metafeatures(&sample)
        .ok()
        .map(|f| flatten(&f, &column.name))
}

/// Feature rows for every column, in column order, computed in parallel on
/// the current rayon pool.
pub fn dataset_vectors(dataset: &Dataset, k: usize, seed: u64) -> Vec<Option<MetaFeatureVector>> {
    dataset
        .columns
        .par_iter()
        .map(|c| column_vector(c, k, seed))
        .collect()
}

/// Write rows as CSV: slot-name header plus a trailing `label` column when
/// labels are supplied. Missing slots are written as `NaN`.
pub fn write_matrix_csv<W: Write>(
    out: W,
    rows: &[MetaFeatureVector],
    labels: Option<&[u8]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = SLOT_NAMES.to_vec();
    if labels.is_some() {
        header.push("label");
    }
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut rec: Vec<String> = row.values.iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<matrix>", e))?;
    Ok(())
}

pub fn save_matrix_csv(
    path: impl AsRef<Path>,
    rows: &[MetaFeatureVector],
    labels: Option<&[u8]>,
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_matrix_csv(std::io::BufWriter::new(file), rows, labels)
}
