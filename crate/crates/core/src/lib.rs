//! Column-level detection of HIPAA Safe Harbor identifiers (PHI) in
//! tabular health data.
//!
//! Each column is sampled once and scored two ways: a regular-expression
//! screen over the sampled values, and a gradient-boosted tree classifier
//! over engineered metadata features. The calibrated classifier
//! probability and the screen probability are combined with `max`, so a
//! column flagged by either detector stays flagged.

pub mod category;
pub mod datetime;
pub mod error;
pub mod explain;
pub mod folds;
pub mod gbt;
pub mod ingest;
pub mod metafeatures;
pub mod pipeline;
pub mod regex_screen;
pub mod stats;
pub mod synthgen;

pub use category::{CategorySet, PhiCategory};
pub use error::{Error, Result};
pub use explain::{importance_report, shap_values, Attribution, ImportanceReport};
pub use gbt::{GbtModel, TrainParams};
pub use ingest::{
    infer_type, load_dataset, load_datasets, sample_column, Column, ColumnSample, Dataset, InferredType,
    LoadOptions,
};
pub use metafeatures::{compute_metafeatures, flatten, MetaFeatureVector, MetaFeatures};
pub use pipeline::{compute_metrics, cross_validate, scan, ColumnVerdict, MetricSet};
pub use regex_screen::{builtin_library, screen_column, PatternEntry, PatternLibrary, RegexVerdict};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
