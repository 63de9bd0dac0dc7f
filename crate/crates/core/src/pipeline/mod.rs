//! Detector ensemble, evaluation metrics, cross-validation and reports.

mod cv;
mod metrics;
mod report;
mod scan;

pub use cv::{
    cross_validate, format_summary_table, CvOptions, CvResult, DetectorMetrics, FoldResult,
    MetricSummary,
};
pub use metrics::{auroc, average_precision, compute_metrics, Confusion, MetricSet};
pub use report::{write_report, Report, ReportMeta};
pub use scan::{
    column_evidence, combine, corpus_evidence, dataset_evidence, scan, scan_evidence, verdict_from_evidence,
    ColumnEvidence, ColumnVerdict, LabeledSet, ScanOptions, SlotContribution, DEFAULT_THRESHOLD,
    PARANOID_THRESHOLD,
};
