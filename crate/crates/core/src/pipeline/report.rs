use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cv::{DetectorMetrics, MetricSummary};
use super::scan::ColumnVerdict;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub tool_version: String,
    pub library_version: String,
    pub model_hash: String,
    pub k: usize,
    pub seed: u64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub columns: Vec<ColumnVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<DetectorMetrics<MetricSummary>>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &ColumnVerdict> {
        self.columns.iter().filter(|c| c.predicted)
    }
}

pub fn write_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut s = report.to_json()?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}
